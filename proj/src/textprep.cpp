#include "offlang/textprep.hpp"

#include <cctype>
#include <regex>

namespace offlang::textprep {

namespace {

bool is_ascii_letter(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

const std::regex& url_re() {
  static const std::regex re(
      R"((https?://\S+)|(\bwww\.\S+)|(\bt\.co/\S+))",
      std::regex::icase | std::regex::optimize);
  return re;
}

const std::regex& email_re() {
  static const std::regex re(
      R"([A-Za-z0-9._%+\-]+@[A-Za-z0-9.\-]+\.[A-Za-z]{2,})",
      std::regex::optimize);
  return re;
}

const std::regex& ipv4_re() {
  static const std::regex re(
      R"(\b\d{1,3}\.\d{1,3}\.\d{1,3}\.\d{1,3}\b)", std::regex::optimize);
  return re;
}

}  // namespace

std::string clean(const std::string& raw) {
  std::string s = std::regex_replace(raw, url_re(), " ");
  s = std::regex_replace(s, email_re(), " ");
  s = std::regex_replace(s, ipv4_re(), " ");

  std::string kept;
  kept.reserve(s.size());
  for (unsigned char c : s) {
    if (c >= '0' && c <= '9') continue;  // rule 4
    if (is_ascii_letter(c)) {
      kept.push_back(static_cast<char>(std::tolower(c)));  // rules 5+6
    } else if (is_space(c)) {
      kept.push_back(' ');
    }
    // rule 5: '#', '@', punctuation, and any non-ASCII byte are dropped
  }

  std::string out;
  out.reserve(kept.size());
  for (char c : kept) {
    if (c == ' ') {
      if (out.empty() || out.back() == ' ') continue;
      out.push_back(' ');
    } else {
      out.push_back(c);
    }
  }
  if (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

std::vector<std::string> tokenize(const std::string& clean_text) {
  std::vector<std::string> tokens;
  std::size_t start = 0;
  while (start < clean_text.size()) {
    std::size_t end = clean_text.find(' ', start);
    if (end == std::string::npos) end = clean_text.size();
    if (end > start) tokens.push_back(clean_text.substr(start, end - start));
    start = end + 1;
  }
  return tokens;
}

}  // namespace offlang::textprep
