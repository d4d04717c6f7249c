#include "offlang/augment.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "offlang/error.hpp"
#include "offlang/textprep.hpp"

namespace offlang::augment {

namespace {

std::string to_lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string strip(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::unordered_set<std::string> read_word_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open word list: " + path);
  std::unordered_set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    const std::string word = to_lower(strip(line));
    if (!word.empty()) words.insert(word);
  }
  return words;
}

std::string join(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

}  // namespace

OffensiveLexicon load_wordlist(const std::string& path,
                               const std::optional<std::string>& removals_path) {
  OffensiveLexicon lexicon;
  lexicon.words = read_word_file(path);
  if (lexicon.words.empty()) {
    throw DataError("word list is empty: " + path);
  }
  if (removals_path) {
    for (const auto& word : read_word_file(*removals_path)) {
      if (lexicon.words.erase(word) > 0) lexicon.removed_words.insert(word);
    }
  }
  return lexicon;
}

std::string provenance_name(Provenance p) {
  switch (p) {
    case Provenance::kOriginal: return "original";
    case Provenance::kDeleted: return "deleted";
    case Provenance::kGenerated: return "generated";
  }
  return "?";
}

corpus::Sample delete_boundary_tokens(const corpus::Sample& cleaned,
                                      const OffensiveLexicon& lexicon) {
  const std::vector<std::string> tokens = textprep::tokenize(cleaned.raw_text);
  if (tokens.empty()) return cleaned;
  if (lexicon.contains(tokens.front()) || lexicon.contains(tokens.back())) {
    return cleaned;  // boundary hits keep the sample as it is
  }
  corpus::Sample out = cleaned;
  if (tokens.size() <= 2) {
    out.raw_text.clear();
    return out;
  }
  out.raw_text = join({tokens.begin() + 1, tokens.end() - 1});
  return out;
}

std::vector<corpus::Sample> deleted_variants(
    const corpus::LabeledCorpus& cleaned, const OffensiveLexicon& lexicon) {
  std::vector<corpus::Sample> out;
  out.reserve(cleaned.size());
  for (const auto& sample : cleaned.samples) {
    corpus::Sample variant = delete_boundary_tokens(sample, lexicon);
    variant.id = sample.id + "-del";
    out.push_back(std::move(variant));
  }
  return out;
}

std::unordered_map<std::string, std::string> load_continuations(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open continuations file: " + path);
  std::unordered_map<std::string, std::string> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ParseError("continuations line " + std::to_string(line_no) +
                       " has no tab separator: " + path);
    }
    const std::string id = line.substr(0, tab);
    if (id.empty()) {
      throw ParseError("continuations line " + std::to_string(line_no) +
                       " has an empty id: " + path);
    }
    out[id] = line.substr(tab + 1);
  }
  return out;
}

std::vector<corpus::Sample> generated_variants(
    const corpus::LabeledCorpus& cleaned,
    const std::unordered_map<std::string, std::string>& continuations) {
  std::vector<corpus::Sample> out;
  for (const auto& sample : cleaned.samples) {
    auto it = continuations.find(sample.id);
    if (it == continuations.end()) continue;
    const std::string continuation = textprep::clean(it->second);
    corpus::Sample variant = sample;
    variant.id = sample.id + "-gen";
    if (!continuation.empty()) {
      variant.raw_text = sample.raw_text.empty()
                             ? continuation
                             : sample.raw_text + " " + continuation;
    }
    out.push_back(std::move(variant));
  }
  return out;
}

AugmentedCorpus merge_augmented(const corpus::LabeledCorpus& original,
                                const std::vector<corpus::Sample>& deleted,
                                const std::vector<corpus::Sample>& generated) {
  AugmentedCorpus merged;
  merged.schema = original.schema;
  std::unordered_set<std::string> seen_texts;
  std::unordered_set<std::string> seen_ids;

  auto push = [&](const corpus::Sample& sample, Provenance provenance) {
    if (sample.raw_text.empty()) return;
    if (!seen_texts.insert(sample.raw_text).second) return;
    if (!seen_ids.insert(sample.id).second) {
      throw DataError("duplicate id '" + sample.id + "' while merging");
    }
    merged.samples.push_back(sample);
    merged.provenance.push_back(provenance);
  };

  for (const auto& sample : original.samples) {
    if (!original.schema.has_label(sample.label)) {
      throw DataError("sample " + sample.id + " label '" + sample.label +
                      "' is not in the corpus schema");
    }
    push(sample, Provenance::kOriginal);
  }
  for (const auto& sample : deleted) {
    if (!original.schema.has_label(sample.label)) {
      throw DataError("augmented sample " + sample.id + " label '" +
                      sample.label + "' is not in the corpus schema");
    }
    push(sample, Provenance::kDeleted);
  }
  for (const auto& sample : generated) {
    if (!original.schema.has_label(sample.label)) {
      throw DataError("augmented sample " + sample.id + " label '" +
                      sample.label + "' is not in the corpus schema");
    }
    push(sample, Provenance::kGenerated);
  }
  return merged;
}

corpus::LabeledCorpus to_corpus(const AugmentedCorpus& augmented) {
  corpus::LabeledCorpus out;
  out.schema = augmented.schema;
  out.samples = augmented.samples;
  return out;
}

}  // namespace offlang::augment
