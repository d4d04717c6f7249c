#include <doctest.h>

#include <random>
#include <string>

#include "offlang/textprep.hpp"

using offlang::textprep::clean;
using offlang::textprep::tokenize;

namespace {

// Random byte strings mixing letters, digits, symbols, whitespace and
// non-ASCII bytes, for the idempotence fuzz.
std::string random_raw_string(std::mt19937_64& rng) {
  static const std::string pool =
      "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
      "0123456789@#._-:/!? \t\n";
  std::uniform_int_distribution<int> len_dist(0, 60);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(pool.size()) + 3);
  const int len = len_dist(rng);
  std::string out;
  for (int i = 0; i < len; ++i) {
    const int k = pick(rng);
    if (k < static_cast<int>(pool.size())) {
      out.push_back(pool[static_cast<std::size_t>(k)]);
    } else {
      out.push_back(static_cast<char>(0x80 + (k % 64)));  // stray UTF-8 bytes
    }
  }
  return out;
}

}  // namespace

TEST_CASE("clean strips urls and keeps the words") {
  CHECK(clean("He voted against migration by voting brexit the wanker "
              "https://t.co/5t419W0iq9") ==
        "he voted against migration by voting brexit the wanker");
}

TEST_CASE("clean of the empty string is empty") {
  CHECK(clean("") == "");
}

TEST_CASE("clean removes mentions, emails, numbers and hashtag symbols") {
  // Rule-by-rule: email goes first ("a@b.com" gone), digits next ("123"),
  // then '@' and '#' are stripped while their words stay, lowercased.
  CHECK(clean("@USER   Email me at a@b.com 123 #tag") == "user email me at tag");
}

TEST_CASE("clean removes scheme and shortener urls alike") {
  CHECK(clean("see www.example.com/x now") == "see now");
  CHECK(clean("go t.co/abC123 there") == "go there");
  CHECK(clean("Bloody hell is that all they can do ? https://t.co/JQOiOw8nPs") ==
        "bloody hell is that all they can do");
}

TEST_CASE("clean removes ipv4 addresses entirely") {
  CHECK(clean("ping 192.168.0.1 now") == "ping now");
}

TEST_CASE("clean removes embedded digits") {
  CHECK(clean("N0LQRA43") == "nlqra");
  CHECK(clean("Booking was successful. Reference number is : N0LQRA43.") ==
        "booking was successful reference number is nlqra");
}

TEST_CASE("clean drops emoji and other non-ascii") {
  CHECK(clean("nice \xF0\x9F\x98\x80 day") == "nice day");
}

TEST_CASE("clean removes apostrophes with other punctuation") {
  CHECK(clean("I'm SURE") == "im sure");
}

TEST_CASE("clean is idempotent over fuzzed strings") {
  std::mt19937_64 rng(20240811);
  for (int i = 0; i < 10000; ++i) {
    const std::string raw = random_raw_string(rng);
    const std::string once = clean(raw);
    CAPTURE(raw);
    REQUIRE(clean(once) == once);
  }
}

TEST_CASE("tokens never reintroduce stripped characters") {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 2000; ++i) {
    const std::string raw = random_raw_string(rng);
    for (const auto& token : tokenize(clean(raw))) {
      REQUIRE(!token.empty());
      for (char c : token) {
        REQUIRE(c >= 'a');
        REQUIRE(c <= 'z');
      }
    }
  }
}

TEST_CASE("tokenize splits on single spaces") {
  CHECK(tokenize("shoot now asshole") ==
        std::vector<std::string>{"shoot", "now", "asshole"});
  CHECK(tokenize("") == std::vector<std::string>{});
  CHECK(tokenize("a b") == std::vector<std::string>{"a", "b"});
}

TEST_CASE("tokens keep left-to-right order of surviving words") {
  const auto tokens = tokenize(clean("Alpha, beta; GAMMA delta!"));
  CHECK(tokens == std::vector<std::string>{"alpha", "beta", "gamma", "delta"});
}
