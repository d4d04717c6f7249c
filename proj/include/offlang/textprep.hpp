#pragma once

#include <string>
#include <vector>

namespace offlang::textprep {

// Normalizes a raw tweet. Rules run in a fixed order:
//   1. URLs removed (scheme://, www., and t.co/ shortener forms)
//   2. email addresses removed
//   3. IPv4 addresses removed
//   4. digit characters removed (standalone numbers and embedded digits)
//   5. everything outside ASCII letters and whitespace removed, so
//      "@USER" keeps "USER" and "#tag" keeps "tag"
//   6. lowercased
//   7. whitespace runs collapsed to a single space, ends trimmed
//
// URL/email/IP removal has to run before rule 5 strips the punctuation
// that makes those patterns recognizable. The result contains only
// lowercase ASCII letters and single spaces, which makes clean() a
// fixed point of itself.
std::string clean(const std::string& raw);

// Splits cleaned text on single spaces. Never yields empty tokens.
std::vector<std::string> tokenize(const std::string& clean_text);

}  // namespace offlang::textprep
