#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "offlang/corpus.hpp"

namespace offlang::augment {

// Curated offensive-word list guarding boundary-token deletion. The
// removed set records which entries of the base list were dropped.
struct OffensiveLexicon {
  std::unordered_set<std::string> words;
  std::unordered_set<std::string> removed_words;

  bool contains(const std::string& word) const {
    return words.count(word) != 0;
  }
};

// Reads one lowercase term per line (input is lowercased, deduplicated),
// then subtracts the terms listed in the optional removals file.
OffensiveLexicon load_wordlist(const std::string& path,
                               const std::optional<std::string>& removals_path =
                                   std::nullopt);

enum class Provenance { kOriginal, kDeleted, kGenerated };
std::string provenance_name(Provenance p);

struct AugmentedCorpus {
  corpus::TaskSchema schema;
  std::vector<corpus::Sample> samples;  // raw_text holds clean text
  std::vector<Provenance> provenance;
};

// Boundary-token deletion over a cleaned sample: when neither the first
// nor the last token is in the lexicon, both are removed; a sample whose
// boundary hits the lexicon comes back unchanged. The label is kept.
corpus::Sample delete_boundary_tokens(const corpus::Sample& cleaned,
                                      const OffensiveLexicon& lexicon);

// Applies delete_boundary_tokens corpus-wide. Results that still equal
// their source or that lost every token are kept here and filtered by
// merge_augmented.
std::vector<corpus::Sample> deleted_variants(
    const corpus::LabeledCorpus& cleaned, const OffensiveLexicon& lexicon);

// Continuation texts for technique-2 samples, keyed by sample id. The
// file is tab-separated: id<TAB>generated text.
std::unordered_map<std::string, std::string> load_continuations(
    const std::string& path);

// clean(original) + " " + clean(continuation) for every sample with a
// continuation entry; the label is copied from the source sample.
std::vector<corpus::Sample> generated_variants(
    const corpus::LabeledCorpus& cleaned,
    const std::unordered_map<std::string, std::string>& continuations);

// Union of the original corpus and augmented samples with exact clean-
// text deduplication. Originals win collisions; empty augmented texts
// are dropped. Both sides must be cleaned with the same settings.
AugmentedCorpus merge_augmented(const corpus::LabeledCorpus& original,
                                const std::vector<corpus::Sample>& deleted,
                                const std::vector<corpus::Sample>& generated = {});

corpus::LabeledCorpus to_corpus(const AugmentedCorpus& augmented);

}  // namespace offlang::augment
