#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "offlang/autodiff.hpp"
#include "offlang/corpus.hpp"

namespace offlang::embed {

inline constexpr int kPadIndex = 0;
inline constexpr int kUnkIndex = 1;
inline constexpr const char* kPadToken = "<pad>";
inline constexpr const char* kUnkToken = "<unk>";
inline constexpr int kEmbeddingDim = 100;
inline constexpr int kMaxSequenceLen = 64;

// Token to index map. Index 0 is PAD, index 1 is UNK, the rest are the
// training split's tokens ordered by frequency (descending) then token.
class Vocab {
 public:
  Vocab();
  explicit Vocab(const std::vector<std::string>& tokens_in_order);

  int index_of(const std::string& token) const;  // UNK index when absent
  bool contains(const std::string& token) const;
  const std::string& token_at(int index) const;
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  // Token ids capped at max_len; out-of-vocab tokens map to UNK.
  std::vector<int> encode(const std::vector<std::string>& tokens,
                          int max_len = kMaxSequenceLen) const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

// Tokens of the (already cleaned) training corpus with frequency >=
// min_freq, plus PAD and UNK.
Vocab build_vocab(const corpus::LabeledCorpus& cleaned_corpus,
                  int min_freq = 1);

struct EmbeddingTable {
  ad::Tensor matrix;  // |vocab| x dim
  int dim = kEmbeddingDim;
};

// Reads GloVe text format: one token followed by `dim` space-separated
// decimals per line. Vocab tokens found in the file get the file vector;
// PAD stays all-zero; UNK and missing tokens draw from uniform(-0.25,
// 0.25) seeded by `seed`, filled in vocab index order so the result is
// bit-reproducible.
EmbeddingTable load_embeddings(const std::string& path, const Vocab& vocab,
                               std::uint64_t seed);

// Table with every non-PAD row drawn from uniform(-0.25, 0.25); used when
// no pretrained vector file is configured.
EmbeddingTable random_embeddings(const Vocab& vocab, std::uint64_t seed,
                                 int dim = kEmbeddingDim);

}  // namespace offlang::embed
