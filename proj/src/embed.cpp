#include "offlang/embed.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "offlang/error.hpp"
#include "offlang/textprep.hpp"

namespace offlang::embed {

Vocab::Vocab() : Vocab(std::vector<std::string>{}) {}

Vocab::Vocab(const std::vector<std::string>& tokens_in_order) {
  tokens_.reserve(tokens_in_order.size() + 2);
  tokens_.push_back(kPadToken);
  tokens_.push_back(kUnkToken);
  for (const auto& token : tokens_in_order) tokens_.push_back(token);
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], static_cast<int>(i)).second) {
      throw ArgumentError("duplicate vocab token '" + tokens_[i] + "'");
    }
  }
}

int Vocab::index_of(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnkIndex : it->second;
}

bool Vocab::contains(const std::string& token) const {
  return index_.count(token) != 0;
}

const std::string& Vocab::token_at(int index) const {
  if (index < 0 || index >= static_cast<int>(tokens_.size())) {
    throw ArgumentError("vocab index " + std::to_string(index) +
                        " out of range");
  }
  return tokens_[static_cast<std::size_t>(index)];
}

std::vector<int> Vocab::encode(const std::vector<std::string>& tokens,
                               int max_len) const {
  std::vector<int> ids;
  ids.reserve(std::min<std::size_t>(tokens.size(), max_len));
  for (const auto& token : tokens) {
    if (static_cast<int>(ids.size()) >= max_len) break;
    ids.push_back(index_of(token));
  }
  return ids;
}

Vocab build_vocab(const corpus::LabeledCorpus& cleaned_corpus, int min_freq) {
  if (min_freq < 1) throw ArgumentError("min_freq must be >= 1");
  std::unordered_map<std::string, long long> freq;
  for (const auto& sample : cleaned_corpus.samples) {
    for (const auto& token : textprep::tokenize(sample.raw_text)) {
      ++freq[token];
    }
  }
  std::vector<std::pair<std::string, long long>> kept;
  kept.reserve(freq.size());
  for (auto& [token, count] : freq) {
    if (count >= min_freq) kept.emplace_back(token, count);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> ordered;
  ordered.reserve(kept.size());
  for (auto& [token, count] : kept) ordered.push_back(token);
  return Vocab(ordered);
}

namespace {

EmbeddingTable make_table(const Vocab& vocab, int dim) {
  EmbeddingTable table;
  table.dim = dim;
  table.matrix =
      ad::Tensor::zeros({static_cast<int>(vocab.size()), dim}, true);
  return table;
}

}  // namespace

EmbeddingTable load_embeddings(const std::string& path, const Vocab& vocab,
                               std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open embedding file: " + path);

  std::unordered_map<std::string, std::vector<double>> file_vectors;
  std::string line;
  std::size_t line_no = 0;
  int file_dim = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string token;
    fields >> token;
    std::vector<double> values;
    double v;
    while (fields >> v) values.push_back(v);
    if (file_dim < 0) {
      file_dim = static_cast<int>(values.size());
      if (file_dim != kEmbeddingDim) {
        throw ConfigError("embedding file " + path + " has dimension " +
                          std::to_string(file_dim) + ", expected " +
                          std::to_string(kEmbeddingDim));
      }
    }
    if (static_cast<int>(values.size()) != file_dim || !fields.eof()) {
      throw ParseError("malformed embedding line " + std::to_string(line_no) +
                       " in " + path + ": expected " +
                       std::to_string(file_dim) + " values");
    }
    if (vocab.contains(token)) file_vectors[token] = std::move(values);
  }

  EmbeddingTable table = make_table(vocab, kEmbeddingDim);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(-0.25, 0.25);
  for (int i = 0; i < static_cast<int>(vocab.size()); ++i) {
    double* row = table.matrix.data.data() +
                  static_cast<std::size_t>(i) * kEmbeddingDim;
    if (i == kPadIndex) continue;  // PAD stays zero
    auto it = file_vectors.find(vocab.token_at(i));
    if (it != file_vectors.end()) {
      std::copy(it->second.begin(), it->second.end(), row);
    } else {
      for (int d = 0; d < kEmbeddingDim; ++d) row[d] = uniform(rng);
    }
  }
  return table;
}

EmbeddingTable random_embeddings(const Vocab& vocab, std::uint64_t seed,
                                 int dim) {
  EmbeddingTable table = make_table(vocab, dim);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(-0.25, 0.25);
  for (int i = 1; i < static_cast<int>(vocab.size()); ++i) {
    double* row = table.matrix.data.data() + static_cast<std::size_t>(i) * dim;
    for (int d = 0; d < dim; ++d) row[d] = uniform(rng);
  }
  return table;
}

}  // namespace offlang::embed
