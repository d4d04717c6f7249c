#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "offlang/autodiff.hpp"
#include "offlang/embed.hpp"

namespace offlang::models {

enum class ModelKind { kBiLstm, kCnn };
enum class Mode { kTrain, kEval };

struct BiLstmConfig {
  int embed_dim = embed::kEmbeddingDim;
  int hidden = 20;
  int layers = 2;  // stacked bidirectional layers
  double dropout_keep = 0.5;
  int num_classes = 2;
};

struct CnnConfig {
  int embed_dim = embed::kEmbeddingDim;
  std::vector<int> filter_widths = {2, 3, 4};
  int filters_per_width = 100;
  double dropout_keep = 0.5;
  int num_classes = 2;
};

struct NamedParam {
  std::string name;
  ad::Tensor tensor;
};

// Architecture descriptor plus all trainable parameters. params[0] is the
// embedding matrix; its PAD row stays zero and is skipped by optimizers.
struct ModelState {
  ModelKind kind = ModelKind::kBiLstm;
  BiLstmConfig bilstm;
  CnnConfig cnn;
  std::vector<NamedParam> params;
  Mode mode = Mode::kTrain;

  embed::Vocab vocab;
  std::vector<std::string> label_set;

  ad::Tensor& embedding() { return params.at(0).tensor; }
  const ad::Tensor& embedding() const { return params.at(0).tensor; }
  ad::Tensor& find(const std::string& name);
  int num_classes() const;
  int embed_dim() const;
  double dropout_keep() const;
  void zero_grads();
};

// PAD-padded id batch. length = index of the last non-PAD token + 1.
struct Batch {
  std::vector<std::vector<int>> ids;  // B x L
  std::vector<int> lengths;
  std::vector<int> labels;  // empty when scoring unlabeled inputs
};

// Pads sequences right with PAD to the longest one (at least min_len).
Batch make_batch(const std::vector<std::vector<int>>& sequences,
                 const std::vector<int>& labels = {}, int min_len = 1);

// Gate weights per direction and layer use a single bias per gate, so a
// direction of layer l holds W_x [in_l, 4H], W_h [H, 4H], b [4H] with
// in_1 = embed_dim and in_2 = 2*hidden. Weights draw from
// uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)); biases start at zero except
// the forget gate's, which starts at 1.
ModelState init_bilstm(const BiLstmConfig& config,
                       const embed::EmbeddingTable& table,
                       std::uint64_t seed);

// Three parallel convolution branches (widths 2/3/4 across the full
// embedding width), each ReLU + max-over-time, concatenated to one
// 300-dim vector ahead of the linear classifier.
ModelState init_cnn(const CnnConfig& config,
                    const embed::EmbeddingTable& table, std::uint64_t seed);

// Embedding rows for the batch as one [B, L*dim] node.
ad::Node* embed_ids(ModelState& state, ad::Graph& graph, const Batch& batch);

// Class scores from precomputed embedding rows. Positions at or beyond a
// row's length never influence its output: the recurrence carries state
// through them and convolution windows crossing them are masked out.
ad::Node* logits_from_embeddings(ModelState& state, ad::Graph& graph,
                                 ad::Node* embeddings,
                                 const std::vector<int>& lengths);

ad::Node* logits(ModelState& state, ad::Graph& graph, const Batch& batch);

// Eval-mode class probabilities for one encoded sequence.
std::vector<double> predict(ModelState& state, const std::vector<int>& ids);

// Trainable scalar count; the PAD embedding row is not trainable.
long long param_count(const ModelState& state);
// All stored scalars including the PAD row.
long long total_param_count(const ModelState& state);

}  // namespace offlang::models
