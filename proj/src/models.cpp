#include "offlang/models.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "offlang/error.hpp"

namespace offlang::models {

namespace {

void fill_uniform(ad::Tensor& t, double lo, double hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(lo, hi);
  for (double& v : t.data) v = dist(rng);
}

void init_weight(ad::Tensor& t, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(t.shape[0]));
  fill_uniform(t, -bound, bound, rng);
}

ad::Tensor copy_embedding(const embed::EmbeddingTable& table) {
  ad::Tensor emb = table.matrix;
  emb.requires_grad = true;
  emb.grad.assign(emb.data.size(), 0.0);
  return emb;
}

// Blends fresh recurrent state into the carried one: rows whose sequence
// already ended keep their previous state.
ad::Node* masked_update(ad::Graph& graph, ad::Node* fresh, ad::Node* carried,
                        const std::vector<int>& lengths, int t, int width) {
  const int batch = static_cast<int>(lengths.size());
  bool all_active = true;
  for (int len : lengths) {
    if (t >= len) {
      all_active = false;
      break;
    }
  }
  if (all_active) return fresh;
  std::vector<double> keep_new(static_cast<std::size_t>(batch) * width);
  std::vector<double> keep_old(keep_new.size());
  for (int b = 0; b < batch; ++b) {
    const double active = t < lengths[b] ? 1.0 : 0.0;
    for (int j = 0; j < width; ++j) {
      keep_new[static_cast<std::size_t>(b) * width + j] = active;
      keep_old[static_cast<std::size_t>(b) * width + j] = 1.0 - active;
    }
  }
  ad::Node* mask_new = graph.constant({batch, width}, std::move(keep_new));
  ad::Node* mask_old = graph.constant({batch, width}, std::move(keep_old));
  return graph.add(graph.mul(mask_new, fresh), graph.mul(mask_old, carried));
}

struct LstmDirection {
  ad::Tensor* w_x;
  ad::Tensor* w_h;
  ad::Tensor* b;
};

// Runs one direction over the step inputs and returns per-step hidden
// states plus the carried final state.
struct LstmTrace {
  std::vector<ad::Node*> hidden;  // indexed by position
  ad::Node* final_state;
};

LstmTrace run_lstm_direction(ad::Graph& graph,
                             const std::vector<ad::Node*>& inputs,
                             const LstmDirection& dir,
                             const std::vector<int>& lengths, int hidden,
                             bool backward_pass) {
  const int batch = static_cast<int>(lengths.size());
  const int steps = static_cast<int>(inputs.size());
  ad::Node* w_x = graph.param(*dir.w_x);
  ad::Node* w_h = graph.param(*dir.w_h);
  ad::Node* b = graph.param(*dir.b);

  ad::Node* h = graph.constant(
      {batch, hidden}, std::vector<double>(static_cast<std::size_t>(batch) * hidden, 0.0));
  ad::Node* c = graph.constant(
      {batch, hidden}, std::vector<double>(static_cast<std::size_t>(batch) * hidden, 0.0));

  LstmTrace trace;
  trace.hidden.assign(steps, nullptr);
  for (int step = 0; step < steps; ++step) {
    const int t = backward_pass ? steps - 1 - step : step;
    ad::Node* gates = graph.add(
        graph.add(graph.matmul(inputs[t], w_x), graph.matmul(h, w_h)), b);
    ad::Node* gate_i = graph.sigmoid(graph.slice_cols(gates, 0, hidden));
    ad::Node* gate_f = graph.sigmoid(graph.slice_cols(gates, hidden, hidden));
    ad::Node* gate_g = graph.tanh(graph.slice_cols(gates, 2 * hidden, hidden));
    ad::Node* gate_o = graph.sigmoid(graph.slice_cols(gates, 3 * hidden, hidden));
    ad::Node* c_new =
        graph.add(graph.mul(gate_f, c), graph.mul(gate_i, gate_g));
    ad::Node* h_new = graph.mul(gate_o, graph.tanh(c_new));
    c = masked_update(graph, c_new, c, lengths, t, hidden);
    h = masked_update(graph, h_new, h, lengths, t, hidden);
    trace.hidden[t] = h;
  }
  trace.final_state = h;
  return trace;
}

ad::Node* bilstm_logits(ModelState& state, ad::Graph& graph,
                        ad::Node* embeddings,
                        const std::vector<int>& lengths) {
  const BiLstmConfig& cfg = state.bilstm;
  const int dim = cfg.embed_dim;
  const int length = embeddings->shape[1] / dim;
  const bool train = state.mode == Mode::kTrain;

  ad::Node* emb = graph.dropout(embeddings, cfg.dropout_keep, train);
  std::vector<ad::Node*> inputs(length);
  for (int t = 0; t < length; ++t) {
    inputs[t] = graph.slice_cols(emb, t * dim, dim);
  }

  ad::Node* fwd_final = nullptr;
  ad::Node* bwd_first = nullptr;
  for (int layer = 1; layer <= cfg.layers; ++layer) {
    const std::string prefix = "l" + std::to_string(layer) + ".";
    LstmDirection fwd{&state.find(prefix + "fwd.w_x"),
                      &state.find(prefix + "fwd.w_h"),
                      &state.find(prefix + "fwd.b")};
    LstmDirection bwd{&state.find(prefix + "bwd.w_x"),
                      &state.find(prefix + "bwd.w_h"),
                      &state.find(prefix + "bwd.b")};
    LstmTrace fwd_trace =
        run_lstm_direction(graph, inputs, fwd, lengths, cfg.hidden, false);
    LstmTrace bwd_trace =
        run_lstm_direction(graph, inputs, bwd, lengths, cfg.hidden, true);
    for (int t = 0; t < length; ++t) {
      inputs[t] = graph.concat({fwd_trace.hidden[t], bwd_trace.hidden[t]}, 1);
    }
    fwd_final = fwd_trace.final_state;
    bwd_first = bwd_trace.hidden.empty() ? bwd_trace.final_state
                                         : bwd_trace.hidden[0];
  }

  ad::Node* rep = graph.concat({fwd_final, bwd_first}, 1);
  rep = graph.dropout(rep, cfg.dropout_keep, train);
  return graph.add(graph.matmul(rep, graph.param(state.find("classifier.w"))),
                   graph.param(state.find("classifier.b")));
}

ad::Node* cnn_logits(ModelState& state, ad::Graph& graph, ad::Node* embeddings,
                     const std::vector<int>& lengths) {
  const CnnConfig& cfg = state.cnn;
  const int dim = cfg.embed_dim;
  const int length = embeddings->shape[1] / dim;
  const int batch = embeddings->shape[0];
  const int filters = cfg.filters_per_width;
  const bool train = state.mode == Mode::kTrain;

  ad::Node* emb = graph.dropout(embeddings, cfg.dropout_keep, train);

  std::vector<ad::Node*> branches;
  for (int width : cfg.filter_widths) {
    if (length < width) {
      throw ShapeError("cnn: sequence of length " + std::to_string(length) +
                       " shorter than filter width " + std::to_string(width));
    }
    ad::Node* w = graph.param(state.find("conv" + std::to_string(width) + ".w"));
    ad::Node* b = graph.param(state.find("conv" + std::to_string(width) + ".b"));
    std::vector<ad::Node*> windows;
    for (int p = 0; p + width <= length; ++p) {
      ad::Node* pre =
          graph.add(graph.matmul(graph.slice_cols(emb, p * dim, width * dim), w), b);
      // Windows running past a row's tokens are pushed below zero so the
      // relu/max pair ignores them; every row keeps at least one window.
      bool all_valid = true;
      for (int len : lengths) {
        if (p + width > std::max(len, width)) {
          all_valid = false;
          break;
        }
      }
      if (!all_valid) {
        std::vector<double> penalty(static_cast<std::size_t>(batch) * filters,
                                    0.0);
        for (int row = 0; row < batch; ++row) {
          if (p + width > std::max(lengths[row], width)) {
            for (int f = 0; f < filters; ++f) {
              penalty[static_cast<std::size_t>(row) * filters + f] = -1e30;
            }
          }
        }
        pre = graph.add(pre, graph.constant({batch, filters}, std::move(penalty)));
      }
      windows.push_back(graph.relu(pre));
    }
    branches.push_back(graph.max_over_time(windows));
  }

  ad::Node* rep = graph.concat(branches, 1);
  rep = graph.dropout(rep, cfg.dropout_keep, train);
  return graph.add(graph.matmul(rep, graph.param(state.find("classifier.w"))),
                   graph.param(state.find("classifier.b")));
}

}  // namespace

ad::Tensor& ModelState::find(const std::string& name) {
  for (auto& p : params) {
    if (p.name == name) return p.tensor;
  }
  throw ArgumentError("model has no parameter named '" + name + "'");
}

int ModelState::num_classes() const {
  return kind == ModelKind::kBiLstm ? bilstm.num_classes : cnn.num_classes;
}

int ModelState::embed_dim() const {
  return kind == ModelKind::kBiLstm ? bilstm.embed_dim : cnn.embed_dim;
}

double ModelState::dropout_keep() const {
  return kind == ModelKind::kBiLstm ? bilstm.dropout_keep : cnn.dropout_keep;
}

void ModelState::zero_grads() {
  for (auto& p : params) p.tensor.zero_grad();
}

Batch make_batch(const std::vector<std::vector<int>>& sequences,
                 const std::vector<int>& labels, int min_len) {
  if (sequences.empty()) throw ArgumentError("make_batch: no sequences");
  if (!labels.empty() && labels.size() != sequences.size()) {
    throw ArgumentError("make_batch: label count mismatch");
  }
  Batch batch;
  batch.labels = labels;
  int max_len = min_len;
  batch.lengths.reserve(sequences.size());
  for (const auto& seq : sequences) {
    int len = static_cast<int>(seq.size());
    while (len > 0 && seq[static_cast<std::size_t>(len) - 1] == embed::kPadIndex) {
      --len;
    }
    batch.lengths.push_back(len);
    max_len = std::max(max_len, static_cast<int>(seq.size()));
  }
  batch.ids.reserve(sequences.size());
  for (const auto& seq : sequences) {
    std::vector<int> row = seq;
    row.resize(static_cast<std::size_t>(max_len), embed::kPadIndex);
    batch.ids.push_back(std::move(row));
  }
  return batch;
}

ModelState init_bilstm(const BiLstmConfig& config,
                       const embed::EmbeddingTable& table,
                       std::uint64_t seed) {
  if (table.dim != config.embed_dim) {
    throw ConfigError("embedding table dim " + std::to_string(table.dim) +
                      " does not match model embed_dim " +
                      std::to_string(config.embed_dim));
  }
  if (config.num_classes < 2) throw ConfigError("need at least 2 classes");
  if (!(config.dropout_keep > 0.0 && config.dropout_keep <= 1.0)) {
    throw ConfigError("dropout_keep must lie in (0,1]");
  }

  ModelState state;
  state.kind = ModelKind::kBiLstm;
  state.bilstm = config;
  state.params.push_back({"embedding", copy_embedding(table)});

  std::mt19937_64 rng(seed);
  const int h = config.hidden;
  for (int layer = 1; layer <= config.layers; ++layer) {
    const int in = layer == 1 ? config.embed_dim : 2 * h;
    for (const char* dir : {"fwd", "bwd"}) {
      const std::string prefix =
          "l" + std::to_string(layer) + "." + dir + ".";
      ad::Tensor w_x = ad::Tensor::zeros({in, 4 * h}, true);
      ad::Tensor w_h = ad::Tensor::zeros({h, 4 * h}, true);
      ad::Tensor b = ad::Tensor::zeros({4 * h}, true);
      init_weight(w_x, rng);
      init_weight(w_h, rng);
      for (int j = h; j < 2 * h; ++j) b.data[j] = 1.0;  // forget gate
      state.params.push_back({prefix + "w_x", std::move(w_x)});
      state.params.push_back({prefix + "w_h", std::move(w_h)});
      state.params.push_back({prefix + "b", std::move(b)});
    }
  }
  ad::Tensor w_cls = ad::Tensor::zeros({2 * h, config.num_classes}, true);
  init_weight(w_cls, rng);
  state.params.push_back({"classifier.w", std::move(w_cls)});
  state.params.push_back(
      {"classifier.b", ad::Tensor::zeros({config.num_classes}, true)});
  return state;
}

ModelState init_cnn(const CnnConfig& config, const embed::EmbeddingTable& table,
                    std::uint64_t seed) {
  if (table.dim != config.embed_dim) {
    throw ConfigError("embedding table dim " + std::to_string(table.dim) +
                      " does not match model embed_dim " +
                      std::to_string(config.embed_dim));
  }
  if (config.num_classes < 2) throw ConfigError("need at least 2 classes");
  if (config.filter_widths.empty()) throw ConfigError("no filter widths");
  if (!(config.dropout_keep > 0.0 && config.dropout_keep <= 1.0)) {
    throw ConfigError("dropout_keep must lie in (0,1]");
  }

  ModelState state;
  state.kind = ModelKind::kCnn;
  state.cnn = config;
  state.params.push_back({"embedding", copy_embedding(table)});

  std::mt19937_64 rng(seed);
  for (int width : config.filter_widths) {
    ad::Tensor w = ad::Tensor::zeros(
        {width * config.embed_dim, config.filters_per_width}, true);
    init_weight(w, rng);
    state.params.push_back({"conv" + std::to_string(width) + ".w", std::move(w)});
    state.params.push_back(
        {"conv" + std::to_string(width) + ".b",
         ad::Tensor::zeros({config.filters_per_width}, true)});
  }
  const int rep_width = config.filters_per_width *
                        static_cast<int>(config.filter_widths.size());
  ad::Tensor w_cls = ad::Tensor::zeros({rep_width, config.num_classes}, true);
  init_weight(w_cls, rng);
  state.params.push_back({"classifier.w", std::move(w_cls)});
  state.params.push_back(
      {"classifier.b", ad::Tensor::zeros({config.num_classes}, true)});
  return state;
}

ad::Node* embed_ids(ModelState& state, ad::Graph& graph, const Batch& batch) {
  return graph.embedding_lookup(state.embedding(), batch.ids);
}

ad::Node* logits_from_embeddings(ModelState& state, ad::Graph& graph,
                                 ad::Node* embeddings,
                                 const std::vector<int>& lengths) {
  if (embeddings->shape.size() != 2 ||
      embeddings->shape[1] % state.embed_dim() != 0) {
    throw ShapeError("embeddings node shape " +
                     ad::shape_str(embeddings->shape) +
                     " is not [batch, length*dim]");
  }
  if (static_cast<int>(lengths.size()) != embeddings->shape[0]) {
    throw ShapeError("length count does not match batch size");
  }
  return state.kind == ModelKind::kBiLstm
             ? bilstm_logits(state, graph, embeddings, lengths)
             : cnn_logits(state, graph, embeddings, lengths);
}

ad::Node* logits(ModelState& state, ad::Graph& graph, const Batch& batch) {
  return logits_from_embeddings(state, graph, embed_ids(state, graph, batch),
                                batch.lengths);
}

std::vector<double> predict(ModelState& state, const std::vector<int>& ids) {
  for (int id : ids) {
    if (id < 0 || id >= static_cast<int>(state.embedding().shape[0])) {
      throw EncodingError("token id " + std::to_string(id) +
                          " outside vocabulary of size " +
                          std::to_string(state.embedding().shape[0]));
    }
  }
  const int min_len =
      state.kind == ModelKind::kCnn
          ? *std::max_element(state.cnn.filter_widths.begin(),
                              state.cnn.filter_widths.end())
          : 1;
  Batch batch = make_batch({ids}, {}, min_len);
  const Mode saved = state.mode;
  state.mode = Mode::kEval;
  ad::Graph graph;
  ad::Node* probs = graph.softmax(logits(state, graph, batch));
  state.mode = saved;
  return probs->data;
}

long long param_count(const ModelState& state) {
  long long count = 0;
  for (const auto& p : state.params) {
    if (!p.tensor.requires_grad) continue;
    count += static_cast<long long>(p.tensor.size());
  }
  count -= state.embed_dim();  // PAD embedding row is frozen
  return count;
}

long long total_param_count(const ModelState& state) {
  long long count = 0;
  for (const auto& p : state.params) {
    count += static_cast<long long>(p.tensor.size());
  }
  return count;
}

}  // namespace offlang::models
