#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace offlang::ad {

// Dense row-major tensor of 64-bit reals. Parameters keep their gradient
// buffer alongside the values; graphs accumulate into it on backward().
struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;
  std::vector<double> grad;
  bool requires_grad = false;

  Tensor() = default;
  Tensor(std::vector<int> shape_, bool requires_grad_ = false);

  static Tensor zeros(std::vector<int> shape, bool requires_grad = false);
  static Tensor from(std::vector<int> shape, std::vector<double> values,
                     bool requires_grad = false);

  std::size_t size() const { return data.size(); }
  int rows() const { return shape.empty() ? 1 : shape[0]; }
  int cols() const { return shape.size() < 2 ? 1 : shape[1]; }
  void zero_grad();
};

std::size_t shape_size(const std::vector<int>& shape);
std::string shape_str(const std::vector<int>& shape);

// One recorded value in a define-by-run graph. Nodes are created by Graph
// ops in topological order and owned by the graph.
struct Node {
  std::vector<int> shape;
  std::vector<double> data;
  std::vector<double> grad;
  bool requires_grad = false;
  Tensor* param = nullptr;  // set on parameter leaves
  std::function<void(Node*)> backward_fn;

  std::size_t size() const { return data.size(); }
  int rows() const { return shape.empty() ? 1 : shape[0]; }
  int cols() const { return shape.size() < 2 ? 1 : shape[1]; }
  double scalar() const { return data.at(0); }
};

// A single forward recording. Rebuilt every pass; single-threaded during
// forward/backward. Dropout draws from the graph's own generator so a
// fixed seed reproduces masks bit-exactly.
class Graph {
 public:
  explicit Graph(std::uint64_t dropout_seed = 0) : rng_(dropout_seed) {}

  Node* param(Tensor& tensor);
  Node* input(std::vector<int> shape, std::vector<double> data,
              bool requires_grad = false);
  Node* constant(std::vector<int> shape, std::vector<double> data);

  // [M,K] x [K,N] -> [M,N]
  Node* matmul(Node* a, Node* b);
  // Same shape, or [M,N] + [N] broadcasting the row vector over rows.
  Node* add(Node* a, Node* b);
  // Elementwise product, same shape.
  Node* mul(Node* a, Node* b);
  Node* scale(Node* a, double factor);
  // axis 0 stacks rows, axis 1 joins columns (rank-2; rank-1 only axis 0).
  Node* concat(const std::vector<Node*>& parts, int axis);
  // Column range [start, start+len) of a rank-2 node.
  Node* slice_cols(Node* a, int start, int len);
  Node* sigmoid(Node* a);
  Node* tanh(Node* a);
  Node* relu(Node* a);
  // Inverted dropout: train mode keeps each entry with probability
  // keep_prob and scales by 1/keep_prob; eval mode is the identity.
  Node* dropout(Node* a, double keep_prob, bool train_mode);
  // Gathers rows of `table` for ids[b][t]; output is [B, L*dim] with one
  // row per batch entry. Gradients scatter-add into table.grad.
  Node* embedding_lookup(Tensor& table,
                         const std::vector<std::vector<int>>& ids);
  // Elementwise max across equally-shaped steps; the gradient routes to
  // the first step attaining the max.
  Node* max_over_time(const std::vector<Node*>& steps);
  Node* softmax(Node* logits);
  // Mean cross-entropy over rows of [B,C] logits against integer labels.
  Node* softmax_cross_entropy(Node* logits, const std::vector<int>& labels);
  // Scalar [1] view of one element.
  Node* pick(Node* a, std::size_t flat_index);

  // Reverse sweep from a scalar loss. Populates grads of every
  // requires_grad node and accumulates into parameter tensors.
  void backward(Node* loss);

  std::size_t node_count() const { return nodes_.size(); }

 private:
  Node* make(std::vector<int> shape, bool requires_grad);
  std::vector<std::unique_ptr<Node>> nodes_;
  std::mt19937_64 rng_;
};

// Scalar function built over a single input node; returns the loss node.
using GraphScalarFn = std::function<Node*(Graph&, Node*)>;

// Compares the engine's gradient of f at `point` against central finite
// differences with step eps. Returns the max over coordinates of
// |analytic - numeric| / max(1, |analytic|). Every graph evaluation uses
// `graph_seed`, so stochastic ops see identical masks.
double grad_check(const GraphScalarFn& f, const Tensor& point, double eps,
                  std::uint64_t graph_seed = 0);

}  // namespace offlang::ad
