#include "offlang/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "offlang/error.hpp"

namespace offlang::ad {

std::size_t shape_size(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d <= 0) throw ShapeError("non-positive dimension in " + shape_str(shape));
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

std::string shape_str(const std::vector<int>& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << 'x';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

Tensor::Tensor(std::vector<int> shape_, bool requires_grad_)
    : shape(std::move(shape_)), requires_grad(requires_grad_) {
  data.assign(shape_size(shape), 0.0);
  if (requires_grad) grad.assign(data.size(), 0.0);
}

Tensor Tensor::zeros(std::vector<int> shape, bool requires_grad) {
  return Tensor(std::move(shape), requires_grad);
}

Tensor Tensor::from(std::vector<int> shape, std::vector<double> values,
                    bool requires_grad) {
  Tensor t(std::move(shape), requires_grad);
  if (values.size() != t.size()) {
    throw ShapeError("value count " + std::to_string(values.size()) +
                     " does not fill shape " + shape_str(t.shape));
  }
  t.data = std::move(values);
  return t;
}

void Tensor::zero_grad() {
  if (requires_grad) std::fill(grad.begin(), grad.end(), 0.0);
}

namespace {

void require_rank2(const Node* a, const char* op) {
  if (a->shape.size() != 2) {
    throw ShapeError(std::string(op) + ": expected rank-2 operand, got " +
                     shape_str(a->shape));
  }
}

}  // namespace

Node* Graph::make(std::vector<int> shape, bool requires_grad) {
  auto node = std::make_unique<Node>();
  node->shape = std::move(shape);
  node->data.assign(shape_size(node->shape), 0.0);
  node->requires_grad = requires_grad;
  if (requires_grad) node->grad.assign(node->data.size(), 0.0);
  nodes_.push_back(std::move(node));
  return nodes_.back().get();
}

Node* Graph::param(Tensor& tensor) {
  Node* n = make(tensor.shape, tensor.requires_grad);
  n->data = tensor.data;
  if (tensor.requires_grad) {
    n->param = &tensor;
    n->backward_fn = [](Node* self) {
      for (std::size_t i = 0; i < self->grad.size(); ++i) {
        self->param->grad[i] += self->grad[i];
      }
    };
  }
  return n;
}

Node* Graph::input(std::vector<int> shape, std::vector<double> data,
                   bool requires_grad) {
  Node* n = make(std::move(shape), requires_grad);
  if (data.size() != n->size()) {
    throw ShapeError("input data size " + std::to_string(data.size()) +
                     " does not fill shape " + shape_str(n->shape));
  }
  n->data = std::move(data);
  return n;
}

Node* Graph::constant(std::vector<int> shape, std::vector<double> data) {
  return input(std::move(shape), std::move(data), false);
}

Node* Graph::matmul(Node* a, Node* b) {
  require_rank2(a, "matmul");
  require_rank2(b, "matmul");
  if (a->shape[1] != b->shape[0]) {
    throw ShapeError("matmul: inner dimensions disagree, " +
                     shape_str(a->shape) + " vs " + shape_str(b->shape));
  }
  const int m = a->shape[0], k = a->shape[1], n = b->shape[1];
  Node* out = make({m, n}, a->requires_grad || b->requires_grad);
  const double* ad = a->data.data();
  const double* bd = b->data.data();
  double* od = out->data.data();
  for (int i = 0; i < m; ++i) {
    for (int p = 0; p < k; ++p) {
      const double av = ad[i * k + p];
      if (av == 0.0) continue;
      const double* br = bd + p * n;
      double* orow = od + i * n;
      for (int j = 0; j < n; ++j) orow[j] += av * br[j];
    }
  }
  if (out->requires_grad) {
    out->backward_fn = [a, b, m, k, n](Node* self) {
      const double* g = self->grad.data();
      if (a->requires_grad) {
        double* ga = a->grad.data();
        const double* bd2 = b->data.data();
        for (int i = 0; i < m; ++i) {
          for (int j = 0; j < n; ++j) {
            const double gv = g[i * n + j];
            if (gv == 0.0) continue;
            for (int p = 0; p < k; ++p) ga[i * k + p] += gv * bd2[p * n + j];
          }
        }
      }
      if (b->requires_grad) {
        double* gb = b->grad.data();
        const double* ad2 = a->data.data();
        for (int i = 0; i < m; ++i) {
          for (int p = 0; p < k; ++p) {
            const double av = ad2[i * k + p];
            if (av == 0.0) continue;
            const double* grow = g + i * n;
            double* gbrow = gb + p * n;
            for (int j = 0; j < n; ++j) gbrow[j] += av * grow[j];
          }
        }
      }
    };
  }
  return out;
}

Node* Graph::add(Node* a, Node* b) {
  const bool broadcast =
      a->shape.size() == 2 &&
      ((b->shape.size() == 1 && b->shape[0] == a->shape[1]) ||
       (b->shape.size() == 2 && b->shape[0] == 1 && b->shape[1] == a->shape[1]));
  if (!broadcast && a->shape != b->shape) {
    throw ShapeError("add: shapes disagree, " + shape_str(a->shape) + " vs " +
                     shape_str(b->shape));
  }
  Node* out = make(a->shape, a->requires_grad || b->requires_grad);
  if (broadcast) {
    const int m = a->shape[0], n = a->shape[1];
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) {
        out->data[i * n + j] = a->data[i * n + j] + b->data[j];
      }
    }
    if (out->requires_grad) {
      out->backward_fn = [a, b, m, n](Node* self) {
        if (a->requires_grad) {
          for (std::size_t i = 0; i < self->grad.size(); ++i) {
            a->grad[i] += self->grad[i];
          }
        }
        if (b->requires_grad) {
          for (int i = 0; i < m; ++i) {
            for (int j = 0; j < n; ++j) b->grad[j] += self->grad[i * n + j];
          }
        }
      };
    }
  } else {
    for (std::size_t i = 0; i < out->size(); ++i) {
      out->data[i] = a->data[i] + b->data[i];
    }
    if (out->requires_grad) {
      out->backward_fn = [a, b](Node* self) {
        if (a->requires_grad) {
          for (std::size_t i = 0; i < self->grad.size(); ++i) {
            a->grad[i] += self->grad[i];
          }
        }
        if (b->requires_grad) {
          for (std::size_t i = 0; i < self->grad.size(); ++i) {
            b->grad[i] += self->grad[i];
          }
        }
      };
    }
  }
  return out;
}

Node* Graph::mul(Node* a, Node* b) {
  if (a->shape != b->shape) {
    throw ShapeError("mul: shapes disagree, " + shape_str(a->shape) + " vs " +
                     shape_str(b->shape));
  }
  Node* out = make(a->shape, a->requires_grad || b->requires_grad);
  for (std::size_t i = 0; i < out->size(); ++i) {
    out->data[i] = a->data[i] * b->data[i];
  }
  if (out->requires_grad) {
    out->backward_fn = [a, b](Node* self) {
      for (std::size_t i = 0; i < self->grad.size(); ++i) {
        if (a->requires_grad) a->grad[i] += self->grad[i] * b->data[i];
        if (b->requires_grad) b->grad[i] += self->grad[i] * a->data[i];
      }
    };
  }
  return out;
}

Node* Graph::scale(Node* a, double factor) {
  Node* out = make(a->shape, a->requires_grad);
  for (std::size_t i = 0; i < out->size(); ++i) {
    out->data[i] = a->data[i] * factor;
  }
  if (out->requires_grad) {
    out->backward_fn = [a, factor](Node* self) {
      for (std::size_t i = 0; i < self->grad.size(); ++i) {
        a->grad[i] += self->grad[i] * factor;
      }
    };
  }
  return out;
}

Node* Graph::concat(const std::vector<Node*>& parts, int axis) {
  if (parts.empty()) throw ArgumentError("concat: no operands");
  const std::size_t rank = parts[0]->shape.size();
  if (rank == 0 || rank > 2 || axis < 0 || axis >= static_cast<int>(rank)) {
    throw ShapeError("concat: unsupported rank/axis");
  }
  bool needs_grad = false;
  for (Node* p : parts) {
    if (p->shape.size() != rank) throw ShapeError("concat: mixed ranks");
    needs_grad = needs_grad || p->requires_grad;
  }

  if (rank == 1) {
    int total = 0;
    for (Node* p : parts) total += p->shape[0];
    Node* out = make({total}, needs_grad);
    std::size_t off = 0;
    for (Node* p : parts) {
      std::copy(p->data.begin(), p->data.end(), out->data.begin() + off);
      off += p->size();
    }
    if (needs_grad) {
      auto parts_copy = parts;
      out->backward_fn = [parts_copy](Node* self) {
        std::size_t off2 = 0;
        for (Node* p : parts_copy) {
          if (p->requires_grad) {
            for (std::size_t i = 0; i < p->size(); ++i) {
              p->grad[i] += self->grad[off2 + i];
            }
          }
          off2 += p->size();
        }
      };
    }
    return out;
  }

  if (axis == 0) {
    const int n = parts[0]->shape[1];
    int total = 0;
    for (Node* p : parts) {
      if (p->shape[1] != n) throw ShapeError("concat axis 0: column counts disagree");
      total += p->shape[0];
    }
    Node* out = make({total, n}, needs_grad);
    std::size_t off = 0;
    for (Node* p : parts) {
      std::copy(p->data.begin(), p->data.end(), out->data.begin() + off);
      off += p->size();
    }
    if (needs_grad) {
      auto parts_copy = parts;
      out->backward_fn = [parts_copy](Node* self) {
        std::size_t off2 = 0;
        for (Node* p : parts_copy) {
          if (p->requires_grad) {
            for (std::size_t i = 0; i < p->size(); ++i) {
              p->grad[i] += self->grad[off2 + i];
            }
          }
          off2 += p->size();
        }
      };
    }
    return out;
  }

  const int m = parts[0]->shape[0];
  int total = 0;
  for (Node* p : parts) {
    if (p->shape[0] != m) throw ShapeError("concat axis 1: row counts disagree");
    total += p->shape[1];
  }
  Node* out = make({m, total}, needs_grad);
  int col = 0;
  for (Node* p : parts) {
    const int w = p->shape[1];
    for (int i = 0; i < m; ++i) {
      std::copy(p->data.begin() + static_cast<std::size_t>(i) * w,
                p->data.begin() + static_cast<std::size_t>(i + 1) * w,
                out->data.begin() + static_cast<std::size_t>(i) * total + col);
    }
    col += w;
  }
  if (needs_grad) {
    auto parts_copy = parts;
    out->backward_fn = [parts_copy, m, total](Node* self) {
      int col2 = 0;
      for (Node* p : parts_copy) {
        const int w = p->shape[1];
        if (p->requires_grad) {
          for (int i = 0; i < m; ++i) {
            for (int j = 0; j < w; ++j) {
              p->grad[static_cast<std::size_t>(i) * w + j] +=
                  self->grad[static_cast<std::size_t>(i) * total + col2 + j];
            }
          }
        }
        col2 += w;
      }
    };
  }
  return out;
}

Node* Graph::slice_cols(Node* a, int start, int len) {
  require_rank2(a, "slice_cols");
  const int m = a->shape[0], n = a->shape[1];
  if (start < 0 || len <= 0 || start + len > n) {
    throw ShapeError("slice_cols: range [" + std::to_string(start) + "," +
                     std::to_string(start + len) + ") outside " +
                     shape_str(a->shape));
  }
  Node* out = make({m, len}, a->requires_grad);
  for (int i = 0; i < m; ++i) {
    std::copy(a->data.begin() + static_cast<std::size_t>(i) * n + start,
              a->data.begin() + static_cast<std::size_t>(i) * n + start + len,
              out->data.begin() + static_cast<std::size_t>(i) * len);
  }
  if (out->requires_grad) {
    out->backward_fn = [a, start, len, m, n](Node* self) {
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < len; ++j) {
          a->grad[static_cast<std::size_t>(i) * n + start + j] +=
              self->grad[static_cast<std::size_t>(i) * len + j];
        }
      }
    };
  }
  return out;
}

Node* Graph::sigmoid(Node* a) {
  Node* out = make(a->shape, a->requires_grad);
  for (std::size_t i = 0; i < out->size(); ++i) {
    const double x = a->data[i];
    out->data[i] = x >= 0 ? 1.0 / (1.0 + std::exp(-x))
                          : std::exp(x) / (1.0 + std::exp(x));
  }
  if (out->requires_grad) {
    out->backward_fn = [a](Node* self) {
      for (std::size_t i = 0; i < self->grad.size(); ++i) {
        const double s = self->data[i];
        a->grad[i] += self->grad[i] * s * (1.0 - s);
      }
    };
  }
  return out;
}

Node* Graph::tanh(Node* a) {
  Node* out = make(a->shape, a->requires_grad);
  for (std::size_t i = 0; i < out->size(); ++i) {
    out->data[i] = std::tanh(a->data[i]);
  }
  if (out->requires_grad) {
    out->backward_fn = [a](Node* self) {
      for (std::size_t i = 0; i < self->grad.size(); ++i) {
        const double t = self->data[i];
        a->grad[i] += self->grad[i] * (1.0 - t * t);
      }
    };
  }
  return out;
}

Node* Graph::relu(Node* a) {
  Node* out = make(a->shape, a->requires_grad);
  for (std::size_t i = 0; i < out->size(); ++i) {
    out->data[i] = a->data[i] > 0.0 ? a->data[i] : 0.0;
  }
  if (out->requires_grad) {
    out->backward_fn = [a](Node* self) {
      for (std::size_t i = 0; i < self->grad.size(); ++i) {
        if (a->data[i] > 0.0) a->grad[i] += self->grad[i];
      }
    };
  }
  return out;
}

Node* Graph::dropout(Node* a, double keep_prob, bool train_mode) {
  if (!(keep_prob > 0.0 && keep_prob <= 1.0)) {
    throw ArgumentError("dropout: keep probability must lie in (0,1], got " +
                        std::to_string(keep_prob));
  }
  if (!train_mode || keep_prob == 1.0) return a;  // identity in eval mode

  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  auto mask = std::make_shared<std::vector<double>>(a->size());
  const double inv_keep = 1.0 / keep_prob;
  for (std::size_t i = 0; i < a->size(); ++i) {
    (*mask)[i] = uniform(rng_) < keep_prob ? inv_keep : 0.0;
  }
  Node* out = make(a->shape, a->requires_grad);
  for (std::size_t i = 0; i < out->size(); ++i) {
    out->data[i] = a->data[i] * (*mask)[i];
  }
  if (out->requires_grad) {
    out->backward_fn = [a, mask](Node* self) {
      for (std::size_t i = 0; i < self->grad.size(); ++i) {
        a->grad[i] += self->grad[i] * (*mask)[i];
      }
    };
  }
  return out;
}

Node* Graph::embedding_lookup(Tensor& table,
                              const std::vector<std::vector<int>>& ids) {
  if (table.shape.size() != 2) {
    throw ShapeError("embedding_lookup: table must be rank-2, got " +
                     shape_str(table.shape));
  }
  if (ids.empty()) throw ArgumentError("embedding_lookup: empty batch");
  const int vocab = table.shape[0], dim = table.shape[1];
  const int batch = static_cast<int>(ids.size());
  const int len = static_cast<int>(ids[0].size());
  for (const auto& row : ids) {
    if (static_cast<int>(row.size()) != len) {
      throw ShapeError("embedding_lookup: ragged id rows");
    }
    for (int id : row) {
      if (id < 0 || id >= vocab) {
        throw EncodingError("token id " + std::to_string(id) +
                            " outside vocabulary of size " +
                            std::to_string(vocab));
      }
    }
  }
  Node* out = make({batch, len * dim}, table.requires_grad);
  for (int b = 0; b < batch; ++b) {
    for (int t = 0; t < len; ++t) {
      const double* src = table.data.data() +
                          static_cast<std::size_t>(ids[b][t]) * dim;
      std::copy(src, src + dim,
                out->data.begin() +
                    (static_cast<std::size_t>(b) * len + t) * dim);
    }
  }
  if (out->requires_grad) {
    auto ids_copy = ids;
    Tensor* table_ptr = &table;
    out->backward_fn = [table_ptr, ids_copy, dim, len](Node* self) {
      const int batch2 = static_cast<int>(ids_copy.size());
      for (int b = 0; b < batch2; ++b) {
        for (int t = 0; t < len; ++t) {
          double* dst = table_ptr->grad.data() +
                        static_cast<std::size_t>(ids_copy[b][t]) * dim;
          const double* g = self->grad.data() +
                            (static_cast<std::size_t>(b) * len + t) * dim;
          for (int d = 0; d < dim; ++d) dst[d] += g[d];
        }
      }
    };
  }
  return out;
}

Node* Graph::max_over_time(const std::vector<Node*>& steps) {
  if (steps.empty()) throw ArgumentError("max_over_time: no steps");
  const auto& shape = steps[0]->shape;
  bool needs_grad = false;
  for (Node* s : steps) {
    if (s->shape != shape) {
      throw ShapeError("max_over_time: step shapes disagree, " +
                       shape_str(shape) + " vs " + shape_str(s->shape));
    }
    needs_grad = needs_grad || s->requires_grad;
  }
  Node* out = make(shape, needs_grad);
  auto argmax = std::make_shared<std::vector<int>>(out->size(), 0);
  for (std::size_t i = 0; i < out->size(); ++i) {
    double best = steps[0]->data[i];
    int best_k = 0;
    for (std::size_t k = 1; k < steps.size(); ++k) {
      if (steps[k]->data[i] > best) {
        best = steps[k]->data[i];
        best_k = static_cast<int>(k);
      }
    }
    out->data[i] = best;
    (*argmax)[i] = best_k;
  }
  if (needs_grad) {
    auto steps_copy = steps;
    out->backward_fn = [steps_copy, argmax](Node* self) {
      for (std::size_t i = 0; i < self->grad.size(); ++i) {
        Node* winner = steps_copy[static_cast<std::size_t>((*argmax)[i])];
        if (winner->requires_grad) winner->grad[i] += self->grad[i];
      }
    };
  }
  return out;
}

Node* Graph::softmax(Node* logits) {
  require_rank2(logits, "softmax");
  const int m = logits->shape[0], n = logits->shape[1];
  Node* out = make(logits->shape, logits->requires_grad);
  for (int i = 0; i < m; ++i) {
    const double* row = logits->data.data() + static_cast<std::size_t>(i) * n;
    double* orow = out->data.data() + static_cast<std::size_t>(i) * n;
    double hi = row[0];
    for (int j = 1; j < n; ++j) hi = std::max(hi, row[j]);
    double z = 0.0;
    for (int j = 0; j < n; ++j) {
      orow[j] = std::exp(row[j] - hi);
      z += orow[j];
    }
    for (int j = 0; j < n; ++j) orow[j] /= z;
  }
  if (out->requires_grad) {
    out->backward_fn = [logits, m, n](Node* self) {
      for (int i = 0; i < m; ++i) {
        const double* s = self->data.data() + static_cast<std::size_t>(i) * n;
        const double* g = self->grad.data() + static_cast<std::size_t>(i) * n;
        double dot = 0.0;
        for (int j = 0; j < n; ++j) dot += g[j] * s[j];
        double* gl = logits->grad.data() + static_cast<std::size_t>(i) * n;
        for (int j = 0; j < n; ++j) gl[j] += s[j] * (g[j] - dot);
      }
    };
  }
  return out;
}

Node* Graph::softmax_cross_entropy(Node* logits,
                                   const std::vector<int>& labels) {
  require_rank2(logits, "softmax_cross_entropy");
  const int m = logits->shape[0], n = logits->shape[1];
  if (static_cast<int>(labels.size()) != m) {
    throw ShapeError("softmax_cross_entropy: " + std::to_string(labels.size()) +
                     " labels for " + std::to_string(m) + " rows");
  }
  for (int label : labels) {
    if (label < 0 || label >= n) {
      throw ArgumentError("softmax_cross_entropy: label " +
                          std::to_string(label) + " outside class range [0," +
                          std::to_string(n) + ")");
    }
  }
  auto probs = std::make_shared<std::vector<double>>(logits->size());
  double loss = 0.0;
  for (int i = 0; i < m; ++i) {
    const double* row = logits->data.data() + static_cast<std::size_t>(i) * n;
    double* prow = probs->data() + static_cast<std::size_t>(i) * n;
    double hi = row[0];
    for (int j = 1; j < n; ++j) hi = std::max(hi, row[j]);
    double z = 0.0;
    for (int j = 0; j < n; ++j) {
      prow[j] = std::exp(row[j] - hi);
      z += prow[j];
    }
    for (int j = 0; j < n; ++j) prow[j] /= z;
    loss -= std::log(std::max(prow[labels[i]], 1e-300));
  }
  loss /= static_cast<double>(m);

  Node* out = make({1}, logits->requires_grad);
  out->data[0] = loss;
  if (out->requires_grad) {
    auto labels_copy = labels;
    out->backward_fn = [logits, probs, labels_copy, m, n](Node* self) {
      const double g = self->grad[0] / static_cast<double>(m);
      for (int i = 0; i < m; ++i) {
        const double* prow = probs->data() + static_cast<std::size_t>(i) * n;
        double* grow = logits->grad.data() + static_cast<std::size_t>(i) * n;
        for (int j = 0; j < n; ++j) {
          grow[j] += g * (prow[j] - (j == labels_copy[i] ? 1.0 : 0.0));
        }
      }
    };
  }
  return out;
}

Node* Graph::pick(Node* a, std::size_t flat_index) {
  if (flat_index >= a->size()) {
    throw ShapeError("pick: index " + std::to_string(flat_index) +
                     " outside tensor of size " + std::to_string(a->size()));
  }
  Node* out = make({1}, a->requires_grad);
  out->data[0] = a->data[flat_index];
  if (out->requires_grad) {
    out->backward_fn = [a, flat_index](Node* self) {
      a->grad[flat_index] += self->grad[0];
    };
  }
  return out;
}

void Graph::backward(Node* loss) {
  if (loss->size() != 1) {
    throw ArgumentError("backward: loss must be scalar, got shape " +
                        shape_str(loss->shape));
  }
  if (!loss->requires_grad) return;
  loss->grad[0] = 1.0;
  for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
    Node* node = it->get();
    if (node == loss) {
      if (node->backward_fn) node->backward_fn(node);
      continue;
    }
    if (node->requires_grad && node->backward_fn) node->backward_fn(node);
  }
}

double grad_check(const GraphScalarFn& f, const Tensor& point, double eps,
                  std::uint64_t graph_seed) {
  if (!(eps > 0.0)) throw ArgumentError("grad_check: eps must be positive");

  Graph graph(graph_seed);
  Node* x = graph.input(point.shape, point.data, true);
  Node* loss = f(graph, x);
  graph.backward(loss);
  const std::vector<double> analytic = x->grad;

  auto eval = [&](const std::vector<double>& values) {
    Graph g(graph_seed);
    Node* xi = g.input(point.shape, values, false);
    Node* l = f(g, xi);
    if (l->size() != 1) throw ArgumentError("grad_check: f must be scalar");
    return l->data[0];
  };

  std::vector<double> values = point.data;
  double worst = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double saved = values[i];
    values[i] = saved + eps;
    const double up = eval(values);
    values[i] = saved - eps;
    const double down = eval(values);
    values[i] = saved;
    const double numeric = (up - down) / (2.0 * eps);
    if (!std::isfinite(numeric) || !std::isfinite(analytic[i])) {
      throw NumericError("grad_check: non-finite value at coordinate " +
                         std::to_string(i));
    }
    const double err =
        std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(analytic[i]));
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace offlang::ad
