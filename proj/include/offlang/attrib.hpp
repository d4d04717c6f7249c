#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "offlang/models.hpp"

namespace offlang::attrib {

enum class Baseline { kPadSequence, kZeroEmbedding };

struct IgConfig {
  int steps = 50;
  Baseline baseline = Baseline::kPadSequence;
  std::optional<int> target_class;  // empty: explain the predicted class
};

// Scalar function with gradient, evaluated along the straight path from
// the baseline to the input.
using PathFn =
    std::function<double(const std::vector<double>& point,
                         std::vector<double>& grad_out)>;

// Right-endpoint Riemann approximation of the path integral:
//   out_i = (x_i - b_i) * (1/m) * sum_{k=1..m} dF(b + (k/m)(x-b))/dx_i
std::vector<double> path_integral(const PathFn& f, const std::vector<double>& x,
                                  const std::vector<double>& baseline,
                                  int steps);

struct RawAttribution {
  std::vector<double> values;  // length * dim, row-major by position
  int length = 0;              // padded sequence length
  int dim = 0;
  int target_class = 0;
  double score_input = 0.0;     // target-class logit at the input
  double score_baseline = 0.0;  // target-class logit at the baseline
};

// Integrated Gradients of the target-class pre-softmax score with respect
// to the input embedding sequence. Requires eval mode (dropout identity)
// and steps >= 1.
RawAttribution integrated_gradients(models::ModelState& model,
                                    const std::vector<int>& ids,
                                    const IgConfig& cfg);

// Per-token scalars: the sum over embedding dimensions at each position.
// PAD positions come out as exactly 0.
std::vector<double> token_attributions(const RawAttribution& raw,
                                       const std::vector<int>& ids);

struct AttributionReport {
  std::vector<std::string> tokens;
  std::vector<double> attributions;  // one scalar per token
  std::string predicted_label;
  double predicted_prob = 0.0;
  std::string target_label;
  std::string model_kind;  // "bilstm" or "cnn"
  double completeness_residual = 0.0;
  double score_input = 0.0;
  double score_baseline = 0.0;
};

// Runs IG for one cleaned text and assembles the report.
AttributionReport explain_text(models::ModelState& model,
                               const std::string& clean_text,
                               const IgConfig& cfg);

// Self-contained HTML: one span per token, background intensity
// |score|/max|score|, red toward the hateful/offensive classes and green
// toward the non-hateful ones (NOT/NONE). Includes the prediction, the
// target class and the completeness residual to six decimals.
std::string render_report_html(const AttributionReport& report);
void render_report(const AttributionReport& report, const std::string& path);

struct IndexEntry {
  std::string file;
  std::string prediction;
  std::string snippet;
};

void render_index(const std::vector<IndexEntry>& entries,
                  const std::string& path);

}  // namespace offlang::attrib
