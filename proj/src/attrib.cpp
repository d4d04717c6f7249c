#include "offlang/attrib.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "offlang/error.hpp"
#include "offlang/textprep.hpp"

namespace offlang::attrib {

namespace {

bool non_offensive_label(const std::string& label) {
  return label == "NOT" || label == "NONE";
}

std::string html_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string format_double(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

}  // namespace

std::vector<double> path_integral(const PathFn& f, const std::vector<double>& x,
                                  const std::vector<double>& baseline,
                                  int steps) {
  if (steps < 1) {
    throw ArgumentError("path_integral: steps must be >= 1, got " +
                        std::to_string(steps));
  }
  if (x.size() != baseline.size()) {
    throw ArgumentError("path_integral: input and baseline sizes differ");
  }
  const std::size_t n = x.size();
  std::vector<double> grad_sum(n, 0.0);
  std::vector<double> point(n), grad(n);
  for (int k = 1; k <= steps; ++k) {
    const double alpha = static_cast<double>(k) / static_cast<double>(steps);
    for (std::size_t i = 0; i < n; ++i) {
      point[i] = baseline[i] + alpha * (x[i] - baseline[i]);
    }
    std::fill(grad.begin(), grad.end(), 0.0);
    f(point, grad);
    for (std::size_t i = 0; i < n; ++i) grad_sum[i] += grad[i];
  }
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = (x[i] - baseline[i]) * grad_sum[i] / static_cast<double>(steps);
  }
  return out;
}

RawAttribution integrated_gradients(models::ModelState& model,
                                    const std::vector<int>& ids,
                                    const IgConfig& cfg) {
  if (model.mode != models::Mode::kEval) {
    throw StateError("integrated gradients requires the model in eval mode");
  }
  if (cfg.steps < 1) {
    throw ArgumentError("ig steps must be >= 1, got " +
                        std::to_string(cfg.steps));
  }

  const int dim = model.embed_dim();
  const int vocab = model.embedding().shape[0];
  for (int id : ids) {
    if (id < 0 || id >= vocab) {
      throw EncodingError("token id " + std::to_string(id) +
                          " outside vocabulary of size " +
                          std::to_string(vocab));
    }
  }
  const int min_len =
      model.kind == models::ModelKind::kCnn
          ? *std::max_element(model.cnn.filter_widths.begin(),
                              model.cnn.filter_widths.end())
          : 1;
  models::Batch batch = models::make_batch({ids}, {}, min_len);
  const int length = static_cast<int>(batch.ids[0].size());
  const std::vector<int> lengths = batch.lengths;

  std::vector<double> x(static_cast<std::size_t>(length) * dim);
  for (int t = 0; t < length; ++t) {
    const double* row = model.embedding().data.data() +
                        static_cast<std::size_t>(batch.ids[0][t]) * dim;
    std::copy(row, row + dim, x.begin() + static_cast<std::size_t>(t) * dim);
  }
  std::vector<double> baseline(x.size(), 0.0);
  if (cfg.baseline == Baseline::kPadSequence) {
    const double* pad_row = model.embedding().data.data() +
                            static_cast<std::size_t>(embed::kPadIndex) * dim;
    for (int t = 0; t < length; ++t) {
      std::copy(pad_row, pad_row + dim,
                baseline.begin() + static_cast<std::size_t>(t) * dim);
    }
  }

  int target;
  if (cfg.target_class) {
    target = *cfg.target_class;
    if (target < 0 || target >= model.num_classes()) {
      throw ArgumentError("target class " + std::to_string(target) +
                          " outside [0," +
                          std::to_string(model.num_classes()) + ")");
    }
  } else {
    const std::vector<double> probs = models::predict(model, ids);
    target = static_cast<int>(std::distance(
        probs.begin(), std::max_element(probs.begin(), probs.end())));
  }

  auto score_only = [&](const std::vector<double>& values) {
    ad::Graph graph;
    ad::Node* emb = graph.input({1, length * dim}, values, false);
    ad::Node* out = models::logits_from_embeddings(model, graph, emb, lengths);
    return out->data[static_cast<std::size_t>(target)];
  };

  PathFn f = [&](const std::vector<double>& values,
                 std::vector<double>& grad_out) {
    ad::Graph graph;
    ad::Node* emb = graph.input({1, length * dim}, values, true);
    ad::Node* out = models::logits_from_embeddings(model, graph, emb, lengths);
    ad::Node* score = graph.pick(out, static_cast<std::size_t>(target));
    graph.backward(score);
    grad_out = emb->grad;
    return score->scalar();
  };

  RawAttribution raw;
  raw.values = path_integral(f, x, baseline, cfg.steps);
  raw.length = length;
  raw.dim = dim;
  raw.target_class = target;
  raw.score_input = score_only(x);
  raw.score_baseline = score_only(baseline);
  return raw;
}

std::vector<double> token_attributions(const RawAttribution& raw,
                                       const std::vector<int>& ids) {
  std::vector<double> out(static_cast<std::size_t>(raw.length), 0.0);
  for (int t = 0; t < raw.length; ++t) {
    const bool is_pad = t >= static_cast<int>(ids.size()) ||
                        ids[static_cast<std::size_t>(t)] == embed::kPadIndex;
    if (is_pad) continue;  // PAD positions report 0
    double sum = 0.0;
    for (int d = 0; d < raw.dim; ++d) {
      sum += raw.values[static_cast<std::size_t>(t) * raw.dim + d];
    }
    out[static_cast<std::size_t>(t)] = sum;
  }
  return out;
}

AttributionReport explain_text(models::ModelState& model,
                               const std::string& clean_text,
                               const IgConfig& cfg) {
  const std::vector<std::string> tokens = textprep::tokenize(clean_text);
  if (tokens.empty()) {
    throw ArgumentError("cannot attribute an empty text");
  }
  const std::vector<int> ids = model.vocab.encode(tokens);

  const std::vector<double> probs = models::predict(model, ids);
  const int predicted = static_cast<int>(std::distance(
      probs.begin(), std::max_element(probs.begin(), probs.end())));

  RawAttribution raw = integrated_gradients(model, ids, cfg);
  const std::vector<double> per_token = token_attributions(raw, ids);

  AttributionReport report;
  for (std::size_t t = 0; t < ids.size(); ++t) {
    report.tokens.push_back(tokens[t]);
    report.attributions.push_back(per_token[t]);
  }
  report.predicted_label =
      model.label_set.at(static_cast<std::size_t>(predicted));
  report.predicted_prob = probs[static_cast<std::size_t>(predicted)];
  report.target_label =
      model.label_set.at(static_cast<std::size_t>(raw.target_class));
  report.model_kind = model.kind == models::ModelKind::kBiLstm ? "bilstm" : "cnn";
  report.score_input = raw.score_input;
  report.score_baseline = raw.score_baseline;
  double total = 0.0;
  for (double v : raw.values) total += v;
  report.completeness_residual =
      std::abs(total - (raw.score_input - raw.score_baseline));
  return report;
}

std::string render_report_html(const AttributionReport& report) {
  double max_abs = 0.0;
  for (double a : report.attributions) max_abs = std::max(max_abs, std::abs(a));

  std::ostringstream out;
  out << "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n"
      << "<title>Token attributions</title>\n"
      << "<style>\n"
      << "body{font-family:sans-serif;margin:2em;}\n"
      << ".tokens{font-size:1.3em;line-height:2.2;}\n"
      << ".tokens span{padding:0.15em 0.25em;border-radius:0.2em;}\n"
      << "table{border-collapse:collapse;margin-top:1em;}\n"
      << "td,th{border:1px solid #ccc;padding:0.25em 0.6em;text-align:right;}\n"
      << "</style>\n</head>\n<body>\n"
      << "<h1>Token attributions</h1>\n"
      << "<p>Model: " << html_escape(report.model_kind)
      << " &middot; Prediction: <b>" << html_escape(report.predicted_label)
      << "</b> (p=" << format_double("%.4f", report.predicted_prob)
      << ") &middot; Target class: <b>" << html_escape(report.target_label)
      << "</b></p>\n"
      << "<p>Score(input)=" << format_double("%.6f", report.score_input)
      << " &middot; Score(baseline)="
      << format_double("%.6f", report.score_baseline)
      << " &middot; Completeness residual: "
      << format_double("%.6f", report.completeness_residual) << "</p>\n"
      << "<div class=\"tokens\">\n";

  const bool target_non_offensive = non_offensive_label(report.target_label);
  for (std::size_t i = 0; i < report.tokens.size(); ++i) {
    const double score = report.attributions[i];
    out << "<span";
    if (max_abs > 0.0 && score != 0.0) {
      const double intensity = std::abs(score) / max_abs;
      // Positive scores push toward the target class; color by whether
      // that direction is the hateful/offensive one.
      const bool toward_offensive = (score > 0.0) != target_non_offensive;
      const char* rgb = toward_offensive ? "220,53,69" : "25,135,84";
      out << " style=\"background-color:rgba(" << rgb << ","
          << format_double("%.2f", intensity) << ")\"";
    }
    out << ">" << html_escape(report.tokens[i]) << "</span> ";
  }
  out << "\n</div>\n<table>\n<tr><th>token</th><th>attribution</th></tr>\n";
  for (std::size_t i = 0; i < report.tokens.size(); ++i) {
    out << "<tr><td>" << html_escape(report.tokens[i]) << "</td><td>"
        << format_double("%.6f", report.attributions[i]) << "</td></tr>\n";
  }
  out << "</table>\n</body>\n</html>\n";
  return out.str();
}

void render_report(const AttributionReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write report: " + path);
  out << render_report_html(report);
  if (!out) throw IoError("failed writing report: " + path);
}

void render_index(const std::vector<IndexEntry>& entries,
                  const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write index: " + path);
  out << "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n"
      << "<title>Attribution reports</title>\n</head>\n<body>\n"
      << "<h1>Attribution reports</h1>\n<ol>\n";
  for (const auto& entry : entries) {
    out << "<li><a href=\"" << html_escape(entry.file) << "\">"
        << html_escape(entry.snippet) << "</a> &mdash; "
        << html_escape(entry.prediction) << "</li>\n";
  }
  out << "</ol>\n</body>\n</html>\n";
  if (!out) throw IoError("failed writing index: " + path);
}

}  // namespace offlang::attrib
