#include "offlang/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <unordered_map>

#include "offlang/error.hpp"

namespace offlang::metrics {

long long ConfusionMatrix::total() const {
  long long t = 0;
  for (const auto& row : counts)
    for (long long v : row) t += v;
  return t;
}

long long ConfusionMatrix::row_total(std::size_t i) const {
  long long t = 0;
  for (long long v : counts.at(i)) t += v;
  return t;
}

double ConfusionMatrix::misclassification_rate(std::size_t i) const {
  const long long row = row_total(i);
  if (row == 0) return 0.0;
  return static_cast<double>(row - counts.at(i).at(i)) /
         static_cast<double>(row);
}

ConfusionMatrix confusion(const std::vector<std::string>& labels,
                          const std::vector<std::string>& preds,
                          const std::vector<std::string>& classes) {
  if (labels.empty() || labels.size() != preds.size()) {
    throw ArgumentError("confusion: need equal, nonzero label/pred counts (" +
                        std::to_string(labels.size()) + " vs " +
                        std::to_string(preds.size()) + ")");
  }
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < classes.size(); ++i) index[classes[i]] = i;

  ConfusionMatrix cm;
  cm.classes = classes;
  cm.counts.assign(classes.size(),
                   std::vector<long long>(classes.size(), 0));
  for (std::size_t k = 0; k < labels.size(); ++k) {
    auto li = index.find(labels[k]);
    auto pi = index.find(preds[k]);
    if (li == index.end()) {
      throw ArgumentError("confusion: unknown label '" + labels[k] + "'");
    }
    if (pi == index.end()) {
      throw ArgumentError("confusion: unknown prediction '" + preds[k] + "'");
    }
    ++cm.counts[li->second][pi->second];
  }
  return cm;
}

ScoreReport scores(const ConfusionMatrix& cm) {
  if (cm.total() <= 0) throw ArgumentError("scores: empty confusion matrix");
  const std::size_t c = cm.classes.size();
  ScoreReport rep;
  rep.classes = cm.classes;
  rep.precision.resize(c);
  rep.recall.resize(c);
  rep.f1.resize(c);
  rep.support.resize(c);

  long long global_tp = 0, global_fp = 0, global_fn = 0;
  double weighted_sum = 0.0;
  double macro_sum = 0.0;
  long long total_support = 0;
  for (std::size_t i = 0; i < c; ++i) {
    long long tp = cm.counts[i][i];
    long long fp = 0, fn = 0;
    for (std::size_t j = 0; j < c; ++j) {
      if (j == i) continue;
      fp += cm.counts[j][i];
      fn += cm.counts[i][j];
    }
    const double p = (tp + fp) ? static_cast<double>(tp) / (tp + fp) : 0.0;
    const double r = (tp + fn) ? static_cast<double>(tp) / (tp + fn) : 0.0;
    const double f = (p + r > 0.0) ? 2.0 * p * r / (p + r) : 0.0;
    rep.precision[i] = p;
    rep.recall[i] = r;
    rep.f1[i] = f;
    rep.support[i] = tp + fn;
    global_tp += tp;
    global_fp += fp;
    global_fn += fn;
    macro_sum += f;
    weighted_sum += f * static_cast<double>(rep.support[i]);
    total_support += rep.support[i];
  }
  rep.macro_f1 = macro_sum / static_cast<double>(c);
  rep.weighted_f1 =
      total_support ? weighted_sum / static_cast<double>(total_support) : 0.0;
  const double micro_p =
      (global_tp + global_fp) ? static_cast<double>(global_tp) / (global_tp + global_fp) : 0.0;
  const double micro_r =
      (global_tp + global_fn) ? static_cast<double>(global_tp) / (global_tp + global_fn) : 0.0;
  rep.micro_f1 = (micro_p + micro_r > 0.0)
                     ? 2.0 * micro_p * micro_r / (micro_p + micro_r)
                     : 0.0;
  return rep;
}

Aggregate aggregate(const std::vector<double>& values) {
  if (values.empty()) throw ArgumentError("aggregate: no values");
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(values.size());
  return {mean, std::sqrt(var)};
}

std::string format_mean_sd(double mean, double sd) {
  char buf[64];
  if (sd == 0.0) {
    std::snprintf(buf, sizeof(buf), "%.2f (0)", mean);
  } else {
    std::snprintf(buf, sizeof(buf), "%.2f (%.2f)", mean, sd);
  }
  return buf;
}

std::string format_mean_sd(const Aggregate& agg) {
  return format_mean_sd(agg.mean, agg.sd);
}

std::string render_confusion(const ConfusionMatrix& cm) {
  std::size_t width = 5;
  for (const auto& name : cm.classes) width = std::max(width, name.size() + 1);
  for (const auto& row : cm.counts) {
    for (long long v : row) {
      width = std::max(width, std::to_string(v).size() + 1);
    }
  }
  std::ostringstream out;
  auto pad = [&](const std::string& s) {
    out << std::string(width > s.size() ? width - s.size() : 1, ' ') << s;
  };
  pad("true\\pred");
  for (const auto& name : cm.classes) pad(name);
  out << '\n';
  for (std::size_t i = 0; i < cm.classes.size(); ++i) {
    pad(cm.classes[i]);
    for (long long v : cm.counts[i]) pad(std::to_string(v));
    out << '\n';
  }
  return out.str();
}

}  // namespace offlang::metrics
