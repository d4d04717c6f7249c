#pragma once

#include <string>
#include <vector>

namespace offlang::metrics {

// Rows are true classes, columns are predicted classes.
struct ConfusionMatrix {
  std::vector<std::string> classes;
  std::vector<std::vector<long long>> counts;

  long long total() const;
  long long row_total(std::size_t i) const;
  // Fraction of class-i samples predicted as anything else.
  double misclassification_rate(std::size_t i) const;
};

struct ScoreReport {
  std::vector<std::string> classes;
  std::vector<double> precision;
  std::vector<double> recall;
  std::vector<double> f1;
  std::vector<long long> support;
  double micro_f1 = 0.0;
  double macro_f1 = 0.0;
  double weighted_f1 = 0.0;
};

ConfusionMatrix confusion(const std::vector<std::string>& labels,
                          const std::vector<std::string>& preds,
                          const std::vector<std::string>& classes);

// Per-class P = TP/(TP+FP), R = TP/(TP+FN), F1 = 2PR/(P+R); macro is the
// unweighted class mean, weighted the support-weighted mean, micro comes
// from globally pooled TP/FP/FN. Zero denominators yield 0.
ScoreReport scores(const ConfusionMatrix& cm);

struct Aggregate {
  double mean = 0.0;
  double sd = 0.0;  // population standard deviation
};

Aggregate aggregate(const std::vector<double>& values);

// Table cell convention: mean to two decimals followed by "(sd)";
// an sd of exactly zero renders as "(0)", e.g. "77.19 (0)".
std::string format_mean_sd(double mean, double sd);
std::string format_mean_sd(const Aggregate& agg);

// Aligned integer grid with class names on both axes.
std::string render_confusion(const ConfusionMatrix& cm);

}  // namespace offlang::metrics
