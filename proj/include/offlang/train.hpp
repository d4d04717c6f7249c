#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "offlang/corpus.hpp"
#include "offlang/embed.hpp"
#include "offlang/metrics.hpp"
#include "offlang/models.hpp"

namespace offlang::train {

enum class Optimizer { kAdam, kSgd };

struct TrainConfig {
  int epochs = 6;
  int batch_size = 64;
  double base_lr = 1e-3;
  double warmup_fraction = 0.1;
  bool use_lr_schedule = true;
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  Optimizer optimizer = Optimizer::kAdam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
};

struct EpochRecord {
  double train_loss = 0.0;
  double val_loss = 0.0;
  metrics::ScoreReport val_scores;
};

struct RunHistory {
  std::vector<EpochRecord> epochs;
  int chosen_epoch = 0;  // 1-based, argmin of validation loss
};

// Piecewise-linear schedule: 0 -> base_lr over the first warmup_steps,
// then base_lr -> 0 at total_steps. Continuous at the boundary.
double lr_at(long long step, long long total_steps, long long warmup_steps,
             double base_lr);

// 1-based index of the smallest value, first occurrence on ties.
int select_best_epoch(const std::vector<double>& val_losses);

struct TrainResult {
  models::ModelState best_model;
  RunHistory history;
};

// Runs exactly cfg.epochs epochs of mini-batch optimization and returns
// the parameters snapshotted at the epoch with the lowest validation
// loss. Deterministic for a fixed seed: the seed drives batch order and
// dropout. Corpora must already be encoded against the model's vocab.
TrainResult fit(models::ModelState model, const corpus::LabeledCorpus& train_set,
                const corpus::LabeledCorpus& dev_set, const TrainConfig& cfg,
                std::uint64_t seed);

struct EvalResult {
  double loss = 0.0;
  metrics::ScoreReport scores;
  metrics::ConfusionMatrix cm;
};

// Eval-mode loss and scores over a labeled corpus.
EvalResult evaluate(models::ModelState& model,
                    const corpus::LabeledCorpus& data, int batch_size);

struct MetricSummary {
  metrics::Aggregate dev_weighted_f1;
  metrics::Aggregate dev_macro_f1;
  metrics::Aggregate dev_micro_f1;
  metrics::Aggregate test_weighted_f1;
  metrics::Aggregate test_macro_f1;
  metrics::Aggregate test_micro_f1;
};

struct AggregatedResult {
  std::vector<TrainResult> runs;
  std::vector<EvalResult> dev_evals;
  std::vector<EvalResult> test_evals;  // empty without a test corpus
  MetricSummary summary;               // percent scale, mean/population sd
};

struct ModelFactory {
  // Builds a fresh model for one run seed.
  std::function<models::ModelState(std::uint64_t seed)> make;
};

// Trains once per cfg seed and aggregates dev/test metrics across runs
// (mean and population standard deviation, percent scale).
AggregatedResult run_experiment(const ModelFactory& factory,
                                const corpus::LabeledCorpus& train_set,
                                const corpus::LabeledCorpus& dev_set,
                                const corpus::LabeledCorpus* test_set,
                                const TrainConfig& cfg);

// One history record per line as a JSON object.
std::string history_to_jsonl(const RunHistory& history);

// Table row in the "mean (sd)" cell convention, dev/test x weighted/macro.
std::string render_summary(const std::string& task_name,
                           const std::string& model_name,
                           const MetricSummary& summary, bool has_test);

}  // namespace offlang::train
