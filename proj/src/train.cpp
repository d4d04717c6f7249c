#include "offlang/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "offlang/error.hpp"
#include "offlang/textprep.hpp"

namespace offlang::train {

namespace {

struct EncodedCorpus {
  std::vector<std::vector<int>> ids;
  std::vector<int> labels;
};

EncodedCorpus encode_corpus(const models::ModelState& model,
                            const corpus::LabeledCorpus& data) {
  EncodedCorpus out;
  out.ids.reserve(data.size());
  out.labels.reserve(data.size());
  for (const auto& sample : data.samples) {
    out.ids.push_back(model.vocab.encode(textprep::tokenize(sample.raw_text)));
    int label = -1;
    for (std::size_t i = 0; i < model.label_set.size(); ++i) {
      if (model.label_set[i] == sample.label) {
        label = static_cast<int>(i);
        break;
      }
    }
    if (label < 0) {
      throw DataError("label '" + sample.label +
                      "' not in the model's label set (sample id " +
                      sample.id + ")");
    }
    out.labels.push_back(label);
  }
  return out;
}

int min_batch_len(const models::ModelState& model) {
  if (model.kind != models::ModelKind::kCnn) return 1;
  return *std::max_element(model.cnn.filter_widths.begin(),
                           model.cnn.filter_widths.end());
}

struct AdamSlot {
  std::vector<double> m;
  std::vector<double> v;
};

class Stepper {
 public:
  Stepper(models::ModelState& model, const TrainConfig& cfg)
      : model_(model), cfg_(cfg) {
    if (cfg.optimizer == Optimizer::kAdam) {
      slots_.resize(model.params.size());
      for (std::size_t i = 0; i < model.params.size(); ++i) {
        slots_[i].m.assign(model.params[i].tensor.size(), 0.0);
        slots_[i].v.assign(model.params[i].tensor.size(), 0.0);
      }
    }
  }

  void step(double lr) {
    ++t_;
    // PAD embedding row never trains.
    const int dim = model_.embed_dim();
    auto& emb_grad = model_.embedding().grad;
    std::fill(emb_grad.begin(), emb_grad.begin() + dim, 0.0);

    if (cfg_.optimizer == Optimizer::kSgd) {
      for (auto& p : model_.params) {
        if (!p.tensor.requires_grad) continue;
        for (std::size_t i = 0; i < p.tensor.size(); ++i) {
          p.tensor.data[i] -= lr * p.tensor.grad[i];
        }
      }
      return;
    }
    const double bc1 = 1.0 - std::pow(cfg_.adam_beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.adam_beta2, static_cast<double>(t_));
    for (std::size_t pi = 0; pi < model_.params.size(); ++pi) {
      auto& p = model_.params[pi].tensor;
      if (!p.requires_grad) continue;
      auto& slot = slots_[pi];
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double g = p.grad[i];
        slot.m[i] = cfg_.adam_beta1 * slot.m[i] + (1.0 - cfg_.adam_beta1) * g;
        slot.v[i] = cfg_.adam_beta2 * slot.v[i] + (1.0 - cfg_.adam_beta2) * g * g;
        const double mhat = slot.m[i] / bc1;
        const double vhat = slot.v[i] / bc2;
        p.data[i] -= lr * mhat / (std::sqrt(vhat) + cfg_.adam_eps);
      }
    }
  }

 private:
  models::ModelState& model_;
  const TrainConfig& cfg_;
  std::vector<AdamSlot> slots_;
  long long t_ = 0;
};

}  // namespace

double lr_at(long long step, long long total_steps, long long warmup_steps,
             double base_lr) {
  if (warmup_steps < 0 || total_steps <= warmup_steps) {
    throw ArgumentError("lr_at: need 0 <= warmup_steps < total_steps");
  }
  if (step < 0 || step > total_steps) {
    throw ArgumentError("lr_at: step " + std::to_string(step) +
                        " outside [0, " + std::to_string(total_steps) + "]");
  }
  if (step <= warmup_steps && warmup_steps > 0) {
    return base_lr * static_cast<double>(step) /
           static_cast<double>(warmup_steps);
  }
  return base_lr * static_cast<double>(total_steps - step) /
         static_cast<double>(total_steps - warmup_steps);
}

int select_best_epoch(const std::vector<double>& val_losses) {
  if (val_losses.empty()) throw ArgumentError("no epochs recorded");
  std::size_t best = 0;
  for (std::size_t i = 1; i < val_losses.size(); ++i) {
    if (val_losses[i] < val_losses[best]) best = i;
  }
  return static_cast<int>(best) + 1;
}

EvalResult evaluate(models::ModelState& model, const corpus::LabeledCorpus& data,
                    int batch_size) {
  if (data.empty()) throw ArgumentError("evaluate: empty corpus");
  const EncodedCorpus encoded = encode_corpus(model, data);
  const models::Mode saved = model.mode;
  model.mode = models::Mode::kEval;
  const int min_len = min_batch_len(model);

  std::vector<std::string> preds;
  preds.reserve(data.size());
  double loss_sum = 0.0;
  for (std::size_t start = 0; start < encoded.ids.size();
       start += static_cast<std::size_t>(batch_size)) {
    const std::size_t end =
        std::min(encoded.ids.size(), start + static_cast<std::size_t>(batch_size));
    std::vector<std::vector<int>> ids(encoded.ids.begin() + start,
                                      encoded.ids.begin() + end);
    std::vector<int> labels(encoded.labels.begin() + start,
                            encoded.labels.begin() + end);
    models::Batch batch = models::make_batch(ids, labels, min_len);
    ad::Graph graph;
    ad::Node* out = models::logits(model, graph, batch);
    ad::Node* loss = graph.softmax_cross_entropy(out, batch.labels);
    loss_sum += loss->scalar() * static_cast<double>(end - start);
    const int classes = out->shape[1];
    for (std::size_t r = 0; r < end - start; ++r) {
      int best = 0;
      for (int c = 1; c < classes; ++c) {
        if (out->data[r * classes + c] > out->data[r * classes + best]) best = c;
      }
      preds.push_back(model.label_set[static_cast<std::size_t>(best)]);
    }
  }
  model.mode = saved;

  std::vector<std::string> labels;
  labels.reserve(data.size());
  for (const auto& s : data.samples) labels.push_back(s.label);

  EvalResult result;
  result.loss = loss_sum / static_cast<double>(data.size());
  result.cm = metrics::confusion(labels, preds, model.label_set);
  result.scores = metrics::scores(result.cm);
  return result;
}

TrainResult fit(models::ModelState model, const corpus::LabeledCorpus& train_set,
                const corpus::LabeledCorpus& dev_set, const TrainConfig& cfg,
                std::uint64_t seed) {
  if (train_set.empty()) throw ArgumentError("fit: empty training corpus");
  if (dev_set.empty()) throw ArgumentError("fit: empty dev corpus");
  if (cfg.epochs < 1) throw ArgumentError("fit: need at least one epoch");
  if (cfg.batch_size < 1) throw ArgumentError("fit: batch_size must be >= 1");

  const EncodedCorpus encoded = encode_corpus(model, train_set);
  const int min_len = min_batch_len(model);
  const long long batches_per_epoch =
      static_cast<long long>((encoded.ids.size() + cfg.batch_size - 1) /
                             static_cast<std::size_t>(cfg.batch_size));
  const long long total_steps = batches_per_epoch * cfg.epochs;
  const long long warmup_steps =
      std::llround(cfg.warmup_fraction * static_cast<double>(total_steps));

  std::mt19937_64 rng(seed);
  Stepper stepper(model, cfg);
  model.mode = models::Mode::kTrain;

  RunHistory history;
  models::ModelState best_model = model;
  double best_loss = 0.0;
  long long global_step = 0;

  std::vector<std::size_t> order(encoded.ids.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    model.mode = models::Mode::kTrain;
    for (long long bi = 0; bi < batches_per_epoch; ++bi) {
      const std::size_t start = static_cast<std::size_t>(bi) *
                                static_cast<std::size_t>(cfg.batch_size);
      const std::size_t end = std::min(encoded.ids.size(),
                                       start + static_cast<std::size_t>(cfg.batch_size));
      std::vector<std::vector<int>> ids;
      std::vector<int> labels;
      ids.reserve(end - start);
      labels.reserve(end - start);
      for (std::size_t k = start; k < end; ++k) {
        ids.push_back(encoded.ids[order[k]]);
        labels.push_back(encoded.labels[order[k]]);
      }
      models::Batch batch = models::make_batch(ids, labels, min_len);

      ad::Graph graph(rng());
      ad::Node* out = models::logits(model, graph, batch);
      ad::Node* loss = graph.softmax_cross_entropy(out, batch.labels);
      if (!std::isfinite(loss->scalar())) {
        throw TrainingError("non-finite loss at epoch " +
                            std::to_string(epoch) + ", batch " +
                            std::to_string(bi + 1));
      }
      epoch_loss += loss->scalar() * static_cast<double>(end - start);

      model.zero_grads();
      graph.backward(loss);
      const double lr = cfg.use_lr_schedule
                            ? lr_at(global_step, total_steps, warmup_steps,
                                    cfg.base_lr)
                            : cfg.base_lr;
      stepper.step(lr);
      ++global_step;
    }

    EvalResult dev_eval = evaluate(model, dev_set, cfg.batch_size);
    EpochRecord record;
    record.train_loss = epoch_loss / static_cast<double>(encoded.ids.size());
    record.val_loss = dev_eval.loss;
    record.val_scores = dev_eval.scores;
    history.epochs.push_back(record);

    if (history.epochs.size() == 1 || dev_eval.loss < best_loss) {
      best_loss = dev_eval.loss;
      best_model = model;
    }
  }

  std::vector<double> val_losses;
  val_losses.reserve(history.epochs.size());
  for (const auto& e : history.epochs) val_losses.push_back(e.val_loss);
  history.chosen_epoch = select_best_epoch(val_losses);

  best_model.mode = models::Mode::kEval;
  return {std::move(best_model), std::move(history)};
}

AggregatedResult run_experiment(const ModelFactory& factory,
                                const corpus::LabeledCorpus& train_set,
                                const corpus::LabeledCorpus& dev_set,
                                const corpus::LabeledCorpus* test_set,
                                const TrainConfig& cfg) {
  if (cfg.seeds.empty()) throw ArgumentError("run_experiment: no seeds");
  AggregatedResult result;
  std::vector<double> dev_w, dev_m, dev_u, test_w, test_m, test_u;
  for (std::uint64_t seed : cfg.seeds) {
    models::ModelState model = factory.make(seed);
    TrainResult run = fit(std::move(model), train_set, dev_set, cfg, seed);
    const EpochRecord& chosen =
        run.history.epochs.at(static_cast<std::size_t>(run.history.chosen_epoch) - 1);
    EvalResult dev_eval;
    dev_eval.loss = chosen.val_loss;
    dev_eval.scores = chosen.val_scores;
    dev_w.push_back(100.0 * chosen.val_scores.weighted_f1);
    dev_m.push_back(100.0 * chosen.val_scores.macro_f1);
    dev_u.push_back(100.0 * chosen.val_scores.micro_f1);
    if (test_set != nullptr) {
      EvalResult test_eval =
          evaluate(run.best_model, *test_set, cfg.batch_size);
      test_w.push_back(100.0 * test_eval.scores.weighted_f1);
      test_m.push_back(100.0 * test_eval.scores.macro_f1);
      test_u.push_back(100.0 * test_eval.scores.micro_f1);
      result.test_evals.push_back(std::move(test_eval));
    }
    result.dev_evals.push_back(std::move(dev_eval));
    result.runs.push_back(std::move(run));
  }
  result.summary.dev_weighted_f1 = metrics::aggregate(dev_w);
  result.summary.dev_macro_f1 = metrics::aggregate(dev_m);
  result.summary.dev_micro_f1 = metrics::aggregate(dev_u);
  if (test_set != nullptr) {
    result.summary.test_weighted_f1 = metrics::aggregate(test_w);
    result.summary.test_macro_f1 = metrics::aggregate(test_m);
    result.summary.test_micro_f1 = metrics::aggregate(test_u);
  }
  return result;
}

std::string history_to_jsonl(const RunHistory& history) {
  std::ostringstream out;
  for (std::size_t i = 0; i < history.epochs.size(); ++i) {
    const EpochRecord& e = history.epochs[i];
    nlohmann::json line = {
        {"epoch", i + 1},
        {"train_loss", e.train_loss},
        {"val_loss", e.val_loss},
        {"val_macro_f1", e.val_scores.macro_f1},
        {"val_weighted_f1", e.val_scores.weighted_f1},
        {"val_micro_f1", e.val_scores.micro_f1},
        {"chosen", static_cast<int>(i + 1) == history.chosen_epoch},
    };
    out << line.dump() << '\n';
  }
  return out.str();
}

std::string render_summary(const std::string& task_name,
                           const std::string& model_name,
                           const MetricSummary& summary, bool has_test) {
  std::ostringstream out;
  out << "Task: " << task_name << "  Model: " << model_name << '\n';
  out << "                Weighted F1 (%)               Macro F1 (%)\n";
  out << "                Dev (sd)      Test (sd)       Dev (sd)      Test (sd)\n";
  auto cell = [](const metrics::Aggregate& a) {
    std::string s = metrics::format_mean_sd(a);
    s.resize(std::max<std::size_t>(s.size(), 14), ' ');
    return s;
  };
  out << "                " << cell(summary.dev_weighted_f1)
      << (has_test ? cell(summary.test_weighted_f1) : std::string(14, ' '))
      << "  " << cell(summary.dev_macro_f1)
      << (has_test ? cell(summary.test_macro_f1) : std::string(14, ' '))
      << '\n';
  return out.str();
}

}  // namespace offlang::train
