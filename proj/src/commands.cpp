#include "offlang/commands.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "offlang/attrib.hpp"
#include "offlang/augment.hpp"
#include "offlang/checkpoint.hpp"
#include "offlang/config.hpp"
#include "offlang/corpus.hpp"
#include "offlang/embed.hpp"
#include "offlang/error.hpp"
#include "offlang/metrics.hpp"
#include "offlang/models.hpp"
#include "offlang/textprep.hpp"
#include "offlang/train.hpp"

namespace offlang::commands {

namespace fs = std::filesystem;

namespace {

// FNV-1a over the file bytes; recorded in manifests so a run can be
// re-checked against the exact inputs it saw.
std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file for digest: " + path);
  std::uint64_t hash = 1469598103934665603ull;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      hash ^= static_cast<unsigned char>(buf[i]);
      hash *= 1099511628211ull;
    }
  }
  char out[17];
  std::snprintf(out, sizeof(out), "%016llx",
                static_cast<unsigned long long>(hash));
  return out;
}

corpus::LabeledCorpus clean_corpus(const corpus::LabeledCorpus& raw,
                                   std::size_t* dropped_empty = nullptr) {
  corpus::LabeledCorpus out;
  out.schema = raw.schema;
  std::size_t dropped = 0;
  for (const auto& sample : raw.samples) {
    corpus::Sample cleaned = sample;
    cleaned.raw_text = textprep::clean(sample.raw_text);
    if (cleaned.raw_text.empty()) {
      ++dropped;
      continue;
    }
    out.samples.push_back(std::move(cleaned));
  }
  if (dropped_empty != nullptr) *dropped_empty = dropped;
  return out;
}

struct PreparedData {
  corpus::TaskSchema schema;
  corpus::LabeledCorpus train;
  corpus::LabeledCorpus dev;
  corpus::LabeledCorpus test;  // may be empty
  bool has_test = false;
  std::size_t augmented_added = 0;
};

PreparedData prepare_data(const config::RunConfig& cfg) {
  PreparedData data;
  data.schema = corpus::schema_from_selector(cfg.task_selector);
  corpus::LabeledCorpus raw_train =
      corpus::parse_corpus(cfg.train_path, data.schema);
  corpus::LabeledCorpus cleaned = clean_corpus(raw_train);
  if (cleaned.empty()) {
    throw DataError("training corpus is empty after cleaning");
  }
  corpus::DevSplit split =
      corpus::split_dev(cleaned, cfg.dev_fraction, cfg.split_seed);
  data.train = std::move(split.train);
  data.dev = std::move(split.dev);

  const bool uses_deletion = cfg.augment == config::AugmentTechnique::kDelete ||
                             cfg.augment == config::AugmentTechnique::kBoth;
  const bool uses_generation =
      cfg.augment == config::AugmentTechnique::kGenerate ||
      cfg.augment == config::AugmentTechnique::kBoth;
  if (uses_deletion || uses_generation) {
    std::vector<corpus::Sample> deleted;
    std::vector<corpus::Sample> generated;
    if (uses_deletion) {
      augment::OffensiveLexicon lexicon =
          augment::load_wordlist(*cfg.wordlist_path, cfg.removals_path);
      deleted = augment::deleted_variants(data.train, lexicon);
    }
    if (uses_generation) {
      generated = augment::generated_variants(
          data.train, augment::load_continuations(*cfg.continuations_path));
    }
    const std::size_t before = data.train.size();
    data.train = augment::to_corpus(
        augment::merge_augmented(data.train, deleted, generated));
    data.augmented_added = data.train.size() - before;
  }

  if (cfg.test_path) {
    corpus::LabeledCorpus raw_test =
        corpus::parse_corpus(*cfg.test_path, data.schema);
    data.test = clean_corpus(raw_test);
    data.has_test = true;
  }
  return data;
}

models::ModelState build_model(const config::RunConfig& cfg,
                               const corpus::TaskSchema& schema,
                               const embed::Vocab& vocab,
                               const embed::EmbeddingTable& table,
                               std::uint64_t seed) {
  models::ModelState state;
  if (cfg.model_kind == "bilstm") {
    models::BiLstmConfig mc;
    mc.hidden = cfg.hidden;
    mc.layers = cfg.lstm_layers;
    mc.dropout_keep = cfg.dropout_keep;
    mc.num_classes = static_cast<int>(schema.label_set.size());
    state = models::init_bilstm(mc, table, seed);
  } else {
    models::CnnConfig mc;
    mc.filter_widths = cfg.filter_widths;
    mc.filters_per_width = cfg.filters_per_width;
    mc.dropout_keep = cfg.dropout_keep;
    mc.num_classes = static_cast<int>(schema.label_set.size());
    state = models::init_cnn(mc, table, seed);
  }
  state.vocab = vocab;
  state.label_set = schema.label_set;
  return state;
}

int cmd_preprocess(const std::string& data_path, const std::string& selector,
                   const std::string& out_path) {
  const corpus::TaskSchema schema = corpus::schema_from_selector(selector);
  corpus::LabeledCorpus raw = corpus::parse_corpus(data_path, schema);
  std::size_t dropped = 0;
  corpus::LabeledCorpus cleaned = clean_corpus(raw, &dropped);
  corpus::write_corpus(cleaned, out_path);
  std::cout << "preprocess: " << raw.size() << " rows in, " << cleaned.size()
            << " rows out (" << dropped << " cleaned to empty)\n";
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

int cmd_augment(const std::string& data_path, const std::string& selector,
                const std::string& technique, const std::string& wordlist,
                const std::string& removals, const std::string& continuations,
                const std::string& out_path) {
  const corpus::TaskSchema schema = corpus::schema_from_selector(selector);
  corpus::LabeledCorpus raw = corpus::parse_corpus(data_path, schema);
  corpus::LabeledCorpus cleaned = clean_corpus(raw);

  const bool uses_deletion = technique == "delete" || technique == "both";
  const bool uses_generation = technique == "generate" || technique == "both";
  if (!uses_deletion && !uses_generation) {
    throw ArgumentError("--technique must be delete, generate or both, got " +
                        technique);
  }
  std::vector<corpus::Sample> deleted;
  std::vector<corpus::Sample> generated;
  if (uses_deletion) {
    if (wordlist.empty()) {
      throw ArgumentError("--wordlist is required for the deletion technique");
    }
    augment::OffensiveLexicon lexicon = augment::load_wordlist(
        wordlist, removals.empty()
                      ? std::nullopt
                      : std::optional<std::string>(removals));
    deleted = augment::deleted_variants(cleaned, lexicon);
  }
  if (uses_generation) {
    if (continuations.empty()) {
      throw ArgumentError(
          "--continuations is required for the generation technique");
    }
    generated = augment::generated_variants(
        cleaned, augment::load_continuations(continuations));
  }
  augment::AugmentedCorpus merged =
      augment::merge_augmented(cleaned, deleted, generated);
  std::vector<std::string> provenance;
  provenance.reserve(merged.samples.size());
  for (auto p : merged.provenance) {
    provenance.push_back(augment::provenance_name(p));
  }
  corpus::write_corpus(augment::to_corpus(merged), out_path, provenance);
  std::cout << "augment: " << cleaned.size() << " originals, "
            << merged.samples.size() << " merged samples\n";
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

int cmd_train(const std::string& config_path) {
  const config::RunConfig cfg = config::load_run_config(config_path);
  PreparedData data = prepare_data(cfg);

  const embed::Vocab vocab = embed::build_vocab(data.train, cfg.min_freq);
  const embed::EmbeddingTable table =
      cfg.embeddings_path
          ? embed::load_embeddings(*cfg.embeddings_path, vocab, cfg.embed_seed)
          : embed::random_embeddings(vocab, cfg.embed_seed);

  train::ModelFactory factory;
  factory.make = [&](std::uint64_t seed) {
    return build_model(cfg, data.schema, vocab, table, seed);
  };

  std::cout << "training " << cfg.model_kind << " on " << cfg.task_selector
            << ": " << data.train.size() << " train / " << data.dev.size()
            << " dev samples, vocab " << vocab.size() << ", "
            << cfg.train.seeds.size() << " seed(s)\n";
  train::AggregatedResult result = train::run_experiment(
      factory, data.train, data.dev, data.has_test ? &data.test : nullptr,
      cfg.train);

  fs::create_directories(cfg.output_dir);
  nlohmann::json manifest;
  manifest["command"] = "train";
  manifest["config"] = config::to_entries(cfg);
  {
    nlohmann::json seeds = nlohmann::json::array();
    for (auto s : cfg.train.seeds) seeds.push_back(s);
    manifest["seeds"] = seeds;
  }
  nlohmann::json inputs;
  inputs[cfg.train_path] = file_digest(cfg.train_path);
  if (cfg.test_path) inputs[*cfg.test_path] = file_digest(*cfg.test_path);
  if (cfg.embeddings_path) {
    inputs[*cfg.embeddings_path] = file_digest(*cfg.embeddings_path);
  }
  if (cfg.wordlist_path) {
    inputs[*cfg.wordlist_path] = file_digest(*cfg.wordlist_path);
  }
  if (cfg.removals_path) {
    inputs[*cfg.removals_path] = file_digest(*cfg.removals_path);
  }
  if (cfg.continuations_path) {
    inputs[*cfg.continuations_path] = file_digest(*cfg.continuations_path);
  }
  manifest["inputs"] = inputs;

  std::vector<std::string> outputs;
  for (std::size_t i = 0; i < result.runs.size(); ++i) {
    const std::string tag = "seed" + std::to_string(cfg.train.seeds[i]);
    const std::string ckpt = cfg.output_dir + "/checkpoint_" + tag + ".olck";
    checkpoint::save(result.runs[i].best_model, ckpt);
    outputs.push_back(ckpt);
    const std::string hist = cfg.output_dir + "/history_" + tag + ".jsonl";
    std::ofstream hout(hist);
    if (!hout) throw IoError("cannot write history: " + hist);
    hout << train::history_to_jsonl(result.runs[i].history);
    outputs.push_back(hist);
    std::cout << "run " << tag << ": best epoch "
              << result.runs[i].history.chosen_epoch << ", val loss "
              << result.runs[i]
                     .history.epochs[result.runs[i].history.chosen_epoch - 1]
                     .val_loss
              << "\n";
  }

  const std::string summary_path = cfg.output_dir + "/summary.txt";
  {
    std::ofstream sout(summary_path);
    if (!sout) throw IoError("cannot write summary: " + summary_path);
    const std::string rendered = train::render_summary(
        cfg.task_selector, cfg.model_kind, result.summary, data.has_test);
    sout << rendered;
    if (data.has_test && !result.test_evals.empty()) {
      sout << "\nTest confusion matrix (last run):\n"
           << metrics::render_confusion(result.test_evals.back().cm);
    }
    std::cout << rendered;
  }
  outputs.push_back(summary_path);

  auto agg_json = [](const metrics::Aggregate& a) {
    return nlohmann::json{{"mean", a.mean}, {"sd", a.sd}};
  };
  manifest["results"]["task"] = cfg.task_selector;
  manifest["results"]["model"] = cfg.model_kind;
  manifest["results"]["dev"] = {
      {"weighted_f1", agg_json(result.summary.dev_weighted_f1)},
      {"macro_f1", agg_json(result.summary.dev_macro_f1)},
      {"micro_f1", agg_json(result.summary.dev_micro_f1)}};
  if (data.has_test) {
    manifest["results"]["test"] = {
        {"weighted_f1", agg_json(result.summary.test_weighted_f1)},
        {"macro_f1", agg_json(result.summary.test_macro_f1)},
        {"micro_f1", agg_json(result.summary.test_micro_f1)}};
  }
  manifest["outputs"] = outputs;

  const std::string manifest_path = cfg.output_dir + "/manifest.json";
  std::ofstream mout(manifest_path);
  if (!mout) throw IoError("cannot write manifest: " + manifest_path);
  mout << manifest.dump(2) << "\n";
  std::cout << "wrote " << manifest_path << "\n";
  return 0;
}

int cmd_eval(const std::string& checkpoint_path, const std::string& data_path,
             const std::string& selector, int batch_size) {
  models::ModelState model = checkpoint::load(checkpoint_path);
  const corpus::TaskSchema schema = corpus::schema_from_selector(selector);
  if (schema.label_set != model.label_set) {
    throw ConfigError("checkpoint labels do not match task " + selector);
  }
  corpus::LabeledCorpus raw = corpus::parse_corpus(data_path, schema);
  corpus::LabeledCorpus cleaned = clean_corpus(raw);
  if (cleaned.empty()) throw DataError("no samples to evaluate");

  train::EvalResult eval = train::evaluate(model, cleaned, batch_size);
  train::MetricSummary summary;
  summary.dev_weighted_f1 = {100.0 * eval.scores.weighted_f1, 0.0};
  summary.dev_macro_f1 = {100.0 * eval.scores.macro_f1, 0.0};
  summary.dev_micro_f1 = {100.0 * eval.scores.micro_f1, 0.0};

  std::cout << "Evaluation of " << checkpoint_path << " on " << data_path
            << " (" << cleaned.size() << " samples)\n";
  std::cout << "Task: " << selector << "\n";
  std::cout << "  loss:        " << eval.loss << "\n";
  std::cout << "  weighted F1: "
            << metrics::format_mean_sd(summary.dev_weighted_f1) << "\n";
  std::cout << "  macro F1:    " << metrics::format_mean_sd(summary.dev_macro_f1)
            << "\n";
  std::cout << "  micro F1:    " << metrics::format_mean_sd(summary.dev_micro_f1)
            << "\n";
  std::cout << "per-class:\n";
  for (std::size_t i = 0; i < eval.scores.classes.size(); ++i) {
    std::cout << "  " << eval.scores.classes[i]
              << ": P=" << eval.scores.precision[i]
              << " R=" << eval.scores.recall[i] << " F1=" << eval.scores.f1[i]
              << " support=" << eval.scores.support[i] << " misclassified="
              << 100.0 * eval.cm.misclassification_rate(i) << "%\n";
  }
  std::cout << metrics::render_confusion(eval.cm);
  return 0;
}

int cmd_explain(const std::string& checkpoint_path,
                const std::vector<std::string>& texts,
                const std::string& input_path, const std::string& out_dir,
                int steps, const std::string& target,
                const std::string& baseline) {
  models::ModelState model = checkpoint::load(checkpoint_path);
  model.mode = models::Mode::kEval;

  std::vector<std::string> all_texts = texts;
  if (!input_path.empty()) {
    std::ifstream in(input_path);
    if (!in) throw IoError("cannot open input texts: " + input_path);
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) all_texts.push_back(line);
    }
  }
  if (all_texts.empty()) {
    throw ArgumentError("explain: no input texts (use --text or --input)");
  }

  attrib::IgConfig cfg;
  cfg.steps = steps;
  if (baseline == "pad") cfg.baseline = attrib::Baseline::kPadSequence;
  else if (baseline == "zero") cfg.baseline = attrib::Baseline::kZeroEmbedding;
  else throw ArgumentError("--baseline must be pad or zero, got " + baseline);
  if (!target.empty()) {
    int index = -1;
    for (std::size_t i = 0; i < model.label_set.size(); ++i) {
      if (model.label_set[i] == target) index = static_cast<int>(i);
    }
    if (index < 0) {
      throw ArgumentError("target label '" + target +
                          "' is not one of the checkpoint's classes");
    }
    cfg.target_class = index;
  }

  fs::create_directories(out_dir);
  std::vector<attrib::IndexEntry> entries;
  for (std::size_t i = 0; i < all_texts.size(); ++i) {
    const std::string cleaned = textprep::clean(all_texts[i]);
    if (cleaned.empty()) {
      std::cerr << "skipping text " << i + 1 << ": empty after cleaning\n";
      continue;
    }
    attrib::AttributionReport report = attrib::explain_text(model, cleaned, cfg);
    char name[32];
    std::snprintf(name, sizeof(name), "report_%03zu.html", i + 1);
    attrib::render_report(report, out_dir + "/" + name);
    std::string snippet = cleaned.substr(0, 60);
    entries.push_back({name, report.predicted_label, snippet});
  }
  if (entries.empty()) throw DataError("explain: every input cleaned to empty");
  attrib::render_index(entries, out_dir + "/index.html");
  std::cout << "wrote " << entries.size() << " report(s) under " << out_dir
            << "\n";
  return 0;
}

int cmd_report(const std::vector<std::string>& manifest_paths,
               const std::string& out_path) {
  if (manifest_paths.empty()) {
    throw ArgumentError("report: no manifest files given");
  }
  struct Row {
    std::string task;
    std::string model;
    std::string dev_w, test_w, dev_m, test_m;
  };
  std::vector<Row> rows;
  for (const auto& path : manifest_paths) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open manifest: " + path);
    nlohmann::json manifest;
    try {
      in >> manifest;
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("bad manifest " + path + ": " + e.what());
    }
    if (!manifest.contains("results")) {
      throw DataError("manifest has no results block: " + path);
    }
    const auto& results = manifest["results"];
    auto cell = [&](const char* split, const char* metric) -> std::string {
      if (!results.contains(split)) return "-";
      const auto& block = results[split][metric];
      return metrics::format_mean_sd(block["mean"].get<double>(),
                                     block["sd"].get<double>());
    };
    rows.push_back({results["task"].get<std::string>(),
                    results["model"].get<std::string>(),
                    cell("dev", "weighted_f1"), cell("test", "weighted_f1"),
                    cell("dev", "macro_f1"), cell("test", "macro_f1")});
  }

  std::ostringstream out;
  out << "Model comparison (mean (sd), %)\n";
  auto pad = [](std::string s, std::size_t w) {
    s.resize(std::max(s.size(), w), ' ');
    return s;
  };
  out << pad("Task", 12) << pad("Model", 8) << pad("W-F1 Dev", 15)
      << pad("W-F1 Test", 15) << pad("M-F1 Dev", 15) << pad("M-F1 Test", 15)
      << "\n";
  for (const auto& r : rows) {
    out << pad(r.task, 12) << pad(r.model, 8) << pad(r.dev_w, 15)
        << pad(r.test_w, 15) << pad(r.dev_m, 15) << pad(r.test_m, 15) << "\n";
  }
  std::cout << out.str();
  if (!out_path.empty()) {
    std::ofstream fout(out_path);
    if (!fout) throw IoError("cannot write report: " + out_path);
    fout << out.str();
    std::cout << "wrote " << out_path << "\n";
  }
  return 0;
}

}  // namespace

int run_command(const std::vector<std::string>& argv) {
  CLI::App app{"hate/offensive speech classification pipeline"};
  app.require_subcommand(1);

  auto* preprocess = app.add_subcommand(
      "preprocess", "clean a corpus file and write it back in the same format");
  std::string pre_data, pre_task = "hasoc-a", pre_out;
  preprocess->add_option("--data", pre_data, "corpus file")->required();
  preprocess->add_option("--task", pre_task, "dataset-task selector (e.g. hasoc-a)");
  preprocess->add_option("--out", pre_out, "output file")->required();

  auto* augment_cmd = app.add_subcommand(
      "augment", "write an augmented corpus with a provenance column");
  std::string aug_data, aug_task = "hasoc-a", aug_technique = "delete";
  std::string aug_wordlist, aug_removals, aug_continuations, aug_out;
  augment_cmd->add_option("--data", aug_data, "corpus file")->required();
  augment_cmd->add_option("--task", aug_task, "dataset-task selector");
  augment_cmd->add_option("--technique", aug_technique,
                          "delete | generate | both");
  augment_cmd->add_option("--wordlist", aug_wordlist, "offensive word list");
  augment_cmd->add_option("--removals", aug_removals, "words to remove from the list");
  augment_cmd->add_option("--continuations", aug_continuations,
                          "tab-separated id<TAB>generated text");
  augment_cmd->add_option("--out", aug_out, "output file")->required();

  auto* train_cmd =
      app.add_subcommand("train", "run the full training pipeline from a config");
  std::string train_config;
  train_cmd->add_option("--config", train_config, "run configuration file")
      ->required();

  auto* eval_cmd =
      app.add_subcommand("eval", "score a checkpoint on a labeled corpus");
  std::string eval_ckpt, eval_data, eval_task = "hasoc-a";
  int eval_batch = 64;
  eval_cmd->add_option("--checkpoint", eval_ckpt, "checkpoint file")->required();
  eval_cmd->add_option("--data", eval_data, "corpus file")->required();
  eval_cmd->add_option("--task", eval_task, "dataset-task selector");
  eval_cmd->add_option("--batch-size", eval_batch, "evaluation batch size");

  auto* explain_cmd = app.add_subcommand(
      "explain", "integrated-gradients HTML reports for input texts");
  std::string exp_ckpt, exp_input, exp_out = "reports", exp_target;
  std::string exp_baseline = "pad";
  std::vector<std::string> exp_texts;
  int exp_steps = 50;
  explain_cmd->add_option("--checkpoint", exp_ckpt, "checkpoint file")
      ->required();
  explain_cmd->add_option("--text", exp_texts, "raw text (repeatable)");
  explain_cmd->add_option("--input", exp_input, "file with one text per line");
  explain_cmd->add_option("--out", exp_out, "output directory");
  explain_cmd->add_option("--steps", exp_steps, "path steps (default 50)");
  explain_cmd->add_option("--target", exp_target,
                          "class label to attribute (default: prediction)");
  explain_cmd->add_option("--baseline", exp_baseline, "pad | zero");

  auto* report_cmd = app.add_subcommand(
      "report", "merge run manifests into one comparison table");
  std::vector<std::string> rep_manifests;
  std::string rep_out;
  report_cmd->add_option("manifests", rep_manifests, "manifest.json files")
      ->required();
  report_cmd->add_option("--out", rep_out, "write the table to this file");

  std::vector<const char*> cargs;
  cargs.push_back("offlang");
  for (const auto& a : argv) cargs.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (preprocess->parsed()) return cmd_preprocess(pre_data, pre_task, pre_out);
    if (augment_cmd->parsed()) {
      return cmd_augment(aug_data, aug_task, aug_technique, aug_wordlist,
                         aug_removals, aug_continuations, aug_out);
    }
    if (train_cmd->parsed()) return cmd_train(train_config);
    if (eval_cmd->parsed()) {
      return cmd_eval(eval_ckpt, eval_data, eval_task, eval_batch);
    }
    if (explain_cmd->parsed()) {
      return cmd_explain(exp_ckpt, exp_texts, exp_input, exp_out, exp_steps,
                         exp_target, exp_baseline);
    }
    if (report_cmd->parsed()) return cmd_report(rep_manifests, rep_out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace offlang::commands
