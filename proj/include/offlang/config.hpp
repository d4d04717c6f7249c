#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "offlang/train.hpp"

namespace offlang::config {

// Flat "section.key = value" text file; '#' starts a comment. Environment
// variables are never consulted.
class KeyValueFile {
 public:
  static KeyValueFile parse_file(const std::string& path);
  static KeyValueFile parse_text(const std::string& text);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key,
                         const std::string& fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<std::string> get_list(const std::string& key) const;  // comma-split

  const std::map<std::string, std::string>& entries() const { return entries_; }

  // Keys read so far; anything else in the file is a validation error.
  void check_unknown_keys() const;

 private:
  std::map<std::string, std::string> entries_;
  mutable std::vector<std::string> consumed_;
};

enum class AugmentTechnique { kNone, kDelete, kGenerate, kBoth };

struct RunConfig {
  std::string train_path;
  std::optional<std::string> test_path;
  std::string task_selector = "hasoc-a";
  double dev_fraction = 0.1;
  std::uint64_t split_seed = 1;

  std::string model_kind = "bilstm";  // "bilstm" | "cnn"
  int hidden = 20;
  int lstm_layers = 2;
  std::vector<int> filter_widths = {2, 3, 4};
  int filters_per_width = 100;
  double dropout_keep = 0.5;

  std::optional<std::string> embeddings_path;
  int min_freq = 1;
  std::uint64_t embed_seed = 7;

  train::TrainConfig train;

  AugmentTechnique augment = AugmentTechnique::kNone;
  std::optional<std::string> wordlist_path;
  std::optional<std::string> removals_path;
  std::optional<std::string> continuations_path;

  std::string output_dir = "runs/out";
};

// Parses and validates a run configuration. Unknown keys, malformed
// values and missing referenced files all raise ConfigError naming the
// offending field.
RunConfig load_run_config(const std::string& path);
RunConfig run_config_from_text(const std::string& text);

// The resolved configuration as flat key = value pairs (for manifests).
std::map<std::string, std::string> to_entries(const RunConfig& cfg);

}  // namespace offlang::config
