#include "offlang/config.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "offlang/error.hpp"

namespace offlang::config {

namespace {

std::string strip(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::string to_lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

KeyValueFile KeyValueFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_text(buffer.str());
}

KeyValueFile KeyValueFile::parse_text(const std::string& text) {
  KeyValueFile kv;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = strip(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        " is not 'key = value': " + line);
    }
    const std::string key = strip(line.substr(0, eq));
    const std::string value = strip(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        " has an empty key");
    }
    if (kv.entries_.count(key)) {
      throw ConfigError("duplicate config key '" + key + "'");
    }
    kv.entries_[key] = value;
  }
  return kv;
}

bool KeyValueFile::has(const std::string& key) const {
  return entries_.count(key) != 0;
}

std::string KeyValueFile::get_string(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) {
    throw ConfigError("missing required config key '" + key + "'");
  }
  consumed_.push_back(key);
  return it->second;
}

std::string KeyValueFile::get_string(const std::string& key,
                                     const std::string& fallback) const {
  auto it = entries_.find(key);
  consumed_.push_back(key);
  return it == entries_.end() ? fallback : it->second;
}

long long KeyValueFile::get_int(const std::string& key,
                                long long fallback) const {
  auto it = entries_.find(key);
  consumed_.push_back(key);
  if (it == entries_.end()) return fallback;
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' is not an integer: " +
                      it->second);
  }
}

double KeyValueFile::get_double(const std::string& key, double fallback) const {
  auto it = entries_.find(key);
  consumed_.push_back(key);
  if (it == entries_.end()) return fallback;
  try {
    std::size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' is not a number: " +
                      it->second);
  }
}

bool KeyValueFile::get_bool(const std::string& key, bool fallback) const {
  auto it = entries_.find(key);
  consumed_.push_back(key);
  if (it == entries_.end()) return fallback;
  const std::string v = to_lower(it->second);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config key '" + key + "' is not a boolean: " + it->second);
}

std::vector<std::string> KeyValueFile::get_list(const std::string& key) const {
  auto it = entries_.find(key);
  consumed_.push_back(key);
  std::vector<std::string> out;
  if (it == entries_.end()) return out;
  std::istringstream in(it->second);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = strip(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void KeyValueFile::check_unknown_keys() const {
  for (const auto& [key, value] : entries_) {
    if (std::find(consumed_.begin(), consumed_.end(), key) ==
        consumed_.end()) {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
}

namespace {

RunConfig from_kv(const KeyValueFile& kv, bool check_paths) {
  RunConfig cfg;
  cfg.train_path = kv.get_string("data.train");
  if (kv.has("data.test")) cfg.test_path = kv.get_string("data.test");
  cfg.task_selector = kv.get_string("data.task", cfg.task_selector);
  cfg.dev_fraction = kv.get_double("data.dev_fraction", cfg.dev_fraction);
  cfg.split_seed =
      static_cast<std::uint64_t>(kv.get_int("data.split_seed", 1));

  cfg.model_kind = to_lower(kv.get_string("model.kind", cfg.model_kind));
  cfg.hidden = static_cast<int>(kv.get_int("model.hidden", cfg.hidden));
  cfg.lstm_layers = static_cast<int>(kv.get_int("model.layers", cfg.lstm_layers));
  cfg.filters_per_width = static_cast<int>(
      kv.get_int("model.filters_per_width", cfg.filters_per_width));
  if (kv.has("model.filter_widths")) {
    cfg.filter_widths.clear();
    for (const auto& item : kv.get_list("model.filter_widths")) {
      try {
        cfg.filter_widths.push_back(std::stoi(item));
      } catch (const std::exception&) {
        throw ConfigError("model.filter_widths entry is not an integer: " +
                          item);
      }
    }
  }
  cfg.dropout_keep = kv.get_double("model.dropout_keep", cfg.dropout_keep);

  if (kv.has("embed.path")) cfg.embeddings_path = kv.get_string("embed.path");
  cfg.min_freq = static_cast<int>(kv.get_int("embed.min_freq", cfg.min_freq));
  cfg.embed_seed = static_cast<std::uint64_t>(
      kv.get_int("embed.seed", static_cast<long long>(cfg.embed_seed)));

  cfg.train.epochs = static_cast<int>(kv.get_int("train.epochs", cfg.train.epochs));
  cfg.train.batch_size =
      static_cast<int>(kv.get_int("train.batch_size", cfg.train.batch_size));
  cfg.train.base_lr = kv.get_double("train.base_lr", cfg.train.base_lr);
  cfg.train.warmup_fraction =
      kv.get_double("train.warmup_fraction", cfg.train.warmup_fraction);
  cfg.train.use_lr_schedule =
      kv.get_bool("train.use_lr_schedule", cfg.train.use_lr_schedule);
  const std::string optimizer =
      to_lower(kv.get_string("train.optimizer", "adam"));
  if (optimizer == "adam") cfg.train.optimizer = train::Optimizer::kAdam;
  else if (optimizer == "sgd") cfg.train.optimizer = train::Optimizer::kSgd;
  else throw ConfigError("train.optimizer must be adam or sgd, got " + optimizer);
  if (kv.has("train.seeds")) {
    cfg.train.seeds.clear();
    for (const auto& item : kv.get_list("train.seeds")) {
      try {
        cfg.train.seeds.push_back(std::stoull(item));
      } catch (const std::exception&) {
        throw ConfigError("train.seeds entry is not an integer: " + item);
      }
    }
  }

  const std::string technique =
      to_lower(kv.get_string("augment.technique", "none"));
  if (technique == "none") cfg.augment = AugmentTechnique::kNone;
  else if (technique == "delete") cfg.augment = AugmentTechnique::kDelete;
  else if (technique == "generate") cfg.augment = AugmentTechnique::kGenerate;
  else if (technique == "both") cfg.augment = AugmentTechnique::kBoth;
  else {
    throw ConfigError(
        "augment.technique must be none, delete, generate or both, got " +
        technique);
  }
  if (kv.has("augment.wordlist"))
    cfg.wordlist_path = kv.get_string("augment.wordlist");
  if (kv.has("augment.removals"))
    cfg.removals_path = kv.get_string("augment.removals");
  if (kv.has("augment.continuations"))
    cfg.continuations_path = kv.get_string("augment.continuations");

  cfg.output_dir = kv.get_string("output.dir", cfg.output_dir);
  kv.check_unknown_keys();

  // Field-level validation.
  if (cfg.model_kind != "bilstm" && cfg.model_kind != "cnn") {
    throw ConfigError("model.kind must be bilstm or cnn, got " + cfg.model_kind);
  }
  if (!(cfg.dev_fraction > 0.0 && cfg.dev_fraction < 1.0)) {
    throw ConfigError("data.dev_fraction must lie in (0,1)");
  }
  if (cfg.train.seeds.empty()) throw ConfigError("train.seeds must be non-empty");
  if (cfg.train.epochs < 1) throw ConfigError("train.epochs must be >= 1");
  if (cfg.train.batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
  if (!(cfg.train.warmup_fraction >= 0.0 && cfg.train.warmup_fraction < 1.0)) {
    throw ConfigError("train.warmup_fraction must lie in [0,1)");
  }
  if (!(cfg.dropout_keep > 0.0 && cfg.dropout_keep <= 1.0)) {
    throw ConfigError("model.dropout_keep must lie in (0,1]");
  }
  const bool uses_deletion = cfg.augment == AugmentTechnique::kDelete ||
                             cfg.augment == AugmentTechnique::kBoth;
  const bool uses_generation = cfg.augment == AugmentTechnique::kGenerate ||
                               cfg.augment == AugmentTechnique::kBoth;
  if (uses_deletion && !cfg.wordlist_path) {
    throw ConfigError("augment.wordlist is required for the deletion technique");
  }
  if (uses_generation && !cfg.continuations_path) {
    throw ConfigError(
        "augment.continuations is required for the generation technique");
  }

  if (check_paths) {
    auto require_file = [](const std::string& field, const std::string& path) {
      if (!std::filesystem::exists(path)) {
        throw ConfigError(field + " does not exist: " + path);
      }
    };
    require_file("data.train", cfg.train_path);
    if (cfg.test_path) require_file("data.test", *cfg.test_path);
    if (cfg.embeddings_path) require_file("embed.path", *cfg.embeddings_path);
    if (cfg.wordlist_path) require_file("augment.wordlist", *cfg.wordlist_path);
    if (cfg.removals_path) require_file("augment.removals", *cfg.removals_path);
    if (cfg.continuations_path) {
      require_file("augment.continuations", *cfg.continuations_path);
    }
  }
  return cfg;
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
  return from_kv(KeyValueFile::parse_file(path), true);
}

RunConfig run_config_from_text(const std::string& text) {
  return from_kv(KeyValueFile::parse_text(text), false);
}

std::map<std::string, std::string> to_entries(const RunConfig& cfg) {
  std::map<std::string, std::string> out;
  out["data.train"] = cfg.train_path;
  if (cfg.test_path) out["data.test"] = *cfg.test_path;
  out["data.task"] = cfg.task_selector;
  out["data.dev_fraction"] = std::to_string(cfg.dev_fraction);
  out["data.split_seed"] = std::to_string(cfg.split_seed);
  out["model.kind"] = cfg.model_kind;
  out["model.hidden"] = std::to_string(cfg.hidden);
  out["model.layers"] = std::to_string(cfg.lstm_layers);
  {
    std::string widths;
    for (int w : cfg.filter_widths) {
      if (!widths.empty()) widths += ",";
      widths += std::to_string(w);
    }
    out["model.filter_widths"] = widths;
  }
  out["model.filters_per_width"] = std::to_string(cfg.filters_per_width);
  out["model.dropout_keep"] = std::to_string(cfg.dropout_keep);
  if (cfg.embeddings_path) out["embed.path"] = *cfg.embeddings_path;
  out["embed.min_freq"] = std::to_string(cfg.min_freq);
  out["embed.seed"] = std::to_string(cfg.embed_seed);
  out["train.epochs"] = std::to_string(cfg.train.epochs);
  out["train.batch_size"] = std::to_string(cfg.train.batch_size);
  out["train.base_lr"] = std::to_string(cfg.train.base_lr);
  out["train.warmup_fraction"] = std::to_string(cfg.train.warmup_fraction);
  out["train.use_lr_schedule"] = cfg.train.use_lr_schedule ? "true" : "false";
  out["train.optimizer"] =
      cfg.train.optimizer == train::Optimizer::kAdam ? "adam" : "sgd";
  {
    std::string seeds;
    for (std::uint64_t s : cfg.train.seeds) {
      if (!seeds.empty()) seeds += ",";
      seeds += std::to_string(s);
    }
    out["train.seeds"] = seeds;
  }
  switch (cfg.augment) {
    case AugmentTechnique::kNone: out["augment.technique"] = "none"; break;
    case AugmentTechnique::kDelete: out["augment.technique"] = "delete"; break;
    case AugmentTechnique::kGenerate: out["augment.technique"] = "generate"; break;
    case AugmentTechnique::kBoth: out["augment.technique"] = "both"; break;
  }
  if (cfg.wordlist_path) out["augment.wordlist"] = *cfg.wordlist_path;
  if (cfg.removals_path) out["augment.removals"] = *cfg.removals_path;
  if (cfg.continuations_path) {
    out["augment.continuations"] = *cfg.continuations_path;
  }
  out["output.dir"] = cfg.output_dir;
  return out;
}

}  // namespace offlang::config
