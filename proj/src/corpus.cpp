#include "offlang/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "offlang/error.hpp"

namespace offlang::corpus {

namespace {

std::string to_lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool is_missing_label(const std::string& v) {
  const std::string lower = to_lower(v);
  return v.empty() || lower == "null" || lower == "nan" || lower == "na";
}

std::string task_name(Task task) {
  switch (task) {
    case Task::kA: return "A";
    case Task::kB: return "B";
    case Task::kC: return "C";
  }
  return "?";
}

// Splits one line on `delim`. When `quoted` is set, fields may be wrapped
// in double quotes with "" as the escape for an embedded quote.
std::vector<std::string> split_fields(const std::string& line, char delim,
                                      bool quoted) {
  std::vector<std::string> fields;
  std::string cur;
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted && in_quotes) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (quoted && c == '"' && cur.empty()) {
      in_quotes = true;
    } else if (c == delim) {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

std::string quote_field(const std::string& field, char delim) {
  if (delim == ',' && (field.find(',') != std::string::npos ||
                       field.find('"') != std::string::npos)) {
    std::string out = "\"";
    for (char c : field) {
      if (c == '"') out += "\"\"";
      else out.push_back(c);
    }
    out.push_back('"');
    return out;
  }
  return field;
}

struct FileLayout {
  char delim;
  bool quoted;
  std::vector<std::string> header;
  std::string id_col;
  std::string text_col;
  std::string label_col;  // column holding the requested task's label
  std::vector<std::string> all_label_cols;
};

LabeledCorpus parse_delimited(const std::string& path, const TaskSchema& schema,
                              const FileLayout& layout, std::ifstream& in) {
  std::string header_line;
  if (!std::getline(in, header_line)) {
    throw SchemaError("empty file, header row expected: " + path);
  }
  header_line = strip_cr(header_line);
  std::vector<std::string> header =
      split_fields(header_line, layout.delim, layout.quoted);

  std::unordered_map<std::string, std::size_t> col_index;
  for (std::size_t i = 0; i < header.size(); ++i) col_index[header[i]] = i;
  for (const std::string& required :
       {layout.id_col, layout.text_col, layout.label_col}) {
    if (!col_index.count(required)) {
      throw SchemaError("missing required column '" + required + "' in " +
                        path);
    }
  }
  const std::size_t id_i = col_index[layout.id_col];
  const std::size_t text_i = col_index[layout.text_col];
  const std::size_t label_i = col_index[layout.label_col];

  LabeledCorpus corpus{schema, {}};
  std::unordered_set<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    std::vector<std::string> fields =
        split_fields(line, layout.delim, layout.quoted);
    if (fields.size() <= std::max({id_i, text_i, label_i})) {
      throw ParseError("row at line " + std::to_string(line_no) + " of " +
                       path + " has " + std::to_string(fields.size()) +
                       " fields, expected at least " +
                       std::to_string(std::max({id_i, text_i, label_i}) + 1));
    }
    Sample sample{fields[id_i], fields[text_i], fields[label_i]};
    if (is_missing_label(sample.label)) continue;  // unlabeled for this task
    if (!schema.has_label(sample.label)) {
      throw DataError("unknown label '" + sample.label + "' for task " +
                      task_name(schema.task) + " in row id " + sample.id);
    }
    if (sample.id.empty()) {
      throw DataError("empty id at line " + std::to_string(line_no) + " of " +
                      path);
    }
    if (sample.raw_text.empty()) {
      throw DataError("empty text in row id " + sample.id + " of " + path);
    }
    if (!seen_ids.insert(sample.id).second) {
      throw DataError("duplicate id '" + sample.id + "' in " + path);
    }
    corpus.samples.push_back(std::move(sample));
  }
  return corpus;
}

}  // namespace

bool TaskSchema::has_label(const std::string& label) const {
  return label_index(label) >= 0;
}

int TaskSchema::label_index(const std::string& label) const {
  for (std::size_t i = 0; i < label_set.size(); ++i) {
    if (label_set[i] == label) return static_cast<int>(i);
  }
  return -1;
}

TaskSchema schema_for(Dataset dataset, Task task) {
  if (dataset == Dataset::kOlid) {
    switch (task) {
      case Task::kA: return {dataset, task, {"OFF", "NOT"}};
      case Task::kB: return {dataset, task, {"TIN", "UNT"}};
      case Task::kC: return {dataset, task, {"IND", "GRP", "OTH"}};
    }
  }
  switch (task) {
    case Task::kA: return {dataset, task, {"HOF", "NOT"}};
    case Task::kB: return {dataset, task, {"HATE", "OFFN", "PRFN", "NONE"}};
    case Task::kC:
      throw ArgumentError("HASOC 2021 has no task C");
  }
  throw ArgumentError("unknown task");
}

TaskSchema schema_from_selector(const std::string& selector) {
  const std::size_t dash = selector.find('-');
  if (dash == std::string::npos) {
    throw ArgumentError("task selector must look like 'hasoc-a' or 'olid-b', got '" +
                        selector + "'");
  }
  const std::string ds = to_lower(selector.substr(0, dash));
  const std::string tk = to_lower(selector.substr(dash + 1));
  Dataset dataset;
  if (ds == "olid") dataset = Dataset::kOlid;
  else if (ds == "hasoc" || ds == "hasoc2021") dataset = Dataset::kHasoc2021;
  else throw ArgumentError("unknown dataset '" + ds + "' in selector");
  Task task;
  if (tk == "a") task = Task::kA;
  else if (tk == "b") task = Task::kB;
  else if (tk == "c") task = Task::kC;
  else throw ArgumentError("unknown task '" + tk + "' in selector");
  return schema_for(dataset, task);
}

std::string selector_for(const TaskSchema& schema) {
  std::string out = schema.dataset == Dataset::kOlid ? "olid-" : "hasoc-";
  out += schema.task == Task::kA ? "a" : schema.task == Task::kB ? "b" : "c";
  return out;
}

LabeledCorpus parse_olid(const std::string& path, Task task) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open OLID file: " + path);
  FileLayout layout;
  layout.delim = '\t';
  layout.quoted = false;
  layout.id_col = "id";
  layout.text_col = "tweet";
  layout.label_col = task == Task::kA   ? "subtask_a"
                     : task == Task::kB ? "subtask_b"
                                        : "subtask_c";
  layout.all_label_cols = {"subtask_a", "subtask_b", "subtask_c"};
  return parse_delimited(path, schema_for(Dataset::kOlid, task), layout, in);
}

LabeledCorpus parse_hasoc(const std::string& path, Task task) {
  if (task == Task::kC) throw ArgumentError("HASOC 2021 has no task C");
  std::ifstream in(path);
  if (!in) throw IoError("cannot open HASOC file: " + path);
  std::string header_line;
  if (!std::getline(in, header_line)) {
    throw SchemaError("empty file, header row expected: " + path);
  }
  const char delim =
      header_line.find('\t') != std::string::npos ? '\t' : ',';
  in.clear();
  in.seekg(0);
  FileLayout layout;
  layout.delim = delim;
  layout.quoted = delim == ',';
  layout.id_col = "_id";
  layout.text_col = "text";
  layout.label_col = task == Task::kA ? "task_1" : "task_2";
  layout.all_label_cols = {"task_1", "task_2"};
  return parse_delimited(path, schema_for(Dataset::kHasoc2021, task), layout,
                         in);
}

LabeledCorpus parse_corpus(const std::string& path, const TaskSchema& schema) {
  return schema.dataset == Dataset::kOlid ? parse_olid(path, schema.task)
                                          : parse_hasoc(path, schema.task);
}

DevSplit split_dev(const LabeledCorpus& corpus, double fraction,
                   std::uint64_t seed) {
  if (corpus.empty()) throw ArgumentError("cannot split an empty corpus");
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw ArgumentError("dev fraction must lie in (0,1), got " +
                        std::to_string(fraction));
  }
  const std::size_t n = corpus.size();
  const auto dev_n = static_cast<std::size_t>(
      std::llround(fraction * static_cast<double>(n)));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<bool> in_dev(n, false);
  for (std::size_t i = 0; i < dev_n; ++i) in_dev[order[i]] = true;

  DevSplit split{{corpus.schema, {}}, {corpus.schema, {}}};
  for (std::size_t i = 0; i < n; ++i) {
    (in_dev[i] ? split.dev : split.train).samples.push_back(corpus.samples[i]);
  }
  return split;
}

void write_corpus(const LabeledCorpus& corpus, const std::string& path,
                  const std::vector<std::string>& provenance) {
  if (!provenance.empty() && provenance.size() != corpus.size()) {
    throw ArgumentError("provenance column size does not match corpus size");
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write corpus file: " + path);

  const bool olid = corpus.schema.dataset == Dataset::kOlid;
  const char delim = olid ? '\t' : ',';
  std::vector<std::string> header =
      olid ? std::vector<std::string>{"id", "tweet", "subtask_a", "subtask_b",
                                      "subtask_c"}
           : std::vector<std::string>{"_id", "text", "task_1", "task_2"};
  std::size_t label_col;
  if (olid) {
    label_col = corpus.schema.task == Task::kA   ? 2
                : corpus.schema.task == Task::kB ? 3
                                                 : 4;
  } else {
    label_col = corpus.schema.task == Task::kA ? 2 : 3;
  }
  if (!provenance.empty()) header.push_back("provenance");
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out << delim;
    out << header[i];
  }
  out << '\n';

  for (std::size_t s = 0; s < corpus.size(); ++s) {
    const Sample& sample = corpus.samples[s];
    std::vector<std::string> row(olid ? 5 : 4, "NULL");
    row[0] = sample.id;
    row[1] = sample.raw_text;
    row[label_col] = sample.label;
    if (!provenance.empty()) row.push_back(provenance[s]);
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << delim;
      out << quote_field(row[i], delim);
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing corpus file: " + path);
}

}  // namespace offlang::corpus
