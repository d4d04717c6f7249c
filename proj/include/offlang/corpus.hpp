#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace offlang::corpus {

enum class Dataset { kOlid, kHasoc2021 };
enum class Task { kA, kB, kC };

struct TaskSchema {
  Dataset dataset;
  Task task;
  std::vector<std::string> label_set;  // ordered

  bool has_label(const std::string& label) const;
  int label_index(const std::string& label) const;  // -1 when absent
};

// OLID A = {OFF, NOT}; OLID B = {TIN, UNT}; OLID C = {IND, GRP, OTH};
// HASOC A = {HOF, NOT}; HASOC B = {HATE, OFFN, PRFN, NONE}.
TaskSchema schema_for(Dataset dataset, Task task);

// Parses a "<dataset>-<task>" selector such as "hasoc-a" or "olid-c".
TaskSchema schema_from_selector(const std::string& selector);
std::string selector_for(const TaskSchema& schema);

struct Sample {
  std::string id;
  std::string raw_text;
  std::string label;
};

struct LabeledCorpus {
  TaskSchema schema;
  std::vector<Sample> samples;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
};

// Reads an OLID training file: tab-separated with a header row naming
// id, tweet and subtask_a/b/c columns. Rows whose requested task label
// is empty or NULL are dropped. Duplicate ids are a hard error.
LabeledCorpus parse_olid(const std::string& path, Task task);

// Reads a HASOC 2021 file with columns _id, text, task_1, task_2.
// Comma- or tab-separated, auto-detected from the header line; comma
// files may quote fields RFC-4180 style. Task A reads task_1, task B
// reads task_2.
LabeledCorpus parse_hasoc(const std::string& path, Task task);

// Dispatches on schema.dataset.
LabeledCorpus parse_corpus(const std::string& path, const TaskSchema& schema);

struct DevSplit {
  LabeledCorpus train;
  LabeledCorpus dev;
};

// Uniform-random split by sample: |dev| = round(fraction * |corpus|),
// deterministic for a fixed seed. train and dev partition the input.
DevSplit split_dev(const LabeledCorpus& corpus, double fraction,
                   std::uint64_t seed);

// Writes a corpus back in its dataset's file format (identical header;
// unparsed task columns hold NULL). An optional provenance column is
// appended when `provenance` is non-empty; it must then have one entry
// per sample.
void write_corpus(const LabeledCorpus& corpus, const std::string& path,
                  const std::vector<std::string>& provenance = {});

}  // namespace offlang::corpus
