#include "ltnlda/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace ltnlda {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

long long parse_count(const std::string& s, int row, int col) {
  if (s.empty()) throw DataError("counts: empty cell at row " + std::to_string(row) + ", column " +
                                 std::to_string(col));
  long long value = 0;
  for (char c : s) {
    if (c < '0' || c > '9')
      throw DataError("counts: non-integer cell '" + s + "' at row " + std::to_string(row) +
                      ", column " + std::to_string(col));
    value = value * 10 + (c - '0');
  }
  return value;
}

}  // namespace

void Corpus::rebuild_tokens() {
  tokens.assign(counts.size(), {});
  for (std::size_t d = 0; d < counts.size(); ++d) {
    long long total = 0;
    for (long long c : counts[d]) total += c;
    tokens[d].reserve(static_cast<std::size_t>(total));
    for (std::size_t v = 0; v < counts[d].size(); ++v)
      for (long long i = 0; i < counts[d][v]; ++i) tokens[d].push_back(static_cast<int>(v));
  }
}

void Corpus::rebuild_counts() {
  for (std::size_t d = 0; d < counts.size(); ++d) {
    std::fill(counts[d].begin(), counts[d].end(), 0);
    for (int v : tokens[d]) ++counts[d][v];
  }
}

Corpus corpus_from_counts(std::vector<std::string> labels, std::vector<std::string> sample_ids,
                          std::vector<std::vector<long long>> counts) {
  Corpus corpus;
  corpus.labels = std::move(labels);
  corpus.sample_ids = std::move(sample_ids);
  corpus.counts = std::move(counts);
  for (const auto& row : corpus.counts)
    if (row.size() != corpus.labels.size()) throw DataError("counts row width mismatch");
  if (corpus.sample_ids.size() != corpus.counts.size())
    throw DataError("sample id count mismatch");
  corpus.rebuild_tokens();
  return corpus;
}

Corpus ingest_counts(const std::string& path, const IngestOptions& options,
                     IngestReport* report) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open counts file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw DataError("counts: empty file " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 2) throw DataError("counts: header must list at least one taxon");

  std::vector<std::string> labels(header.begin() + 1, header.end());
  std::vector<std::string> sample_ids;
  std::vector<std::vector<long long>> counts;
  int row = 1;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw DataError("counts: row " + std::to_string(row) + " has " +
                      std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(header.size()));
    sample_ids.push_back(fields[0]);
    std::vector<long long> rowvals(labels.size());
    for (std::size_t v = 0; v < labels.size(); ++v)
      rowvals[v] = parse_count(fields[v + 1], row, static_cast<int>(v + 1));
    counts.push_back(std::move(rowvals));
    ++row;
  }
  if (counts.empty()) throw DataError("counts: no sample rows in " + path);

  long long grand_total = 0;
  std::vector<long long> col_totals(labels.size(), 0);
  for (const auto& r : counts)
    for (std::size_t v = 0; v < labels.size(); ++v) {
      col_totals[v] += r[v];
      grand_total += r[v];
    }

  std::vector<int> keep;
  for (std::size_t v = 0; v < labels.size(); ++v)
    if (col_totals[v] >= options.prune_threshold) keep.push_back(static_cast<int>(v));
  if (keep.empty()) throw DataError("counts: pruning removed every taxon");

  long long kept_total = 0;
  for (int v : keep) kept_total += col_totals[v];
  if (report) {
    report->taxa_before = static_cast<int>(labels.size());
    report->taxa_after = static_cast<int>(keep.size());
    report->retained_count_fraction =
        grand_total > 0 ? static_cast<double>(kept_total) / static_cast<double>(grand_total) : 1.0;
  }

  std::vector<std::string> kept_labels;
  std::vector<std::vector<long long>> kept_counts(counts.size());
  for (int v : keep) kept_labels.push_back(labels[v]);
  for (std::size_t d = 0; d < counts.size(); ++d) {
    kept_counts[d].reserve(keep.size());
    for (int v : keep) kept_counts[d].push_back(counts[d][v]);
  }
  return corpus_from_counts(std::move(kept_labels), std::move(sample_ids), std::move(kept_counts));
}

Corpus reconcile_with_tree(const Corpus& corpus, const PhyloTree& tree) {
  std::unordered_map<std::string, int> col_of;
  for (int v = 0; v < corpus.num_taxa(); ++v) {
    if (!col_of.emplace(corpus.labels[v], v).second)
      throw DataError("counts: duplicate taxon label '" + corpus.labels[v] + "'");
  }
  const auto& leaf_labels = tree.leaf_labels();
  std::vector<int> order;
  order.reserve(leaf_labels.size());
  for (const auto& label : leaf_labels) {
    auto it = col_of.find(label);
    if (it == col_of.end())
      throw DataError("tree leaf '" + label + "' is missing from the count matrix");
    order.push_back(it->second);
  }
  if (static_cast<int>(leaf_labels.size()) != corpus.num_taxa()) {
    for (const auto& label : corpus.labels)
      if (std::find(leaf_labels.begin(), leaf_labels.end(), label) == leaf_labels.end())
        throw DataError("count matrix taxon '" + label + "' is not a tree leaf");
  }

  std::vector<std::vector<long long>> counts(corpus.num_samples());
  for (int d = 0; d < corpus.num_samples(); ++d) {
    counts[d].reserve(order.size());
    for (int v : order) counts[d].push_back(corpus.counts[d][v]);
  }
  return corpus_from_counts(leaf_labels, corpus.sample_ids, std::move(counts));
}

std::string counts_to_csv(const Corpus& corpus) {
  std::string out = "sample_id";
  for (const auto& label : corpus.labels) out += ',' + label;
  out += '\n';
  for (int d = 0; d < corpus.num_samples(); ++d) {
    out += corpus.sample_ids[d];
    for (long long c : corpus.counts[d]) out += ',' + std::to_string(c);
    out += '\n';
  }
  return out;
}

void write_counts_csv(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write counts file: " + path);
  out << counts_to_csv(corpus);
}

}  // namespace ltnlda
