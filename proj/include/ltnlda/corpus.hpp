#pragma once

#include <string>
#include <vector>

#include "ltnlda/common.hpp"
#include "ltnlda/tree.hpp"

namespace ltnlda {

// ASV count data for D samples over a shared vocabulary of V taxa. Tokens are
// the unrolled reads of the count matrix, one entry per read, in deterministic
// (taxon-major) order within each sample.
struct Corpus {
  std::vector<std::string> labels;               // V taxon labels
  std::vector<std::string> sample_ids;           // D sample names
  std::vector<std::vector<long long>> counts;    // D x V
  std::vector<std::vector<int>> tokens;          // per sample, length N_d

  int num_samples() const { return static_cast<int>(counts.size()); }
  int num_taxa() const { return static_cast<int>(labels.size()); }
  long long sample_total(int d) const { return static_cast<long long>(tokens[d].size()); }
  long long total_tokens() const {
    long long n = 0;
    for (const auto& t : tokens) n += static_cast<long long>(t.size());
    return n;
  }

  void rebuild_tokens();
  void rebuild_counts();  // from tokens, e.g. after a harness rewrites reads
};

Corpus corpus_from_counts(std::vector<std::string> labels, std::vector<std::string> sample_ids,
                          std::vector<std::vector<long long>> counts);

struct IngestOptions {
  long long prune_threshold = 0;  // drop taxa whose corpus-wide total is below this
};

struct IngestReport {
  int taxa_before = 0;
  int taxa_after = 0;
  double retained_count_fraction = 1.0;
};

// Counts CSV: header "sample_id,<taxon>,..."; one row per sample with
// nonnegative integer cells.
Corpus ingest_counts(const std::string& path, const IngestOptions& options = {},
                     IngestReport* report = nullptr);

// Reorder corpus columns to the tree's leaf order, matching by label.
// Missing or extra labels are an error naming the offender.
Corpus reconcile_with_tree(const Corpus& corpus, const PhyloTree& tree);

std::string counts_to_csv(const Corpus& corpus);
void write_counts_csv(const Corpus& corpus, const std::string& path);

}  // namespace ltnlda
