#pragma once

#include <string>
#include <vector>

#include "ltnlda/lda_gibbs.hpp"
#include "ltnlda/ltn_gibbs.hpp"
#include "ltnlda/tree.hpp"

namespace ltnlda {

// Label-aligned posterior means with 95% credible intervals. Mixture labels
// are permutation-symmetric across iterations, so every snapshot is aligned
// to a running reference before averaging.
struct PosteriorSummary {
  int D = 0, K = 0, V = 0, p = 0;
  std::vector<std::string> sample_ids;
  std::vector<std::string> labels;

  std::vector<double> phi;      // D x K, rows sum to one
  std::vector<double> beta_k;   // K x V, rows sum to one
  std::vector<double> beta_dk;  // D x K x V; empty for the baseline model
  std::vector<double> mu_hat;   // K x p; empty for the baseline model
  std::vector<double> tau_hat;  // K x p

  std::vector<double> phi_lo, phi_hi;
  std::vector<double> beta_k_lo, beta_k_hi;

  std::vector<std::vector<int>> snapshot_perms;

  bool has_sample_compositions() const { return !beta_dk.empty(); }

  double phi_at(int d, int k) const { return phi[static_cast<std::size_t>(d) * K + k]; }
  double beta_k_at(int k, int v) const { return beta_k[static_cast<std::size_t>(k) * V + v]; }
  double beta_dk_at(int d, int k, int v) const {
    return beta_dk[(static_cast<std::size_t>(d) * K + k) * V + v];
  }
};

// Permutation matching candidate rows to reference rows, minimizing the total
// L2 distance between matched compositions. Exhaustive for K <= 8, greedy
// beyond. aligned[k] = candidate[perm[k]].
std::vector<int> align_labels(const std::vector<double>& reference,
                              const std::vector<double>& candidate, int K, int V);

// Injection of reference slots into the rows of a candidate with at least as
// many rows; exhaustive when the search is small, greedy otherwise.
std::vector<int> align_subset(const std::vector<double>& reference, int k_ref,
                              const std::vector<double>& candidate, int k_cand, int V);

PosteriorSummary summarize_ltn(const LtnChain& chain, const PhyloTree& tree,
                               const LtnHyperparams& hyper,
                               std::vector<std::string> sample_ids,
                               std::vector<std::string> labels);

PosteriorSummary summarize_lda(const LdaChain& chain, const LdaHyperparams& hyper,
                               std::vector<std::string> sample_ids,
                               std::vector<std::string> labels);

// Mean over rows of the Euclidean distance between matched rows.
double mean_l2(const std::vector<double>& estimate, const std::vector<double>& truth, int rows,
               int cols);

// Ranked taxon indices per subcommunity: top n by composition, ties broken by
// index order.
std::vector<std::vector<int>> top_asvs(const PosteriorSummary& summary, int n);

}  // namespace ltnlda
