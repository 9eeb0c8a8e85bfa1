#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ltnlda/corpus.hpp"
#include "ltnlda/lda_gibbs.hpp"
#include "ltnlda/ltn_gibbs.hpp"
#include "ltnlda/tree.hpp"

namespace ltnlda {

enum class TreeShape { kBalanced, kCaterpillar, kRandom };

TreeShape tree_shape_from_string(const std::string& name);
std::string to_string(TreeShape shape);

// Deterministic binary tree over V leaves labeled t1..tV (left to right).
PhyloTree generate_tree(int V, TreeShape shape, std::uint64_t seed = 0);

struct LtnGroundTruth {
  int D = 0, K = 0, V = 0, p = 0;
  std::vector<double> phi;      // D x K
  std::vector<double> psi;      // D x K x p
  std::vector<double> mu;       // K x p
  std::vector<double> tau;      // K x p
  std::vector<double> beta_k;   // K x V, from mu
  std::vector<double> beta_dk;  // D x K x V, from psi
  std::vector<std::vector<int>> z;
  std::vector<long long> y;     // D x K x (2V-1) node counts
};

struct LtnSimOptions {
  int D = 1;
  long long tokens_per_sample = 0;
  std::uint64_t seed = 1;
  // Collapse the per-sample variation entirely: tau is forced to zero so the
  // sample compositions coincide with the subcommunity centroids.
  bool knockout_zero_tau = false;
  // When set, subcommunity means/variances are not drawn from the prior but
  // taken as given (used to generate matched test sets).
  const std::vector<double>* fixed_mu = nullptr;
  const std::vector<double>* fixed_tau = nullptr;
};

std::pair<Corpus, LtnGroundTruth> generate_ltn_corpus(const PhyloTree& tree,
                                                      const LtnHyperparams& hyper,
                                                      const LtnSimOptions& options);

struct LdaGroundTruth {
  int D = 0, K = 0, V = 0;
  std::vector<double> phi;     // D x K
  std::vector<double> beta_k;  // K x V
  std::vector<std::vector<int>> z;
};

std::pair<Corpus, LdaGroundTruth> generate_lda_corpus(const LdaHyperparams& hyper, int V, int D,
                                                      long long tokens_per_sample,
                                                      std::uint64_t seed);

}  // namespace ltnlda
