#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ltnlda/corpus.hpp"
#include "ltnlda/lda_gibbs.hpp"
#include "ltnlda/ltn_gibbs.hpp"
#include "ltnlda/tree.hpp"

namespace ltnlda {

// Deterministic half split of one sample's reads: even positions are fitted,
// odd positions are scored.
struct SplitSample {
  std::vector<int> fit_half;
  std::vector<int> score_half;
};

SplitSample split_document(const std::vector<int>& tokens);

struct PerplexityResult {
  std::vector<double> loglik;        // per test sample
  std::vector<long long> tokens;     // scored reads per test sample
  double total_loglik = 0.0;
  long long total_tokens = 0;
  double perplexity = 0.0;
  int mc_iterations = 0;  // kept Gibbs iterates per sample

  void finalize();
};

// Document-completion scoring: a chain constrained to the trained global
// parameters runs on the fitted half of each test sample; the held-out half
// is scored by the Monte Carlo average of its per-read predictive
// log-probability over the kept iterates.
PerplexityResult perplexity_ltn(const std::vector<double>& trained_mu,
                                const std::vector<double>& trained_tau,
                                const Corpus& test_corpus, const PhyloTree& tree,
                                const LtnHyperparams& hyper, const ChainConfig& config,
                                int threads = 1);

PerplexityResult perplexity_lda(const std::vector<double>& trained_beta,
                                const Corpus& test_corpus, const LdaHyperparams& hyper,
                                const ChainConfig& config, int threads = 1);

// Index of the first grid point after which the relative improvement of the
// mean curve drops below tol; the last index if the curve never flattens.
int inflection_index(const std::vector<double>& means, double tol);

struct CvCell {
  int K = 0;
  int C = 0;
  int fold = 0;
  double perplexity = 0.0;
  double loglik = 0.0;
  long long tokens = 0;
};

struct CvCurvePoint {
  int K = 0;
  int C = 0;
  double mean = 0.0;
  double se = 0.0;
  int folds = 0;
};

struct CvOptions {
  std::vector<int> k_grid;
  std::vector<int> c_grid;
  int folds = 4;
  std::string model = "ltn";  // "ltn" or "lda" (the latter ignores the C grid)
  double lda_gamma = 1.0;
  LtnHyperparams base;      // K and C are replaced cell by cell
  ChainConfig fit_config;   // per-cell training chain
  ChainConfig eval_config;  // per-test-sample scoring chain
  std::uint64_t seed = 1;
  int threads = 1;
  double inflection_tol = 0.01;
};

struct CvResult {
  std::vector<CvCell> cells;
  std::vector<CvCurvePoint> curves;        // mean +- se over folds per (K, C)
  std::vector<std::pair<int, int>> c_inflection_per_k;  // (K, flagged C)
  int c_star = 0;   // consensus flagged C across the K curves
  int k_star = 0;   // flagged K on the curve at C = c_star
  std::vector<std::vector<int>> fold_assignment;  // sample indices per fold
};

CvResult cv_grid(const Corpus& corpus, const PhyloTree& tree, const CvOptions& options);

}  // namespace ltnlda
