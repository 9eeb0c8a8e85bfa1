#pragma once

#include <vector>

#include "ltnlda/corpus.hpp"
#include "ltnlda/ltn_gibbs.hpp"
#include "ltnlda/rng.hpp"

namespace ltnlda {

struct LdaHyperparams {
  int K = 1;
  double alpha = 1.0;  // sample-subcommunity Dirichlet
  double gamma = 1.0;  // subcommunity-taxon Dirichlet

  void validate() const {
    if (K < 1) throw ConfigError("K must be >= 1");
    if (!(alpha > 0.0)) throw ConfigError("alpha must be positive");
    if (!(gamma > 0.0)) throw ConfigError("gamma must be positive");
  }
};

struct LdaSnapshot {
  int iteration = 0;
  std::vector<int> n_dk;  // D x K
  std::vector<int> n_kv;  // K x V
  double log_joint = 0.0;
};

struct LdaChain {
  int D = 0, K = 0, V = 0;
  std::vector<long long> sample_totals;
  std::vector<LdaSnapshot> snapshots;
  std::vector<double> log_joint_trace;
  double total_seconds = 0.0;
};

// Fully collapsed Gibbs sampler for the Dirichlet-multinomial mixed-membership
// baseline: both the abundances and the compositions are integrated out and
// only token assignments are sampled. Counts are corpus-global, so a chain is
// single-threaded; run independent chains concurrently instead.
class LdaSampler {
 public:
  LdaSampler(const Corpus& corpus, LdaHyperparams hyper, ChainConfig config);

  void init();
  void sweep(int t);
  // Assignment pass with compositions held fixed at `beta` (K x V row-major);
  // used for test-set scoring.
  void sweep_fixed_beta(int t, const std::vector<double>& beta);

  double log_joint() const;
  LdaSnapshot snapshot(int t) const;
  std::vector<double> assignment_probabilities(int d, int n) const;

  void rebuild_counts();
  void check_counts() const;

  int D() const { return D_; }
  int K() const { return hyper_.K; }
  int V() const { return V_; }
  const std::vector<std::vector<int>>& assignments() const { return z_; }
  std::vector<std::vector<int>>& assignments_mut() { return z_; }
  const std::vector<int>& doc_counts() const { return n_dk_; }
  const std::vector<int>& word_counts() const { return n_kv_; }
  const std::vector<int>& topic_totals() const { return n_k_; }
  Corpus& corpus_mut() { return corpus_; }
  const Corpus& corpus() const { return corpus_; }
  const LdaHyperparams& hyper() const { return hyper_; }

 private:
  void update_sample(int d, Rng& rng, const std::vector<double>* fixed_beta);

  Corpus corpus_;
  LdaHyperparams hyper_;
  ChainConfig config_;
  int D_ = 0, V_ = 0;
  std::vector<std::vector<int>> z_;
  std::vector<int> n_dk_, n_kv_, n_k_;
};

LdaChain run_lda_chain(const Corpus& corpus, const LdaHyperparams& hyper,
                       const ChainConfig& config,
                       const std::vector<double>* fixed_beta = nullptr);

}  // namespace ltnlda
