#pragma once

#include <cstdint>
#include <vector>

#include "ltnlda/corpus.hpp"
#include "ltnlda/polya_gamma.hpp"
#include "ltnlda/rng.hpp"
#include "ltnlda/tree.hpp"

namespace ltnlda {

// Full prior configuration of the tree-normal mixed-membership model.
struct LtnHyperparams {
  int K = 1;           // number of subcommunities
  int C = 1;           // leaf-count threshold splitting upper and lower tree
  double alpha = 1.0;  // symmetric Dirichlet concentration on abundances
  std::vector<double> mu0;      // prior mean of subcommunity log-odds; empty = zeros
  std::vector<double> lambda0;  // diagonal prior variance; empty = ones
  double a1 = 1e4;     // inverse-gamma shape, upper tree
  double a2 = 10.0;    // inverse-gamma shape, lower tree
  double b = 10.0;     // inverse-gamma rate

  // Fills defaults to length p and checks positivity constraints.
  void validate_and_expand(int p);
};

struct ChainConfig {
  int iterations = 2000;
  int burn_in = 1000;
  int thin = 10;
  std::uint64_t seed = 1;
  int pg_threshold = 30;     // count at which the PG draw switches to normal
  bool fixed_global = false; // hold mu_k and tau_k fixed (test-set scoring)
  int threads = 1;

  void validate() const;
  int num_snapshots() const { return (iterations - burn_in + thin - 1) / thin; }
};

struct LtnSnapshot {
  int iteration = 0;
  std::vector<int> y_root;    // D x K root counts
  std::vector<double> psi;    // D x K x p
  std::vector<double> mu;     // K x p
  std::vector<double> tau;    // K x p
  double log_joint = 0.0;
};

struct LtnChain {
  int D = 0, K = 0, p = 0;
  std::vector<long long> sample_totals;
  std::vector<LtnSnapshot> snapshots;
  std::vector<double> log_joint_trace;  // every sweep
  std::vector<double> sweep_seconds;    // every sweep
  double total_seconds = 0.0;
};

// Collapsed blocked Gibbs sampler. Subcommunity abundances are integrated
// out; one sweep cycles assignments -> PG auxiliaries -> per-sample log-odds
// -> subcommunity means -> subcommunity variances. The per-sample phases use
// independent streams derived from (seed, sweep, sample), so sweeps are
// reproducible for a given seed regardless of the thread count.
class LtnSampler {
 public:
  LtnSampler(const Corpus& corpus, const PhyloTree& tree, LtnHyperparams hyper,
             ChainConfig config);

  void init();
  // Install fixed global parameters (flat K x p); used before init() in
  // test-set mode and by harnesses.
  void set_global(std::vector<double> mu, std::vector<double> tau);

  void sweep(int t);

  // Individual conditional updates, exposed for correctness harnesses.
  void update_assignments(int t);
  void update_auxiliaries(int t);
  void update_logodds(int t);
  void update_means(Rng& rng);
  void update_variances(Rng& rng);

  double log_joint() const;
  LtnSnapshot snapshot(int t) const;

  // Conditional assignment probabilities for one token, without sampling.
  std::vector<double> assignment_probabilities(int d, int n) const;

  // Rebuild per-node counts from assignments and tokens (used after a harness
  // rewrites the data); throws if the incremental counts ever drift.
  void rebuild_counts();
  void check_counts() const;

  int D() const { return D_; }
  int K() const { return hyper_.K; }
  int p() const { return p_; }
  int nodes() const { return nodes_; }
  const std::vector<std::vector<int>>& assignments() const { return z_; }
  std::vector<std::vector<int>>& assignments_mut() { return z_; }
  const std::vector<int>& node_counts() const { return y_; }
  const std::vector<double>& logodds() const { return psi_; }
  std::vector<double>& logodds_mut() { return psi_; }
  const std::vector<double>& auxiliaries() const { return v_; }
  std::vector<double>& auxiliaries_mut() { return v_; }
  const std::vector<double>& means() const { return mu_; }
  const std::vector<double>& variances() const { return tau_; }
  Corpus& corpus_mut() { return corpus_; }
  const Corpus& corpus() const { return corpus_; }
  const PhyloTree& tree() const { return tree_; }
  const LtnHyperparams& hyper() const { return hyper_; }
  const ChainConfig& config() const { return config_; }

  int y_at(int d, int k, int node_id) const { return y_[(d * hyper_.K + k) * nodes_ + node_id]; }
  double psi_at(int d, int k, int i) const { return psi_[(d * hyper_.K + k) * p_ + i]; }

 private:
  void update_sample_assignments(int d, Rng& rng);
  void update_sample_auxiliaries(int d, Rng& rng);
  void update_sample_logodds(int d, Rng& rng);

  Corpus corpus_;
  const PhyloTree& tree_;
  LtnHyperparams hyper_;
  ChainConfig config_;
  NodePartition partition_;
  PolyaGammaSampler pg_;

  int D_ = 0, p_ = 0, nodes_ = 0;
  std::vector<std::vector<int>> z_;
  std::vector<int> y_;       // D x K x nodes, indexed by node id
  std::vector<double> psi_;  // D x K x p
  std::vector<double> v_;    // D x K x p
  std::vector<double> mu_;   // K x p
  std::vector<double> tau_;  // K x p
};

LtnChain run_ltn_chain(const Corpus& corpus, const PhyloTree& tree, const LtnHyperparams& hyper,
                       const ChainConfig& config,
                       const std::vector<double>* fixed_mu = nullptr,
                       const std::vector<double>* fixed_tau = nullptr);

}  // namespace ltnlda
