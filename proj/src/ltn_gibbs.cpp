#include "ltnlda/ltn_gibbs.hpp"

#include <chrono>
#include <cmath>

#include "ltnlda/parallel.hpp"

namespace ltnlda {

namespace {

constexpr double kTauFloor = 1e-12;

// Stream tags keep the per-sample, global and init streams disjoint.
constexpr std::uint64_t kInitTag = 0xa5a5a5a5ULL;
constexpr std::uint64_t kGlobalTag = 0xffffffffULL;

double approx_gamma_median(double shape) {
  // Wilson-Hilferty; good to well under a percent for shape >= 1.
  const double u = 1.0 - 1.0 / (9.0 * shape);
  return shape * u * u * u;
}

}  // namespace

void LtnHyperparams::validate_and_expand(int p) {
  if (K < 1) throw ConfigError("K must be >= 1");
  if (C < 1) throw ConfigError("C must be >= 1");
  if (!(alpha > 0.0)) throw ConfigError("alpha must be positive");
  if (!(a1 > 0.0) || !(a2 > 0.0) || !(b > 0.0))
    throw ConfigError("inverse-gamma hyperparameters must be positive");
  if (mu0.empty()) mu0.assign(p, 0.0);
  if (lambda0.empty()) lambda0.assign(p, 1.0);
  if (static_cast<int>(mu0.size()) != p || static_cast<int>(lambda0.size()) != p)
    throw ConfigError("mu0/lambda0 must have one entry per internal node");
  for (double l : lambda0)
    if (!(l > 0.0)) throw ConfigError("lambda0 entries must be positive");
}

void ChainConfig::validate() const {
  if (burn_in < 0) throw ConfigError("burn_in must be >= 0");
  if (iterations <= burn_in) throw ConfigError("iterations must exceed burn_in");
  if (thin < 1) throw ConfigError("thin must be >= 1");
  if (pg_threshold < 1) throw ConfigError("pg_threshold must be >= 1");
  if (threads < 1) throw ConfigError("threads must be >= 1");
}

LtnSampler::LtnSampler(const Corpus& corpus, const PhyloTree& tree, LtnHyperparams hyper,
                       ChainConfig config)
    : corpus_(corpus),
      tree_(tree),
      hyper_(std::move(hyper)),
      config_(config),
      pg_(config.pg_threshold) {
  config_.validate();
  if (corpus_.num_samples() == 0) throw ConfigError("corpus has no samples");
  if (corpus_.num_taxa() != tree_.num_leaves())
    throw DataError("corpus has " + std::to_string(corpus_.num_taxa()) + " taxa, tree has " +
                    std::to_string(tree_.num_leaves()) + " leaves");
  D_ = corpus_.num_samples();
  p_ = tree_.num_internal();
  nodes_ = tree_.num_nodes();
  hyper_.validate_and_expand(p_);
  partition_ = partition_nodes(tree_, hyper_.C);

  z_.resize(D_);
  y_.assign(static_cast<std::size_t>(D_) * hyper_.K * nodes_, 0);
  psi_.assign(static_cast<std::size_t>(D_) * hyper_.K * p_, 0.0);
  v_.assign(psi_.size(), 0.0);
  mu_.assign(static_cast<std::size_t>(hyper_.K) * p_, 0.0);
  tau_.assign(mu_.size(), 1.0);
}

void LtnSampler::set_global(std::vector<double> mu, std::vector<double> tau) {
  if (mu.size() != mu_.size() || tau.size() != tau_.size())
    throw ConfigError("fixed global parameters have the wrong shape");
  mu_ = std::move(mu);
  tau_ = std::move(tau);
  for (double& t : tau_) t = std::max(t, kTauFloor);
}

void LtnSampler::init() {
  Rng rng(mix_seed(config_.seed, kInitTag));
  const int K = hyper_.K;

  if (!config_.fixed_global) {
    for (int k = 0; k < K; ++k)
      for (int i = 0; i < p_; ++i)
        mu_[k * p_ + i] = rng.normal(hyper_.mu0[i], std::sqrt(hyper_.lambda0[i]));
    const double tau_upper = hyper_.b / approx_gamma_median(hyper_.a1);
    const double tau_lower = hyper_.b / approx_gamma_median(hyper_.a2);
    for (int k = 0; k < K; ++k)
      for (int i = 0; i < p_; ++i)
        tau_[k * p_ + i] = partition_.upper[i] ? tau_upper : tau_lower;
  }

  for (int d = 0; d < D_; ++d) {
    z_[d].resize(corpus_.tokens[d].size());
    for (auto& zk : z_[d]) zk = static_cast<int>(rng.uniform_int(K));
  }
  rebuild_counts();

  for (int d = 0; d < D_; ++d)
    for (int k = 0; k < K; ++k)
      for (int i = 0; i < p_; ++i) {
        const double m = config_.fixed_global ? mu_[k * p_ + i] : hyper_.mu0[i];
        const double s =
            config_.fixed_global ? std::sqrt(tau_[k * p_ + i]) : std::sqrt(hyper_.lambda0[i]);
        psi_[(static_cast<std::size_t>(d) * K + k) * p_ + i] = rng.normal(m, s);
      }
  std::fill(v_.begin(), v_.end(), 0.0);
}

void LtnSampler::rebuild_counts() {
  std::fill(y_.begin(), y_.end(), 0);
  const int K = hyper_.K;
  for (int d = 0; d < D_; ++d) {
    int* base = y_.data() + static_cast<std::size_t>(d) * K * nodes_;
    for (std::size_t n = 0; n < corpus_.tokens[d].size(); ++n) {
      int* yk = base + static_cast<std::size_t>(z_[d][n]) * nodes_;
      for (int id : tree_.leaf_path_nodes(corpus_.tokens[d][n])) ++yk[id];
    }
  }
}

void LtnSampler::check_counts() const {
  const int K = hyper_.K;
  for (int d = 0; d < D_; ++d) {
    long long root_total = 0;
    for (int k = 0; k < K; ++k) {
      const int* yk = y_.data() + (static_cast<std::size_t>(d) * K + k) * nodes_;
      root_total += yk[tree_.root()];
      for (int i = 0; i < p_; ++i) {
        const TreeNode& node = tree_.node(tree_.internal_id(i));
        if (yk[tree_.internal_id(i)] != yk[node.left] + yk[node.right])
          throw NumericalError("node count additivity violated");
      }
    }
    if (root_total != static_cast<long long>(corpus_.tokens[d].size()))
      throw NumericalError("root counts do not sum to the sample total");
  }
}

void LtnSampler::update_sample_assignments(int d, Rng& rng) {
  const int K = hyper_.K;
  const auto& toks = corpus_.tokens[d];
  if (toks.empty()) return;
  auto& zd = z_[d];
  int* ybase = y_.data() + static_cast<std::size_t>(d) * K * nodes_;
  const double* psibase = psi_.data() + static_cast<std::size_t>(d) * K * p_;
  const int root = tree_.root();
  const double alpha = hyper_.alpha;

  // The split probabilities are fixed for the whole pass over this sample.
  std::vector<double> ecache(static_cast<std::size_t>(K) * p_);
  for (int k = 0; k < K; ++k)
    for (int i = 0; i < p_; ++i) ecache[k * p_ + i] = expit(psibase[k * p_ + i]);

  std::vector<double> weights(K);
  for (std::size_t n = 0; n < toks.size(); ++n) {
    const int leaf = toks[n];
    const auto& path_nodes = tree_.leaf_path_nodes(leaf);
    const auto& steps = tree_.leaf_path(leaf);

    int* yold = ybase + static_cast<std::size_t>(zd[n]) * nodes_;
    for (int id : path_nodes) --yold[id];

    double total = 0.0;
    for (int k = 0; k < K; ++k) {
      const double* ec = ecache.data() + static_cast<std::size_t>(k) * p_;
      double leaf_prob = 1.0;
      for (const PathStep& s : steps)
        leaf_prob *= s.left ? ec[s.internal_index] : 1.0 - ec[s.internal_index];
      weights[k] = (ybase[static_cast<std::size_t>(k) * nodes_ + root] + alpha) * leaf_prob;
      total += weights[k];
    }

    int knew;
    if (total > 0.0 && std::isfinite(total)) {
      const double u = rng.uniform() * total;
      double acc = 0.0;
      knew = K - 1;
      for (int k = 0; k < K - 1; ++k) {
        acc += weights[k];
        if (u < acc) {
          knew = k;
          break;
        }
      }
    } else {
      // All leaf probabilities underflowed; redo the weights in log space.
      double best = -HUGE_VAL;
      for (int k = 0; k < K; ++k) {
        const double* pk = psibase + static_cast<std::size_t>(k) * p_;
        double lp = 0.0;
        for (const PathStep& s : steps)
          lp += s.left ? -log1p_exp(-pk[s.internal_index]) : -log1p_exp(pk[s.internal_index]);
        weights[k] =
            std::log(ybase[static_cast<std::size_t>(k) * nodes_ + root] + alpha) + lp;
        best = std::max(best, weights[k]);
      }
      double norm = 0.0;
      for (int k = 0; k < K; ++k) {
        weights[k] = std::exp(weights[k] - best);
        norm += weights[k];
      }
      const double u = rng.uniform() * norm;
      double acc = 0.0;
      knew = K - 1;
      for (int k = 0; k < K - 1; ++k) {
        acc += weights[k];
        if (u < acc) {
          knew = k;
          break;
        }
      }
    }

    zd[n] = knew;
    int* ynew = ybase + static_cast<std::size_t>(knew) * nodes_;
    for (int id : path_nodes) ++ynew[id];
  }
}

std::vector<double> LtnSampler::assignment_probabilities(int d, int n) const {
  const int K = hyper_.K;
  const int leaf = corpus_.tokens[d][n];
  const auto& steps = tree_.leaf_path(leaf);
  const int* ybase = y_.data() + static_cast<std::size_t>(d) * K * nodes_;
  const double* psibase = psi_.data() + static_cast<std::size_t>(d) * K * p_;
  const int kcur = z_[d][n];

  std::vector<double> probs(K);
  double total = 0.0;
  for (int k = 0; k < K; ++k) {
    const double* pk = psibase + static_cast<std::size_t>(k) * p_;
    double leaf_prob = 1.0;
    for (const PathStep& s : steps) {
      const double e = expit(pk[s.internal_index]);
      leaf_prob *= s.left ? e : 1.0 - e;
    }
    const int root_count =
        ybase[static_cast<std::size_t>(k) * nodes_ + tree_.root()] - (k == kcur ? 1 : 0);
    probs[k] = (root_count + hyper_.alpha) * leaf_prob;
    total += probs[k];
  }
  for (double& w : probs) w /= total;
  return probs;
}

void LtnSampler::update_sample_auxiliaries(int d, Rng& rng) {
  const int K = hyper_.K;
  const int* ybase = y_.data() + static_cast<std::size_t>(d) * K * nodes_;
  const std::size_t off = static_cast<std::size_t>(d) * K * p_;
  for (int k = 0; k < K; ++k)
    for (int i = 0; i < p_; ++i) {
      const int count = ybase[static_cast<std::size_t>(k) * nodes_ + tree_.internal_id(i)];
      v_[off + k * p_ + i] =
          count == 0 ? 0.0 : pg_.sample(count, psi_[off + k * p_ + i], rng);
    }
}

void LtnSampler::update_sample_logodds(int d, Rng& rng) {
  const int K = hyper_.K;
  const int* ybase = y_.data() + static_cast<std::size_t>(d) * K * nodes_;
  const std::size_t off = static_cast<std::size_t>(d) * K * p_;
  for (int k = 0; k < K; ++k)
    for (int i = 0; i < p_; ++i) {
      const int id = tree_.internal_id(i);
      const int* yk = ybase + static_cast<std::size_t>(k) * nodes_;
      const double kappa = yk[tree_.node(id).left] - 0.5 * yk[id];
      const double tau = tau_[k * p_ + i];
      const double prec = 1.0 / tau + v_[off + k * p_ + i];
      const double var = 1.0 / prec;
      const double mean = var * (mu_[k * p_ + i] / tau + kappa);
      psi_[off + k * p_ + i] = rng.normal(mean, std::sqrt(var));
    }
}

void LtnSampler::update_assignments(int t) {
  parallel_for(D_, config_.threads,
               [&](int d) {
                 Rng rng(mix_seed(config_.seed, static_cast<std::uint64_t>(t) * 4 + 1, d));
                 update_sample_assignments(d, rng);
               });
}

void LtnSampler::update_auxiliaries(int t) {
  parallel_for(D_, config_.threads,
               [&](int d) {
                 Rng rng(mix_seed(config_.seed, static_cast<std::uint64_t>(t) * 4 + 2, d));
                 update_sample_auxiliaries(d, rng);
               });
}

void LtnSampler::update_logodds(int t) {
  parallel_for(D_, config_.threads,
               [&](int d) {
                 Rng rng(mix_seed(config_.seed, static_cast<std::uint64_t>(t) * 4 + 3, d));
                 update_sample_logodds(d, rng);
               });
}

void LtnSampler::update_means(Rng& rng) {
  const int K = hyper_.K;
  for (int k = 0; k < K; ++k)
    for (int i = 0; i < p_; ++i) {
      double sum_psi = 0.0;
      for (int d = 0; d < D_; ++d) sum_psi += psi_[(static_cast<std::size_t>(d) * K + k) * p_ + i];
      const double tau = tau_[k * p_ + i];
      const double prec = 1.0 / hyper_.lambda0[i] + D_ / tau;
      const double var = 1.0 / prec;
      const double mean = var * (hyper_.mu0[i] / hyper_.lambda0[i] + sum_psi / tau);
      mu_[k * p_ + i] = rng.normal(mean, std::sqrt(var));
    }
}

void LtnSampler::update_variances(Rng& rng) {
  const int K = hyper_.K;
  for (int k = 0; k < K; ++k)
    for (int i = 0; i < p_; ++i) {
      double ss = 0.0;
      for (int d = 0; d < D_; ++d) {
        const double r = psi_[(static_cast<std::size_t>(d) * K + k) * p_ + i] - mu_[k * p_ + i];
        ss += r * r;
      }
      const double shape = (partition_.upper[i] ? hyper_.a1 : hyper_.a2) + 0.5 * D_;
      const double rate = hyper_.b + 0.5 * ss;
      tau_[k * p_ + i] = std::max(rng.inverse_gamma(shape, rate), kTauFloor);
    }
}

void LtnSampler::sweep(int t) {
  update_assignments(t);
  update_auxiliaries(t);
  update_logodds(t);
  if (!config_.fixed_global) {
    Rng rng(mix_seed(config_.seed, static_cast<std::uint64_t>(t) * 4, kGlobalTag));
    update_means(rng);
    update_variances(rng);
  }
}

double LtnSampler::log_joint() const {
  const int K = hyper_.K;
  const double alpha = hyper_.alpha;
  double total = 0.0;

  for (int d = 0; d < D_; ++d) {
    const long long nd = static_cast<long long>(corpus_.tokens[d].size());
    total += std::lgamma(K * alpha) - std::lgamma(nd + K * alpha) - K * std::lgamma(alpha);
    for (int k = 0; k < K; ++k)
      total += std::lgamma(y_[(static_cast<std::size_t>(d) * K + k) * nodes_ + tree_.root()] +
                           alpha);
  }

  for (int d = 0; d < D_; ++d)
    for (int k = 0; k < K; ++k) {
      const int* yk = y_.data() + (static_cast<std::size_t>(d) * K + k) * nodes_;
      const double* pk = psi_.data() + (static_cast<std::size_t>(d) * K + k) * p_;
      for (int i = 0; i < p_; ++i) {
        const int id = tree_.internal_id(i);
        if (yk[id] == 0) continue;
        total += yk[tree_.node(id).left] * pk[i] - yk[id] * log1p_exp(pk[i]);
      }
    }

  for (int d = 0; d < D_; ++d)
    for (int k = 0; k < K; ++k)
      for (int i = 0; i < p_; ++i) {
        const double tau = tau_[k * p_ + i];
        const double r = psi_[(static_cast<std::size_t>(d) * K + k) * p_ + i] - mu_[k * p_ + i];
        total += -0.5 * std::log(2.0 * M_PI * tau) - 0.5 * r * r / tau;
      }

  for (int k = 0; k < K; ++k)
    for (int i = 0; i < p_; ++i) {
      const double r = mu_[k * p_ + i] - hyper_.mu0[i];
      total += -0.5 * std::log(2.0 * M_PI * hyper_.lambda0[i]) -
               0.5 * r * r / hyper_.lambda0[i];
      const double a = partition_.upper[i] ? hyper_.a1 : hyper_.a2;
      const double tau = tau_[k * p_ + i];
      total += a * std::log(hyper_.b) - std::lgamma(a) - (a + 1.0) * std::log(tau) -
               hyper_.b / tau;
    }
  return total;
}

LtnSnapshot LtnSampler::snapshot(int t) const {
  LtnSnapshot snap;
  snap.iteration = t;
  const int K = hyper_.K;
  snap.y_root.resize(static_cast<std::size_t>(D_) * K);
  for (int d = 0; d < D_; ++d)
    for (int k = 0; k < K; ++k)
      snap.y_root[d * K + k] = y_[(static_cast<std::size_t>(d) * K + k) * nodes_ + tree_.root()];
  snap.psi = psi_;
  snap.mu = mu_;
  snap.tau = tau_;
  snap.log_joint = log_joint();
  return snap;
}

LtnChain run_ltn_chain(const Corpus& corpus, const PhyloTree& tree, const LtnHyperparams& hyper,
                       const ChainConfig& config, const std::vector<double>* fixed_mu,
                       const std::vector<double>* fixed_tau) {
  LtnSampler sampler(corpus, tree, hyper, config);
  if (config.fixed_global) {
    if (!fixed_mu || !fixed_tau)
      throw ConfigError("fixed-global mode requires trained mu and tau");
    sampler.set_global(*fixed_mu, *fixed_tau);
  }
  sampler.init();

  LtnChain chain;
  chain.D = sampler.D();
  chain.K = sampler.K();
  chain.p = sampler.p();
  chain.sample_totals.resize(corpus.num_samples());
  for (int d = 0; d < corpus.num_samples(); ++d) chain.sample_totals[d] = corpus.sample_total(d);
  chain.snapshots.reserve(config.num_snapshots());
  chain.log_joint_trace.reserve(config.iterations);
  chain.sweep_seconds.reserve(config.iterations);

  const auto start = std::chrono::steady_clock::now();
  for (int t = 1; t <= config.iterations; ++t) {
    const auto t0 = std::chrono::steady_clock::now();
    sampler.sweep(t);
    const auto t1 = std::chrono::steady_clock::now();
    chain.sweep_seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
    chain.log_joint_trace.push_back(sampler.log_joint());
    if (t > config.burn_in && (t - config.burn_in - 1) % config.thin == 0)
      chain.snapshots.push_back(sampler.snapshot(t));
  }
  chain.total_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return chain;
}

}  // namespace ltnlda
