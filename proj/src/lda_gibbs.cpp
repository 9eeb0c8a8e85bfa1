#include "ltnlda/lda_gibbs.hpp"

#include <chrono>
#include <cmath>

namespace ltnlda {

LdaSampler::LdaSampler(const Corpus& corpus, LdaHyperparams hyper, ChainConfig config)
    : corpus_(corpus), hyper_(hyper), config_(config) {
  hyper_.validate();
  config_.validate();
  if (corpus_.num_samples() == 0) throw ConfigError("corpus has no samples");
  D_ = corpus_.num_samples();
  V_ = corpus_.num_taxa();
  z_.resize(D_);
  n_dk_.assign(static_cast<std::size_t>(D_) * hyper_.K, 0);
  n_kv_.assign(static_cast<std::size_t>(hyper_.K) * V_, 0);
  n_k_.assign(hyper_.K, 0);
}

void LdaSampler::init() {
  Rng rng(mix_seed(config_.seed, 0x1da1da1dULL));
  for (int d = 0; d < D_; ++d) {
    z_[d].resize(corpus_.tokens[d].size());
    for (auto& zk : z_[d]) zk = static_cast<int>(rng.uniform_int(hyper_.K));
  }
  rebuild_counts();
}

void LdaSampler::rebuild_counts() {
  std::fill(n_dk_.begin(), n_dk_.end(), 0);
  std::fill(n_kv_.begin(), n_kv_.end(), 0);
  std::fill(n_k_.begin(), n_k_.end(), 0);
  for (int d = 0; d < D_; ++d)
    for (std::size_t n = 0; n < corpus_.tokens[d].size(); ++n) {
      const int k = z_[d][n];
      const int v = corpus_.tokens[d][n];
      ++n_dk_[static_cast<std::size_t>(d) * hyper_.K + k];
      ++n_kv_[static_cast<std::size_t>(k) * V_ + v];
      ++n_k_[k];
    }
}

void LdaSampler::check_counts() const {
  for (int d = 0; d < D_; ++d) {
    long long total = 0;
    for (int k = 0; k < hyper_.K; ++k) total += n_dk_[static_cast<std::size_t>(d) * hyper_.K + k];
    if (total != static_cast<long long>(corpus_.tokens[d].size()))
      throw NumericalError("sample-subcommunity counts do not sum to the sample total");
  }
  for (int k = 0; k < hyper_.K; ++k) {
    long long total = 0;
    for (int v = 0; v < V_; ++v) total += n_kv_[static_cast<std::size_t>(k) * V_ + v];
    if (total != n_k_[k]) throw NumericalError("subcommunity-taxon counts do not sum");
  }
}

void LdaSampler::update_sample(int d, Rng& rng, const std::vector<double>* fixed_beta) {
  const int K = hyper_.K;
  const double alpha = hyper_.alpha;
  const double gamma = hyper_.gamma;
  auto& zd = z_[d];
  const auto& toks = corpus_.tokens[d];
  int* ndk = n_dk_.data() + static_cast<std::size_t>(d) * K;

  std::vector<double> weights(K);
  for (std::size_t n = 0; n < toks.size(); ++n) {
    const int v = toks[n];
    const int kold = zd[n];
    --ndk[kold];
    if (!fixed_beta) {
      --n_kv_[static_cast<std::size_t>(kold) * V_ + v];
      --n_k_[kold];
    }

    double total = 0.0;
    if (fixed_beta) {
      for (int k = 0; k < K; ++k) {
        weights[k] = (ndk[k] + alpha) * (*fixed_beta)[static_cast<std::size_t>(k) * V_ + v];
        total += weights[k];
      }
    } else {
      for (int k = 0; k < K; ++k) {
        weights[k] = (ndk[k] + alpha) * (n_kv_[static_cast<std::size_t>(k) * V_ + v] + gamma) /
                     (n_k_[k] + V_ * gamma);
        total += weights[k];
      }
    }

    const double u = rng.uniform() * total;
    double acc = 0.0;
    int knew = K - 1;
    for (int k = 0; k < K - 1; ++k) {
      acc += weights[k];
      if (u < acc) {
        knew = k;
        break;
      }
    }

    zd[n] = knew;
    ++ndk[knew];
    if (!fixed_beta) {
      ++n_kv_[static_cast<std::size_t>(knew) * V_ + v];
      ++n_k_[knew];
    }
  }
}

std::vector<double> LdaSampler::assignment_probabilities(int d, int n) const {
  const int K = hyper_.K;
  const int v = corpus_.tokens[d][n];
  const int kcur = z_[d][n];
  std::vector<double> probs(K);
  double total = 0.0;
  for (int k = 0; k < K; ++k) {
    const int excl = k == kcur ? 1 : 0;
    probs[k] = (n_dk_[static_cast<std::size_t>(d) * K + k] - excl + hyper_.alpha) *
               (n_kv_[static_cast<std::size_t>(k) * V_ + v] - excl + hyper_.gamma) /
               (n_k_[k] - excl + V_ * hyper_.gamma);
    total += probs[k];
  }
  for (double& w : probs) w /= total;
  return probs;
}

void LdaSampler::sweep(int t) {
  Rng rng(mix_seed(config_.seed, 0x1daULL, t));
  for (int d = 0; d < D_; ++d) update_sample(d, rng, nullptr);
}

void LdaSampler::sweep_fixed_beta(int t, const std::vector<double>& beta) {
  if (beta.size() != static_cast<std::size_t>(hyper_.K) * V_)
    throw ConfigError("fixed beta has the wrong shape");
  Rng rng(mix_seed(config_.seed, 0x1daULL, t));
  for (int d = 0; d < D_; ++d) update_sample(d, rng, &beta);
}

double LdaSampler::log_joint() const {
  const int K = hyper_.K;
  const double alpha = hyper_.alpha;
  const double gamma = hyper_.gamma;
  double total = 0.0;
  for (int d = 0; d < D_; ++d) {
    const long long nd = static_cast<long long>(corpus_.tokens[d].size());
    total += std::lgamma(K * alpha) - std::lgamma(nd + K * alpha) - K * std::lgamma(alpha);
    for (int k = 0; k < K; ++k)
      total += std::lgamma(n_dk_[static_cast<std::size_t>(d) * K + k] + alpha);
  }
  for (int k = 0; k < K; ++k) {
    total += std::lgamma(V_ * gamma) - std::lgamma(n_k_[k] + V_ * gamma) - V_ * std::lgamma(gamma);
    for (int v = 0; v < V_; ++v)
      total += std::lgamma(n_kv_[static_cast<std::size_t>(k) * V_ + v] + gamma);
  }
  return total;
}

LdaSnapshot LdaSampler::snapshot(int t) const {
  LdaSnapshot snap;
  snap.iteration = t;
  snap.n_dk = n_dk_;
  snap.n_kv = n_kv_;
  snap.log_joint = log_joint();
  return snap;
}

LdaChain run_lda_chain(const Corpus& corpus, const LdaHyperparams& hyper,
                       const ChainConfig& config, const std::vector<double>* fixed_beta) {
  LdaSampler sampler(corpus, hyper, config);
  sampler.init();

  LdaChain chain;
  chain.D = sampler.D();
  chain.K = sampler.K();
  chain.V = sampler.V();
  chain.sample_totals.resize(corpus.num_samples());
  for (int d = 0; d < corpus.num_samples(); ++d) chain.sample_totals[d] = corpus.sample_total(d);
  chain.snapshots.reserve(config.num_snapshots());
  chain.log_joint_trace.reserve(config.iterations);

  const auto start = std::chrono::steady_clock::now();
  for (int t = 1; t <= config.iterations; ++t) {
    if (fixed_beta)
      sampler.sweep_fixed_beta(t, *fixed_beta);
    else
      sampler.sweep(t);
    chain.log_joint_trace.push_back(sampler.log_joint());
    if (t > config.burn_in && (t - config.burn_in - 1) % config.thin == 0)
      chain.snapshots.push_back(sampler.snapshot(t));
  }
  chain.total_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return chain;
}

}  // namespace ltnlda
