#include "ltnlda/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ltnlda {

namespace {

double row_distance_sq(const double* a, const double* b, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = a[i] - b[i];
    s += r * r;
  }
  return s;
}

// Cost matrix between reference rows and candidate rows.
std::vector<double> pairwise_costs(const std::vector<double>& reference, int k_ref,
                                   const std::vector<double>& candidate, int k_cand, int V) {
  std::vector<double> cost(static_cast<std::size_t>(k_ref) * k_cand);
  for (int i = 0; i < k_ref; ++i)
    for (int j = 0; j < k_cand; ++j)
      cost[static_cast<std::size_t>(i) * k_cand + j] = row_distance_sq(
          reference.data() + static_cast<std::size_t>(i) * V,
          candidate.data() + static_cast<std::size_t>(j) * V, V);
  return cost;
}

void search_assignments(const std::vector<double>& cost, int k_ref, int k_cand, int slot,
                        std::vector<bool>& used, std::vector<int>& current, double running,
                        std::vector<int>& best, double& best_cost) {
  if (running >= best_cost) return;
  if (slot == k_ref) {
    best = current;
    best_cost = running;
    return;
  }
  for (int j = 0; j < k_cand; ++j) {
    if (used[j]) continue;
    used[j] = true;
    current[slot] = j;
    search_assignments(cost, k_ref, k_cand, slot + 1, used, current, running + cost[slot * k_cand + j],
                       best, best_cost);
    used[j] = false;
  }
}

std::vector<int> greedy_assignment(const std::vector<double>& cost, int k_ref, int k_cand) {
  std::vector<int> perm(k_ref, -1);
  std::vector<bool> used(k_cand, false);
  // Match the globally closest pair first, then repeat on the rest.
  for (int round = 0; round < k_ref; ++round) {
    double best = HUGE_VAL;
    int bi = -1, bj = -1;
    for (int i = 0; i < k_ref; ++i) {
      if (perm[i] >= 0) continue;
      for (int j = 0; j < k_cand; ++j) {
        if (used[j]) continue;
        if (cost[static_cast<std::size_t>(i) * k_cand + j] < best) {
          best = cost[static_cast<std::size_t>(i) * k_cand + j];
          bi = i;
          bj = j;
        }
      }
    }
    perm[bi] = bj;
    used[bj] = true;
  }
  return perm;
}

std::vector<int> best_assignment(const std::vector<double>& reference, int k_ref,
                                 const std::vector<double>& candidate, int k_cand, int V) {
  const std::vector<double> cost = pairwise_costs(reference, k_ref, candidate, k_cand, V);
  // 8!*8 and P(12,6)*6 are both well under a million cost additions.
  const bool exhaustive =
      (k_ref == k_cand && k_ref <= 8) || (k_ref < k_cand && k_ref <= 6 && k_cand <= 12);
  if (!exhaustive) return greedy_assignment(cost, k_ref, k_cand);
  std::vector<bool> used(k_cand, false);
  std::vector<int> current(k_ref, -1), best(k_ref, -1);
  double best_cost = HUGE_VAL;
  search_assignments(cost, k_ref, k_cand, 0, used, current, 0.0, best, best_cost);
  return best;
}

double quantile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

// Shared alignment/averaging loop over snapshots. get_beta_k(i) must fill a
// K x V composition matrix used to track labels; accumulate(i, perm) folds the
// aligned snapshot into the summary.
template <typename GetBetaK, typename Accumulate>
void align_and_average(int n_snapshots, int K, int V, PosteriorSummary& summary,
                       GetBetaK&& get_beta_k, Accumulate&& accumulate) {
  if (n_snapshots == 0) throw DataError("cannot summarize an empty chain");
  std::vector<double> reference;
  std::vector<double> beta_i(static_cast<std::size_t>(K) * V);
  for (int i = 0; i < n_snapshots; ++i) {
    get_beta_k(i, beta_i);
    std::vector<int> perm;
    if (i == 0) {
      perm.resize(K);
      std::iota(perm.begin(), perm.end(), 0);
      reference = beta_i;
    } else {
      perm = align_labels(reference, beta_i, K, V);
      // Running mean of aligned compositions keeps the reference stable.
      for (int k = 0; k < K; ++k)
        for (int v = 0; v < V; ++v) {
          double& r = reference[static_cast<std::size_t>(k) * V + v];
          r += (beta_i[static_cast<std::size_t>(perm[k]) * V + v] - r) / (i + 1.0);
        }
    }
    accumulate(i, perm);
    summary.snapshot_perms.push_back(std::move(perm));
  }
}

void fill_intervals(const std::vector<std::vector<double>>& draws, std::vector<double>& lo,
                    std::vector<double>& hi) {
  const std::size_t cells = draws.empty() ? 0 : draws[0].size();
  lo.resize(cells);
  hi.resize(cells);
  std::vector<double> column(draws.size());
  for (std::size_t c = 0; c < cells; ++c) {
    for (std::size_t i = 0; i < draws.size(); ++i) column[i] = draws[i][c];
    lo[c] = quantile(column, 0.025);
    hi[c] = quantile(column, 0.975);
  }
}

}  // namespace

std::vector<int> align_labels(const std::vector<double>& reference,
                              const std::vector<double>& candidate, int K, int V) {
  if (reference.size() != static_cast<std::size_t>(K) * V ||
      candidate.size() != static_cast<std::size_t>(K) * V)
    throw DataError("align_labels: composition shape mismatch");
  return best_assignment(reference, K, candidate, K, V);
}

std::vector<int> align_subset(const std::vector<double>& reference, int k_ref,
                              const std::vector<double>& candidate, int k_cand, int V) {
  if (k_ref > k_cand) throw DataError("align_subset: reference has more rows than candidate");
  if (reference.size() != static_cast<std::size_t>(k_ref) * V ||
      candidate.size() != static_cast<std::size_t>(k_cand) * V)
    throw DataError("align_subset: composition shape mismatch");
  return best_assignment(reference, k_ref, candidate, k_cand, V);
}

PosteriorSummary summarize_ltn(const LtnChain& chain, const PhyloTree& tree,
                               const LtnHyperparams& hyper,
                               std::vector<std::string> sample_ids,
                               std::vector<std::string> labels) {
  const int D = chain.D, K = chain.K, p = chain.p;
  const int V = tree.num_leaves();
  const int n = static_cast<int>(chain.snapshots.size());

  PosteriorSummary s;
  s.D = D;
  s.K = K;
  s.V = V;
  s.p = p;
  s.sample_ids = std::move(sample_ids);
  s.labels = std::move(labels);
  s.phi.assign(static_cast<std::size_t>(D) * K, 0.0);
  s.beta_k.assign(static_cast<std::size_t>(K) * V, 0.0);
  s.beta_dk.assign(static_cast<std::size_t>(D) * K * V, 0.0);
  s.mu_hat.assign(static_cast<std::size_t>(K) * p, 0.0);
  s.tau_hat.assign(static_cast<std::size_t>(K) * p, 0.0);

  std::vector<std::vector<double>> phi_draws, beta_draws;
  phi_draws.reserve(n);
  beta_draws.reserve(n);

  align_and_average(
      n, K, V, s,
      [&](int i, std::vector<double>& beta_out) {
        const LtnSnapshot& snap = chain.snapshots[i];
        for (int k = 0; k < K; ++k) {
          const std::vector<double> mu_k(snap.mu.begin() + static_cast<std::size_t>(k) * p,
                                         snap.mu.begin() + static_cast<std::size_t>(k + 1) * p);
          const std::vector<double> beta = psi_to_beta(tree, mu_k);
          std::copy(beta.begin(), beta.end(), beta_out.begin() + static_cast<std::size_t>(k) * V);
        }
      },
      [&](int i, const std::vector<int>& perm) {
        const LtnSnapshot& snap = chain.snapshots[i];
        std::vector<double> phi_i(static_cast<std::size_t>(D) * K);
        std::vector<double> beta_i(static_cast<std::size_t>(K) * V);
        for (int d = 0; d < D; ++d) {
          const double denom = static_cast<double>(chain.sample_totals[d]) + K * hyper.alpha;
          for (int k = 0; k < K; ++k)
            phi_i[static_cast<std::size_t>(d) * K + k] =
                (snap.y_root[static_cast<std::size_t>(d) * K + perm[k]] + hyper.alpha) / denom;
        }
        for (int k = 0; k < K; ++k) {
          const int src = perm[k];
          const std::vector<double> mu_k(snap.mu.begin() + static_cast<std::size_t>(src) * p,
                                         snap.mu.begin() + static_cast<std::size_t>(src + 1) * p);
          const std::vector<double> beta = psi_to_beta(tree, mu_k);
          std::copy(beta.begin(), beta.end(), beta_i.begin() + static_cast<std::size_t>(k) * V);
          for (int i2 = 0; i2 < p; ++i2) {
            s.mu_hat[static_cast<std::size_t>(k) * p + i2] +=
                snap.mu[static_cast<std::size_t>(src) * p + i2] / n;
            s.tau_hat[static_cast<std::size_t>(k) * p + i2] +=
                snap.tau[static_cast<std::size_t>(src) * p + i2] / n;
          }
          for (int d = 0; d < D; ++d) {
            const std::vector<double> psi_dk(
                snap.psi.begin() + (static_cast<std::size_t>(d) * K + src) * p,
                snap.psi.begin() + (static_cast<std::size_t>(d) * K + src + 1) * p);
            const std::vector<double> beta_d = psi_to_beta(tree, psi_dk);
            for (int v = 0; v < V; ++v)
              s.beta_dk[(static_cast<std::size_t>(d) * K + k) * V + v] += beta_d[v] / n;
          }
        }
        for (std::size_t c = 0; c < phi_i.size(); ++c) s.phi[c] += phi_i[c] / n;
        for (std::size_t c = 0; c < beta_i.size(); ++c) s.beta_k[c] += beta_i[c] / n;
        phi_draws.push_back(std::move(phi_i));
        beta_draws.push_back(std::move(beta_i));
      });

  fill_intervals(phi_draws, s.phi_lo, s.phi_hi);
  fill_intervals(beta_draws, s.beta_k_lo, s.beta_k_hi);
  return s;
}

PosteriorSummary summarize_lda(const LdaChain& chain, const LdaHyperparams& hyper,
                               std::vector<std::string> sample_ids,
                               std::vector<std::string> labels) {
  const int D = chain.D, K = chain.K, V = chain.V;
  const int n = static_cast<int>(chain.snapshots.size());

  PosteriorSummary s;
  s.D = D;
  s.K = K;
  s.V = V;
  s.sample_ids = std::move(sample_ids);
  s.labels = std::move(labels);
  s.phi.assign(static_cast<std::size_t>(D) * K, 0.0);
  s.beta_k.assign(static_cast<std::size_t>(K) * V, 0.0);

  std::vector<std::vector<double>> phi_draws, beta_draws;
  phi_draws.reserve(n);
  beta_draws.reserve(n);

  auto beta_from_snapshot = [&](const LdaSnapshot& snap, int k, std::vector<double>& out,
                                std::size_t offset) {
    long long total = 0;
    for (int v = 0; v < V; ++v) total += snap.n_kv[static_cast<std::size_t>(k) * V + v];
    const double denom = static_cast<double>(total) + V * hyper.gamma;
    for (int v = 0; v < V; ++v)
      out[offset + v] = (snap.n_kv[static_cast<std::size_t>(k) * V + v] + hyper.gamma) / denom;
  };

  align_and_average(
      n, K, V, s,
      [&](int i, std::vector<double>& beta_out) {
        for (int k = 0; k < K; ++k)
          beta_from_snapshot(chain.snapshots[i], k, beta_out, static_cast<std::size_t>(k) * V);
      },
      [&](int i, const std::vector<int>& perm) {
        const LdaSnapshot& snap = chain.snapshots[i];
        std::vector<double> phi_i(static_cast<std::size_t>(D) * K);
        std::vector<double> beta_i(static_cast<std::size_t>(K) * V);
        for (int d = 0; d < D; ++d) {
          const double denom = static_cast<double>(chain.sample_totals[d]) + K * hyper.alpha;
          for (int k = 0; k < K; ++k)
            phi_i[static_cast<std::size_t>(d) * K + k] =
                (snap.n_dk[static_cast<std::size_t>(d) * K + perm[k]] + hyper.alpha) / denom;
        }
        for (int k = 0; k < K; ++k)
          beta_from_snapshot(snap, perm[k], beta_i, static_cast<std::size_t>(k) * V);
        for (std::size_t c = 0; c < phi_i.size(); ++c) s.phi[c] += phi_i[c] / n;
        for (std::size_t c = 0; c < beta_i.size(); ++c) s.beta_k[c] += beta_i[c] / n;
        phi_draws.push_back(std::move(phi_i));
        beta_draws.push_back(std::move(beta_i));
      });

  fill_intervals(phi_draws, s.phi_lo, s.phi_hi);
  fill_intervals(beta_draws, s.beta_k_lo, s.beta_k_hi);
  return s;
}

double mean_l2(const std::vector<double>& estimate, const std::vector<double>& truth, int rows,
               int cols) {
  if (estimate.size() != truth.size() ||
      estimate.size() != static_cast<std::size_t>(rows) * cols)
    throw DataError("mean_l2: shape mismatch");
  double total = 0.0;
  for (int r = 0; r < rows; ++r)
    total += std::sqrt(row_distance_sq(estimate.data() + static_cast<std::size_t>(r) * cols,
                                       truth.data() + static_cast<std::size_t>(r) * cols, cols));
  return total / rows;
}

std::vector<std::vector<int>> top_asvs(const PosteriorSummary& summary, int n) {
  if (n > summary.V) throw ConfigError("top_asvs: n exceeds the number of taxa");
  std::vector<std::vector<int>> result(summary.K);
  for (int k = 0; k < summary.K; ++k) {
    std::vector<int> order(summary.V);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return summary.beta_k_at(k, a) > summary.beta_k_at(k, b);
    });
    order.resize(n);
    result[k] = std::move(order);
  }
  return result;
}

}  // namespace ltnlda
