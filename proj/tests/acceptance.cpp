// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failures. Individual criteria can be selected by number on the command
// line. Criterion 5 runs its reduced CI variant by default; set
// LTNLDA_ACCEPT_FULL=1 to add the hours-scale full configuration. Criterion
// 10 drives the command-line binary named by LTNLDA_CLI.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "gir.hpp"
#include "ltnlda/evaluation.hpp"
#include "ltnlda/io.hpp"
#include "ltnlda/parallel.hpp"
#include "ltnlda/polya_gamma.hpp"
#include "ltnlda/posterior.hpp"
#include "ltnlda/simulate.hpp"
#include "ltnlda/tree.hpp"
#include "test_util.hpp"

using namespace ltnlda;
namespace fs = std::filesystem;

namespace {

int g_threads = 2;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
  void note(const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", x);
  return buf;
}

// ----- shared reduced-scale fixture -----------------------------------------

struct ReducedFixture {
  PhyloTree tree;
  LtnHyperparams hyper;  // truth: K=3, C=3
  Corpus corpus;
  LtnGroundTruth truth;
};

constexpr std::uint64_t kReducedSeed = 126;
constexpr int kReducedD = 20;
constexpr long long kReducedN = 2000;
constexpr int kReducedV = 16;
constexpr int kReducedK = 3;
constexpr int kReducedC = 3;

const ReducedFixture& reduced_fixture() {
  static const ReducedFixture fixture = [] {
    ReducedFixture f{generate_tree(kReducedV, TreeShape::kBalanced, 0), {}, {}, {}};
    f.hyper.K = kReducedK;
    f.hyper.C = kReducedC;
    LtnSimOptions options;
    options.D = kReducedD;
    options.tokens_per_sample = kReducedN;
    options.seed = kReducedSeed;
    auto [corpus, truth] = generate_ltn_corpus(f.tree, f.hyper, options);
    f.corpus = std::move(corpus);
    f.truth = std::move(truth);
    return f;
  }();
  return fixture;
}

ChainConfig fit_config(int iterations, std::uint64_t seed) {
  ChainConfig config;
  config.iterations = iterations;
  config.burn_in = iterations / 2;
  config.thin = std::max(1, iterations / 2 / 100);
  config.seed = seed;
  config.threads = g_threads;
  return config;
}

// Fit cache so criteria 4, 5, 7 and 9 share chains.
const PosteriorSummary& ltn_fit(int K, int C, int iterations) {
  static std::map<std::tuple<int, int, int>, PosteriorSummary> cache;
  const auto key = std::make_tuple(K, C, iterations);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  const ReducedFixture& f = reduced_fixture();
  LtnHyperparams hyper = f.hyper;
  hyper.K = K;
  hyper.C = C;
  const LtnChain chain =
      run_ltn_chain(f.corpus, f.tree, hyper, fit_config(iterations, mix_seed(9000, K, C)));
  PosteriorSummary summary =
      summarize_ltn(chain, f.tree, hyper, f.corpus.sample_ids, f.corpus.labels);
  return cache.emplace(key, std::move(summary)).first->second;
}

std::vector<double> mean_abundances(const PosteriorSummary& s) {
  std::vector<double> means(s.K, 0.0);
  for (int d = 0; d < s.D; ++d)
    for (int k = 0; k < s.K; ++k) means[k] += s.phi_at(d, k) / s.D;
  return means;
}

// ----- criterion 1 -----------------------------------------------------------

Outcome criterion_transforms() {
  Outcome out;
  const auto start = std::chrono::steady_clock::now();
  Rng rng(20260809);
  double worst = 0.0;
  for (const TreeShape shape :
       {TreeShape::kBalanced, TreeShape::kCaterpillar, TreeShape::kRandom}) {
    for (const int V : {4, 16, 49}) {
      const PhyloTree tree = generate_tree(V, shape, 11);
      for (int rep = 0; rep < 1000; ++rep) {
        const std::vector<double> beta = rng.dirichlet_symmetric(1.0, V);
        const std::vector<double> back = psi_to_beta(tree, beta_to_psi(tree, beta));
        for (int v = 0; v < V; ++v) worst = std::max(worst, std::fabs(back[v] - beta[v]));
      }
    }
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.require(worst < 1e-12, "max round-trip error " + fmt(worst));
  out.require(seconds < 1.0, "runtime " + fmt(seconds) + " s exceeds 1 s");
  out.note("max error " + fmt(worst) + ", " + fmt(seconds) + " s");
  return out;
}

// ----- criterion 2 -----------------------------------------------------------

Outcome criterion_pg_moments() {
  Outcome out;
  const auto start = std::chrono::steady_clock::now();
  const PolyaGammaSampler pg;
  const int draws = 100000;
  const std::vector<long long> bs = {1, 5, 29, 30, 100};
  const std::vector<double> cs = {0.0, 0.5, 2.0, 5.0};

  std::vector<std::vector<double>> samples(bs.size() * cs.size());
  parallel_for(static_cast<int>(samples.size()), g_threads, [&](int idx) {
    const long long b = bs[idx / cs.size()];
    const double c = cs[idx % cs.size()];
    Rng rng(mix_seed(555, idx));
    samples[idx].resize(draws);
    for (auto& x : samples[idx]) x = pg.sample(b, c, rng);
  });

  for (std::size_t idx = 0; idx < samples.size(); ++idx) {
    const long long b = bs[idx / cs.size()];
    const double c = cs[idx % cs.size()];
    const double m = pg_mean(static_cast<double>(b), c);
    const double v = pg_var(static_cast<double>(b), c);
    const double mean_se = std::sqrt(v / draws);
    const double got_mean = testutil::mean(samples[idx]);
    const double got_var = testutil::variance(samples[idx]);
    // SE of the sample variance via the fourth-moment normal proxy.
    const double var_se = v * std::sqrt(2.0 / (draws - 1)) * 1.6;
    out.require(std::fabs(got_mean - m) < 3.0 * mean_se,
                "mean off at b=" + std::to_string(b) + " c=" + fmt(c) + " (" + fmt(got_mean) +
                    " vs " + fmt(m) + ")");
    out.require(std::fabs(got_var - v) < 3.0 * var_se,
                "variance off at b=" + std::to_string(b) + " c=" + fmt(c) + " (" + fmt(got_var) +
                    " vs " + fmt(v) + ")");
  }

  // continuity across the switch: 30/29-scaled b=29 draws against b=30 draws
  for (std::size_t ci = 0; ci < cs.size(); ++ci) {
    const auto& s29 = samples[2 * cs.size() + ci];
    const auto& s30 = samples[3 * cs.size() + ci];
    const double scale = 30.0 / 29.0;
    const double m29 = testutil::mean(s29) * scale;
    const double se29 = testutil::standard_error(s29) * scale;
    const double m30 = testutil::mean(s30);
    const double se30 = testutil::standard_error(s30);
    const double z = (m29 - m30) / std::sqrt(se29 * se29 + se30 * se30);
    out.require(std::fabs(z) < 4.0, "switch discontinuity z=" + fmt(z) + " at c=" + fmt(cs[ci]));
  }

  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.require(seconds < 30.0, "runtime " + fmt(seconds) + " s exceeds 30 s");
  out.note(fmt(seconds) + " s");
  return out;
}

// ----- criterion 3 -----------------------------------------------------------

Outcome criterion_stationarity() {
  Outcome out;
  // Moderate inverse-gamma tiers: the near-degenerate default a1 glues the
  // upper-tree log-odds to their means, which destroys the successive
  // simulator's mixing without exercising any additional code path (the
  // shape parameter is covered by the conditional-moment unit tests).
  const PhyloTree tree = generate_tree(8, TreeShape::kBalanced, 1);
  LtnHyperparams hyper;
  hyper.K = 2;
  hyper.C = 4;
  hyper.a1 = 15.0;
  hyper.a2 = 5.0;
  hyper.b = 8.0;
  const gir::Report ltn = gir::run_ltn_gir(tree, hyper, 5, 50, 10000, 606);
  for (std::size_t i = 0; i < ltn.z_scores.size(); ++i)
    out.require(std::fabs(ltn.z_scores[i]) < 4.0,
                "ltn stat " + ltn.names[i] + " z=" + fmt(ltn.z_scores[i]));

  LdaHyperparams lda;
  lda.K = 2;
  const gir::Report base = gir::run_lda_gir(8, lda, 5, 50, 10000, 707);
  for (std::size_t i = 0; i < base.z_scores.size(); ++i)
    out.require(std::fabs(base.z_scores[i]) < 4.0,
                "lda stat " + base.names[i] + " z=" + fmt(base.z_scores[i]));
  out.note("ltn max |z| " + fmt(ltn.max_abs_z()) + ", lda max |z| " + fmt(base.max_abs_z()) +
           " over " + std::to_string(ltn.z_scores.size() + base.z_scores.size()) + " stats");
  return out;
}

// ----- criterion 4 -----------------------------------------------------------

Outcome criterion_recovery() {
  Outcome out;
  const ReducedFixture& f = reduced_fixture();
  const PosteriorSummary& s = ltn_fit(kReducedK, kReducedC, 20000);

  const std::vector<int> match = align_labels(f.truth.beta_k, s.beta_k, kReducedK, kReducedV);
  std::vector<double> phi_est(static_cast<std::size_t>(kReducedD) * kReducedK);
  for (int d = 0; d < kReducedD; ++d)
    for (int k = 0; k < kReducedK; ++k)
      phi_est[static_cast<std::size_t>(d) * kReducedK + k] = s.phi_at(d, match[k]);
  std::vector<double> beta_est(static_cast<std::size_t>(kReducedK) * kReducedV);
  for (int k = 0; k < kReducedK; ++k)
    for (int v = 0; v < kReducedV; ++v)
      beta_est[static_cast<std::size_t>(k) * kReducedV + v] = s.beta_k_at(match[k], v);

  const double l2_phi = mean_l2(phi_est, f.truth.phi, kReducedD, kReducedK);
  const double l2_beta = mean_l2(beta_est, f.truth.beta_k, kReducedK, kReducedV);
  out.require(l2_phi <= 0.15, "L2(phi) " + fmt(l2_phi) + " > 0.15");
  out.require(l2_beta <= 0.15, "L2(beta_k) " + fmt(l2_beta) + " > 0.15");
  out.note("L2(phi) " + fmt(l2_phi) + ", L2(beta_k) " + fmt(l2_beta));
  return out;
}

// ----- criterion 5 -----------------------------------------------------------

struct RobustnessReport {
  double median_l1 = 0.0;
  double max_extra = 0.0;
  int lda_big = 0;
};

RobustnessReport robustness_assertions(const PosteriorSummary& base,
                                       const PosteriorSummary& wide,
                                       const PosteriorSummary& lda, int k_true) {
  RobustnessReport report;
  const std::vector<int> match =
      align_subset(base.beta_k, k_true, wide.beta_k, wide.K, base.V);

  std::vector<double> l1(base.D, 0.0);
  for (int d = 0; d < base.D; ++d)
    for (int k = 0; k < k_true; ++k)
      l1[d] += std::fabs(base.phi_at(d, k) - wide.phi_at(d, match[k]));
  std::nth_element(l1.begin(), l1.begin() + base.D / 2, l1.end());
  report.median_l1 = l1[base.D / 2];

  const std::vector<double> wide_means = mean_abundances(wide);
  for (int k = 0; k < wide.K; ++k) {
    bool matched = false;
    for (int j = 0; j < k_true; ++j) matched = matched || match[j] == k;
    if (!matched) report.max_extra = std::max(report.max_extra, wide_means[k]);
  }

  for (double m : mean_abundances(lda))
    if (m >= 0.05) ++report.lda_big;
  return report;
}

Outcome criterion_robustness() {
  Outcome out;
  const ReducedFixture& f = reduced_fixture();
  const PosteriorSummary& base = ltn_fit(kReducedK, kReducedC, 20000);
  const PosteriorSummary& wide = ltn_fit(2 * kReducedK, kReducedC, 20000);

  LdaHyperparams lda_hyper;
  lda_hyper.K = 2 * kReducedK;
  const LdaChain lda_chain =
      run_lda_chain(f.corpus, lda_hyper, fit_config(20000, mix_seed(9000, 77)));
  const PosteriorSummary lda =
      summarize_lda(lda_chain, lda_hyper, f.corpus.sample_ids, f.corpus.labels);

  const RobustnessReport report = robustness_assertions(base, wide, lda, kReducedK);
  out.require(report.median_l1 <= 0.1,
              "median matched-abundance L1 " + fmt(report.median_l1) + " > 0.1");
  out.require(report.max_extra < 0.05, "extra subcommunity at " + fmt(report.max_extra));
  out.require(report.lda_big > kReducedK,
              "baseline allocates >=0.05 to only " + std::to_string(report.lda_big));
  out.note("L1 " + fmt(report.median_l1) + ", max extra " + fmt(report.max_extra) +
           ", baseline active " + std::to_string(report.lda_big));

  if (std::getenv("LTNLDA_ACCEPT_FULL")) {
    const PhyloTree tree = generate_tree(49, TreeShape::kRandom, 1);
    LtnHyperparams hyper;
    hyper.K = 4;
    hyper.C = 5;
    LtnSimOptions options;
    options.D = 50;
    options.tokens_per_sample = 10000;
    options.seed = 33;
    const auto [corpus, truth] = generate_ltn_corpus(tree, hyper, options);

    auto fit = [&](int K) {
      LtnHyperparams h = hyper;
      h.K = K;
      const LtnChain chain =
          run_ltn_chain(corpus, tree, h, fit_config(20000, mix_seed(9100, K)));
      return summarize_ltn(chain, tree, h, corpus.sample_ids, corpus.labels);
    };
    const PosteriorSummary s4 = fit(4);
    for (const int K : {7, 10}) {
      const PosteriorSummary sk = fit(K);
      LdaHyperparams lh;
      lh.K = 10;
      const LdaChain lc = run_lda_chain(corpus, lh, fit_config(20000, mix_seed(9100, 99)));
      const PosteriorSummary ls = summarize_lda(lc, lh, corpus.sample_ids, corpus.labels);
      const RobustnessReport r = robustness_assertions(s4, sk, ls, 4);
      out.require(r.median_l1 <= 0.1,
                  "full-scale K=" + std::to_string(K) + " L1 " + fmt(r.median_l1));
      out.require(r.max_extra < 0.05,
                  "full-scale K=" + std::to_string(K) + " extra " + fmt(r.max_extra));
      out.require(r.lda_big > 4, "full-scale baseline active " + std::to_string(r.lda_big));
    }
  }
  return out;
}

// ----- criterion 6 -----------------------------------------------------------

struct SeedScores {
  std::map<int, double> ltn;  // K -> perplexity
  std::map<int, double> lda;
};

SeedScores perplexity_scores(std::uint64_t seed, const std::vector<int>& k_grid) {
  const PhyloTree tree = generate_tree(kReducedV, TreeShape::kBalanced, 0);
  LtnHyperparams hyper;
  hyper.K = kReducedK;
  hyper.C = kReducedC;
  hyper.validate_and_expand(tree.num_internal());

  LtnSimOptions train_options;
  train_options.D = kReducedD;
  train_options.tokens_per_sample = kReducedN;
  train_options.seed = mix_seed(seed, 1);
  const auto [train, truth] = generate_ltn_corpus(tree, hyper, train_options);

  LtnSimOptions test_options = train_options;
  test_options.seed = mix_seed(seed, 2);
  test_options.fixed_mu = &truth.mu;
  test_options.fixed_tau = &truth.tau;
  const auto [test, test_truth] = generate_ltn_corpus(tree, hyper, test_options);

  ChainConfig eval;
  eval.iterations = 300;
  eval.burn_in = 100;
  eval.thin = 2;
  eval.seed = mix_seed(seed, 3);

  SeedScores scores;
  for (const int K : k_grid) {
    LtnHyperparams h = hyper;
    h.K = K;
    const LtnChain chain =
        run_ltn_chain(train, tree, h, fit_config(6000, mix_seed(seed, 10 + K)));
    const PosteriorSummary s = summarize_ltn(chain, tree, h, train.sample_ids, train.labels);
    scores.ltn[K] =
        perplexity_ltn(s.mu_hat, s.tau_hat, test, tree, h, eval, g_threads).perplexity;

    LdaHyperparams lh;
    lh.K = K;
    const LdaChain lc = run_lda_chain(train, lh, fit_config(6000, mix_seed(seed, 40 + K)));
    const PosteriorSummary lsum = summarize_lda(lc, lh, train.sample_ids, train.labels);
    scores.lda[K] = perplexity_lda(lsum.beta_k, test, lh, eval, g_threads).perplexity;
  }
  return scores;
}

Outcome criterion_perplexity_ordering() {
  Outcome out;
  const std::vector<int> k_grid = {2, 3, 4, 5};
  const std::vector<std::uint64_t> seeds = {11, 22, 33, 44, 55};

  std::map<int, double> ltn_mean, lda_mean;
  for (const std::uint64_t seed : seeds) {
    const SeedScores scores = perplexity_scores(seed, k_grid);
    for (const int K : k_grid) {
      ltn_mean[K] += scores.ltn.at(K) / seeds.size();
      lda_mean[K] += scores.lda.at(K) / seeds.size();
    }
  }

  out.require(ltn_mean[kReducedK] < lda_mean[kReducedK],
              "tree model (" + fmt(ltn_mean[kReducedK]) + ") not below baseline (" +
                  fmt(lda_mean[kReducedK]) + ") at true K");

  std::vector<double> ltn_curve, lda_curve;
  for (const int K : k_grid) {
    ltn_curve.push_back(ltn_mean[K]);
    lda_curve.push_back(lda_mean[K]);
  }
  const int ltn_flat = k_grid[inflection_index(ltn_curve, 0.01)];
  out.require(ltn_flat >= kReducedK - 1 && ltn_flat <= kReducedK + 1,
              "tree-model curve flattens at K=" + std::to_string(ltn_flat));
  // baseline improvement two past truth still above one percent
  const double lda_improvement =
      (lda_mean[kReducedK + 1] - lda_mean[kReducedK + 2]) / lda_mean[kReducedK + 1];
  out.require(lda_improvement > 0.01,
              "baseline improvement at K truth+2 is " + fmt(lda_improvement));
  out.note("ltn " + fmt(ltn_mean[2]) + "/" + fmt(ltn_mean[3]) + "/" + fmt(ltn_mean[4]) + "/" +
           fmt(ltn_mean[5]) + " lda " + fmt(lda_mean[2]) + "/" + fmt(lda_mean[3]) + "/" +
           fmt(lda_mean[4]) + "/" + fmt(lda_mean[5]) + ", flat at " + std::to_string(ltn_flat));
  return out;
}

// ----- criterion 7 -----------------------------------------------------------

Outcome criterion_c_selection() {
  Outcome out;
  const ReducedFixture& f = reduced_fixture();

  // matched test set from the training truth
  LtnSimOptions test_options;
  test_options.D = kReducedD;
  test_options.tokens_per_sample = kReducedN;
  test_options.seed = mix_seed(kReducedSeed, 99);
  test_options.fixed_mu = &f.truth.mu;
  test_options.fixed_tau = &f.truth.tau;
  const auto [test, test_truth] = generate_ltn_corpus(f.tree, f.hyper, test_options);

  ChainConfig eval;
  eval.iterations = 300;
  eval.burn_in = 100;
  eval.thin = 2;
  eval.seed = 424242;

  const std::vector<int> c_grid = {1, 2, 3, 4, 5};
  std::vector<double> curve;
  for (const int C : c_grid) {
    LtnHyperparams h = f.hyper;
    h.C = C;
    const LtnChain chain =
        run_ltn_chain(f.corpus, f.tree, h, fit_config(6000, mix_seed(8800, C)));
    const PosteriorSummary s =
        summarize_ltn(chain, f.tree, h, f.corpus.sample_ids, f.corpus.labels);
    curve.push_back(
        perplexity_ltn(s.mu_hat, s.tau_hat, test, f.tree, h, eval, g_threads).perplexity);
  }
  const int c_flat = c_grid[inflection_index(curve, 0.01)];
  out.require(c_flat >= kReducedC - 1 && c_flat <= kReducedC + 1,
              "perplexity flattens at C=" + std::to_string(c_flat));

  // L2 of the sample compositions degrades when C overshoots
  auto beta_dk_l2 = [&](const PosteriorSummary& s) {
    const std::vector<int> match = align_labels(f.truth.beta_k, s.beta_k, kReducedK, kReducedV);
    std::vector<double> est(static_cast<std::size_t>(kReducedD) * kReducedK * kReducedV);
    for (int d = 0; d < kReducedD; ++d)
      for (int k = 0; k < kReducedK; ++k)
        for (int v = 0; v < kReducedV; ++v)
          est[(static_cast<std::size_t>(d) * kReducedK + k) * kReducedV + v] =
              s.beta_dk_at(d, match[k], v);
    return mean_l2(est, f.truth.beta_dk, kReducedD * kReducedK, kReducedV);
  };
  const double at_truth = beta_dk_l2(ltn_fit(kReducedK, kReducedC, 20000));
  const double overshoot = beta_dk_l2(ltn_fit(kReducedK, kReducedC + kReducedV / 2, 12000));
  out.require(at_truth < overshoot, "L2(beta_dk) " + fmt(at_truth) + " at truth vs " +
                                        fmt(overshoot) + " when C overshoots");
  out.note("curve " + fmt(curve[0]) + "/" + fmt(curve[1]) + "/" + fmt(curve[2]) + "/" +
           fmt(curve[3]) + "/" + fmt(curve[4]) + ", flat at C=" + std::to_string(c_flat) +
           ", L2 " + fmt(at_truth) + " -> " + fmt(overshoot));
  return out;
}

// ----- criterion 8 -----------------------------------------------------------

double sweep_time(const Corpus& corpus, const PhyloTree& tree, const LtnHyperparams& hyper) {
  // Minimum of repeated medians: robust against other processes stealing the
  // core mid-measurement.
  double best = HUGE_VAL;
  for (int rep = 0; rep < 3; ++rep) {
    ChainConfig config;
    config.iterations = 40;
    config.burn_in = 39;
    config.thin = 1;
    config.seed = 4242 + rep;
    config.threads = 1;
    const LtnChain chain = run_ltn_chain(corpus, tree, hyper, config);
    std::vector<double> times(chain.sweep_seconds.begin() + 10, chain.sweep_seconds.end());
    std::nth_element(times.begin(), times.begin() + times.size() / 2, times.end());
    best = std::min(best, times[times.size() / 2]);
  }
  return best;
}

Outcome criterion_scaling() {
  Outcome out;
  struct Scale {
    int D = 10;
    long long N = 2500;
    int K = 8;
    int V = 24;
    int C = 3;
  };

  // Per-read sweep work follows the root-to-leaf path of the read's taxon,
  // so the V axis is exercised in the regime where reads actually traverse
  // paths of length ~V: a ladder tree with strongly negative prior log-odds
  // pushes the simulated reads to the deep leaves. On shallow-path data the
  // sweep is cheaper than linear in V.
  auto measure = [&](const Scale& s) {
    const PhyloTree tree = generate_tree(s.V, TreeShape::kCaterpillar, 0);
    LtnHyperparams hyper;
    hyper.K = s.K;
    hyper.C = s.C;
    hyper.mu0.assign(tree.num_internal(), -5.5);
    LtnSimOptions options;
    options.D = s.D;
    options.tokens_per_sample = s.N;
    options.seed = 777;
    const auto [corpus, truth] = generate_ltn_corpus(tree, hyper, options);
    return sweep_time(corpus, tree, hyper);
  };

  const Scale base;
  const double t0 = measure(base);
  auto factor_of = [&](Scale s) { return measure(s) / t0; };

  Scale dd = base;
  dd.D *= 2;
  Scale nn = base;
  nn.N *= 2;
  Scale kk = base;
  kk.K *= 2;
  Scale vv = base;
  vv.V *= 2;
  const double fd = factor_of(dd), fn = factor_of(nn), fk = factor_of(kk), fv = factor_of(vv);
  out.require(fd >= 1.7 && fd <= 2.6, "doubling D scales by " + fmt(fd));
  out.require(fn >= 1.7 && fn <= 2.6, "doubling N scales by " + fmt(fn));
  out.require(fk >= 1.7 && fk <= 2.6, "doubling K scales by " + fmt(fk));
  out.require(fv >= 1.7 && fv <= 2.6, "doubling V scales by " + fmt(fv));

  Scale cc = base;
  cc.C = 12;
  const double fc = factor_of(cc);
  out.require(fc >= 0.9 && fc <= 1.1, "changing C scales by " + fmt(fc));
  out.note("D " + fmt(fd) + ", N " + fmt(fn) + ", K " + fmt(fk) + ", V " + fmt(fv) + ", C " +
           fmt(fc) + " (base sweep " + fmt(t0 * 1000.0) + " ms)");
  return out;
}

// ----- criterion 9 -----------------------------------------------------------

Outcome criterion_knockout() {
  Outcome out;
  // All nodes in the upper tier: C=1 applies the near-degenerate shape
  // everywhere, so per-sample compositions cannot vary and the fit behaves
  // like the baseline, splitting heterogeneous subcommunities.
  const PosteriorSummary& s = ltn_fit(2 * kReducedK, 1, 20000);
  int big = 0;
  for (double m : mean_abundances(s))
    if (m >= 0.05) ++big;
  out.require(big > kReducedK,
              "knocked-out fit keeps only " + std::to_string(big) + " active subcommunities");
  out.note(std::to_string(big) + " subcommunities above 0.05");
  return out;
}

// ----- criterion 10 ----------------------------------------------------------

Outcome criterion_determinism() {
  Outcome out;
  const char* cli_env = std::getenv("LTNLDA_CLI");
  const std::string cli = cli_env ? cli_env : "build/tools/ltnlda";
  if (!fs::exists(cli)) {
    out.require(false, "cli binary not found at " + cli + " (set LTNLDA_CLI)");
    return out;
  }

  const fs::path work = fs::temp_directory_path() / "ltnlda_acceptance_cli";
  fs::remove_all(work);
  fs::create_directories(work);
  auto run = [&](const std::string& args) {
    const std::string cmd = cli + " " + args + " > /dev/null 2>&1";
    return std::system(cmd.c_str()) == 0;
  };
  const std::string w = work.string();

  bool ok = true;
  ok = ok && run("simulate --model ltn --out " + w + "/sim --V 8 --D 6 --N 300 --K 2 --C 3 --seed 5 --tree-shape balanced");
  ok = ok && run("fit-ltn --counts " + w + "/sim/counts.csv --tree " + w +
                 "/sim/tree.newick --out " + w +
                 "/fit --K 2 --C 3 --iters 120 --burnin 60 --thin 3 --seed 7 --threads 2");
  ok = ok && run("fit-lda --counts " + w + "/sim/counts.csv --out " + w +
                 "/fitlda --K 2 --iters 120 --burnin 60 --thin 3 --seed 7");
  ok = ok && run("summarize --chain " + w + "/fit --tree " + w + "/sim/tree.newick --out " + w +
                 "/summ --truth " + w + "/sim/truth.json");
  ok = ok && run("summarize --chain " + w + "/fitlda --out " + w + "/summlda");
  ok = ok && run("perplexity --summary " + w + "/summ --counts " + w + "/sim/counts.csv --tree " +
                 w + "/sim/tree.newick --out " + w +
                 "/perp --iters 60 --burnin 20 --thin 2 --seed 9");
  ok = ok && run("cv-grid --counts " + w + "/sim/counts.csv --tree " + w +
                 "/sim/tree.newick --out " + w +
                 "/cv --K-grid 2 --C-grid 2,3 --folds 3 --fit-iters 60 --fit-burnin 30 "
                 "--fit-thin 2 --eval-iters 40 --eval-burnin 20 --eval-thin 2 --seed 11 "
                 "--threads 2");
  ok = ok && run("compare --summary-a " + w + "/summ --summary-b " + w + "/summ --out " + w +
                 "/comp --truth " + w + "/sim/truth.json");
  ok = ok && run("export-tree --tree " + w + "/sim/tree.newick --out " + w + "/tree");
  out.require(ok, "pipeline subcommand failed");
  if (!ok) return out;

  const std::vector<std::string> dirs = {"sim",  "fit", "fitlda", "summ", "summlda",
                                         "perp", "cv",  "comp",   "tree"};
  for (const std::string& dir : dirs) {
    if (!run("replay --manifest " + w + "/" + dir + "/manifest.json --out " + w + "/" + dir +
             "_replay")) {
      out.require(false, "replay failed for " + dir);
      continue;
    }
    for (const auto& entry : fs::directory_iterator(work / dir)) {
      const std::string name = entry.path().filename().string();
      if (name == "manifest.json") continue;
      const fs::path other = work / (dir + "_replay") / name;
      if (!fs::exists(other)) {
        out.require(false, dir + "/" + name + " missing in replay");
        continue;
      }
      out.require(read_text_file(entry.path().string()) == read_text_file(other.string()),
                  dir + "/" + name + " differs under replay");
    }
  }
  if (out.pass) out.note("9 subcommands byte-identical under replay");
  return out;
}

struct Criterion {
  int id;
  std::string name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  g_threads = static_cast<int>(std::max(2u, std::thread::hardware_concurrency()));

  const std::vector<Criterion> criteria = {
      {1, "transform round trip", criterion_transforms},
      {2, "PG sampler moments and switch continuity", criterion_pg_moments},
      {3, "sampler stationarity (joint vs successive)", criterion_stationarity},
      {4, "desk-scale recovery", criterion_recovery},
      {5, "robustness to overspecified K", criterion_robustness},
      {6, "perplexity ordering over K", criterion_perplexity_ordering},
      {7, "perplexity and L2 over C", criterion_c_selection},
      {8, "linear scaling of sweep time", criterion_scaling},
      {9, "knockout variant splits like the baseline", criterion_knockout},
      {10, "manifest determinism", criterion_determinism},
  };

  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const Criterion& criterion : criteria) {
    if (!selected.empty() && !selected.count(criterion.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criterion.run();
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.detail = std::string("exception: ") + e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] criterion %d: %s (%s) [%.1f s]\n", outcome.pass ? "PASS" : "FAIL",
                criterion.id, criterion.name.c_str(), outcome.detail.c_str(), seconds);
    std::fflush(stdout);
    if (!outcome.pass) ++failures;
  }
  return failures;
}
