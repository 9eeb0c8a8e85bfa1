// scratch tool: full-scale robustness run (D=50, N=10000, V=49, K_true=4, C=5)
#include <chrono>
#include <cstdio>

#include "ltnlda/posterior.hpp"
#include "ltnlda/simulate.hpp"

using namespace ltnlda;

int main(int argc, char** argv) {
  const int kfit = argc > 1 ? std::atoi(argv[1]) : 10;
  const int iters = argc > 2 ? std::atoi(argv[2]) : 6000;
  const std::uint64_t data_seed = argc > 3 ? std::strtoull(argv[3], nullptr, 10) : 33;
  const int D = argc > 4 ? std::atoi(argv[4]) : 50;
  const long long N = argc > 5 ? std::atoll(argv[5]) : 10000;
  const int V = argc > 6 ? std::atoi(argv[6]) : 49;
  const int Ktrue = argc > 7 ? std::atoi(argv[7]) : 4;
  const int C = argc > 8 ? std::atoi(argv[8]) : 5;
  const int shape = argc > 9 ? std::atoi(argv[9]) : 1;  // 0 balanced, -1 caterpillar, else random seed

  const PhyloTree tree = generate_tree(
      V,
      shape == 0 ? TreeShape::kBalanced
                 : (shape < 0 ? TreeShape::kCaterpillar : TreeShape::kRandom),
      shape > 0 ? static_cast<std::uint64_t>(shape) : 0);
  LtnHyperparams truth_hyper;
  truth_hyper.K = Ktrue;
  truth_hyper.C = C;
  truth_hyper.validate_and_expand(tree.num_internal());
  LtnSimOptions options;
  options.D = D;
  options.tokens_per_sample = N;
  options.seed = data_seed;
  const auto [corpus, truth] = generate_ltn_corpus(tree, truth_hyper, options);

  double het = 0.0;
  for (int d = 0; d < D; ++d)
    for (int k = 0; k < Ktrue; ++k) {
      double l1 = 0.0;
      for (int v = 0; v < V; ++v)
        l1 += std::fabs(
            truth.beta_dk[(static_cast<std::size_t>(d) * Ktrue + k) * V + v] -
            truth.beta_k[static_cast<std::size_t>(k) * V + v]);
      het += l1 / (D * Ktrue);
    }
  std::printf("V=%d D=%d N=%lld Ktrue=%d C=%d fitK=%d heterogeneity=%.3f\n", V, D, N, Ktrue, C,
              kfit, het);

  LtnHyperparams hyper = truth_hyper;
  hyper.K = kfit;
  ChainConfig config;
  config.iterations = iters;
  config.burn_in = iters / 2;
  config.thin = (iters / 2 + 99) / 100;
  config.seed = 31337;
  config.threads = 2;

  const auto t0 = std::chrono::steady_clock::now();
  const LtnChain chain = run_ltn_chain(corpus, tree, hyper, config);
  std::printf("fit took %.0f s\n",
              std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  const PosteriorSummary s = summarize_ltn(chain, tree, hyper, corpus.sample_ids, corpus.labels);

  const std::vector<int> match = align_subset(truth.beta_k, Ktrue, s.beta_k, kfit, V);
  std::vector<double> phi_est(static_cast<std::size_t>(D) * Ktrue);
  for (int d = 0; d < D; ++d)
    for (int k = 0; k < Ktrue; ++k)
      phi_est[static_cast<std::size_t>(d) * Ktrue + k] = s.phi_at(d, match[k]);
  std::printf("L2 phi (matched) = %.4f\n", mean_l2(phi_est, truth.phi, D, Ktrue));

  std::printf("abundances:");
  for (int k = 0; k < kfit; ++k) {
    double mean = 0.0;
    for (int d = 0; d < D; ++d) mean += s.phi_at(d, k) / D;
    std::printf(" %.3f", mean);
  }
  std::printf("\n");
  double extras_max = 0.0;
  for (int k = 0; k < kfit; ++k) {
    bool matched = false;
    for (int j = 0; j < Ktrue; ++j) matched = matched || match[j] == k;
    if (matched) continue;
    double mean = 0.0;
    for (int d = 0; d < D; ++d) mean += s.phi_at(d, k) / D;
    extras_max = std::max(extras_max, mean);
  }
  std::printf("max extra abundance = %.4f\n", extras_max);

  // median per-sample L1 between matched fitted abundances and the truth
  std::vector<double> l1s(D, 0.0);
  for (int d = 0; d < D; ++d)
    for (int k = 0; k < Ktrue; ++k)
      l1s[d] += std::fabs(s.phi_at(d, match[k]) -
                          truth.phi[static_cast<std::size_t>(d) * Ktrue + k]);
  std::nth_element(l1s.begin(), l1s.begin() + D / 2, l1s.end());
  std::printf("median per-sample L1 to truth = %.4f\n", l1s[D / 2]);

  // baseline arm at the same overspecified K
  LdaHyperparams lda;
  lda.K = kfit;
  ChainConfig lda_config = config;
  const LdaChain lchain = run_lda_chain(corpus, lda, lda_config);
  const PosteriorSummary ls = summarize_lda(lchain, lda, corpus.sample_ids, corpus.labels);
  int big = 0;
  std::printf("lda abundances:");
  for (int k = 0; k < kfit; ++k) {
    double mean = 0.0;
    for (int d = 0; d < D; ++d) mean += ls.phi_at(d, k) / D;
    std::printf(" %.3f", mean);
    if (mean >= 0.05) ++big;
  }
  std::printf("  -> %d above 0.05\n", big);
  return 0;
}
