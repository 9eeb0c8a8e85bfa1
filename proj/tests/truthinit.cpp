// scratch tool: does the chain stay near the generative truth when started there?
#include <cstdio>

#include "ltnlda/posterior.hpp"
#include "ltnlda/simulate.hpp"

using namespace ltnlda;

int main(int argc, char** argv) {
  const std::uint64_t tree_seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 101;
  const std::uint64_t data_seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 202;
  const int iters = argc > 3 ? std::atoi(argv[3]) : 1000;
  const bool truth_init = argc > 4 ? std::atoi(argv[4]) != 0 : true;

  const PhyloTree tree = generate_tree(16, TreeShape::kRandom, tree_seed);
  LtnHyperparams hyper;
  hyper.K = 3;
  hyper.C = 3;
  hyper.validate_and_expand(tree.num_internal());
  LtnSimOptions options;
  options.D = 20;
  options.tokens_per_sample = 2000;
  options.seed = data_seed;
  const auto [corpus, truth] = generate_ltn_corpus(tree, hyper, options);

  ChainConfig config;
  config.iterations = iters;
  config.burn_in = iters / 2;
  config.thin = (iters / 2 + 99) / 100;
  config.seed = 999;
  config.threads = 2;

  LtnSampler sampler(corpus, tree, hyper, config);
  sampler.init();
  if (truth_init) {
    sampler.set_global(truth.mu, truth.tau);
    sampler.logodds_mut() = truth.psi;
    sampler.assignments_mut() = truth.z;
    sampler.rebuild_counts();
    std::printf("log-joint at truth: %.1f\n", sampler.log_joint());
  } else {
    std::printf("log-joint at random init: %.1f\n", sampler.log_joint());
  }

  LtnChain chain;
  chain.D = sampler.D();
  chain.K = sampler.K();
  chain.p = sampler.p();
  for (int d = 0; d < corpus.num_samples(); ++d)
    chain.sample_totals.push_back(corpus.sample_total(d));
  for (int t = 1; t <= config.iterations; ++t) {
    sampler.sweep(t);
    if (t % 100 == 0) std::printf("iter %5d log-joint %.1f\n", t, sampler.log_joint());
    if (t > config.burn_in && (t - config.burn_in - 1) % config.thin == 0)
      chain.snapshots.push_back(sampler.snapshot(t));
  }

  const PosteriorSummary s = summarize_ltn(chain, tree, hyper, corpus.sample_ids, corpus.labels);
  const std::vector<int> match = align_labels(truth.beta_k, s.beta_k, 3, 16);
  std::vector<double> phi_est(static_cast<std::size_t>(20) * 3);
  for (int d = 0; d < 20; ++d)
    for (int k = 0; k < 3; ++k)
      phi_est[static_cast<std::size_t>(d) * 3 + k] = s.phi_at(d, match[k]);
  std::vector<double> beta_est(static_cast<std::size_t>(3) * 16);
  for (int k = 0; k < 3; ++k)
    for (int v = 0; v < 16; ++v)
      beta_est[static_cast<std::size_t>(k) * 16 + v] = s.beta_k_at(match[k], v);
  std::printf("L2 phi    = %.4f\n", mean_l2(phi_est, truth.phi, 20, 3));
  std::printf("L2 beta_k = %.4f\n", mean_l2(beta_est, truth.beta_k, 3, 16));

  // oracle floor: empirical phi from the true assignments
  std::vector<double> phi_oracle(static_cast<std::size_t>(20) * 3, 0.0);
  for (int d = 0; d < 20; ++d)
    for (int k : truth.z[d]) phi_oracle[static_cast<std::size_t>(d) * 3 + k] += 1.0 / 2000.0;
  std::printf("L2 phi oracle floor = %.4f\n", mean_l2(phi_oracle, truth.phi, 20, 3));
  return 0;
}
