#include "ltnlda/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ltnlda/parallel.hpp"
#include "ltnlda/posterior.hpp"

namespace ltnlda {

namespace {

Corpus single_sample_corpus(const Corpus& source, int d, std::vector<int> tokens) {
  Corpus one;
  one.labels = source.labels;
  one.sample_ids = {source.sample_ids[d]};
  one.tokens = {std::move(tokens)};
  one.counts.assign(1, std::vector<long long>(source.num_taxa(), 0));
  one.rebuild_counts();
  return one;
}

std::vector<long long> leaf_histogram(const std::vector<int>& tokens, int V) {
  std::vector<long long> counts(V, 0);
  for (int v : tokens) ++counts[v];
  return counts;
}

}  // namespace

SplitSample split_document(const std::vector<int>& tokens) {
  if (tokens.size() < 2)
    throw DataError("document completion needs at least two reads per test sample");
  SplitSample split;
  split.fit_half.reserve((tokens.size() + 1) / 2);
  split.score_half.reserve(tokens.size() / 2);
  for (std::size_t n = 0; n < tokens.size(); ++n)
    (n % 2 == 0 ? split.fit_half : split.score_half).push_back(tokens[n]);
  return split;
}

void PerplexityResult::finalize() {
  total_loglik = std::accumulate(loglik.begin(), loglik.end(), 0.0);
  total_tokens = std::accumulate(tokens.begin(), tokens.end(), 0LL);
  if (total_tokens <= 0) throw DataError("no reads to score");
  perplexity = std::exp(-total_loglik / static_cast<double>(total_tokens));
}

PerplexityResult perplexity_ltn(const std::vector<double>& trained_mu,
                                const std::vector<double>& trained_tau,
                                const Corpus& test_corpus, const PhyloTree& tree,
                                const LtnHyperparams& hyper, const ChainConfig& config,
                                int threads) {
  const int D = test_corpus.num_samples();
  const int V = tree.num_leaves();
  const int K = hyper.K;
  const int p = tree.num_internal();
  if (D == 0) throw DataError("empty test corpus");
  if (trained_mu.size() != static_cast<std::size_t>(K) * p ||
      trained_tau.size() != static_cast<std::size_t>(K) * p)
    throw ConfigError("trained mu/tau do not match K and the tree");

  PerplexityResult result;
  result.loglik.assign(D, 0.0);
  result.tokens.assign(D, 0);
  result.mc_iterations = config.num_snapshots();

  parallel_for(D, threads, [&](int d) {
    const SplitSample split = split_document(test_corpus.tokens[d]);
    const std::vector<long long> score_counts = leaf_histogram(split.score_half, V);
    const Corpus one = single_sample_corpus(test_corpus, d, split.fit_half);

    ChainConfig cfg = config;
    cfg.fixed_global = true;
    cfg.threads = 1;
    cfg.seed = mix_seed(config.seed, 0x9e4fULL, d);
    const LtnChain chain = run_ltn_chain(one, tree, hyper, cfg, &trained_mu, &trained_tau);

    const double denom = static_cast<double>(split.fit_half.size()) + K * hyper.alpha;
    double loglik = 0.0;
    std::vector<double> token_prob(V);
    for (const LtnSnapshot& snap : chain.snapshots) {
      std::fill(token_prob.begin(), token_prob.end(), 0.0);
      for (int k = 0; k < K; ++k) {
        const double phi = (snap.y_root[k] + hyper.alpha) / denom;
        const std::vector<double> psi_k(snap.psi.begin() + static_cast<std::size_t>(k) * p,
                                        snap.psi.begin() + static_cast<std::size_t>(k + 1) * p);
        const std::vector<double> beta = psi_to_beta(tree, psi_k);
        for (int v = 0; v < V; ++v) token_prob[v] += phi * beta[v];
      }
      for (int v = 0; v < V; ++v)
        if (score_counts[v] > 0) loglik += score_counts[v] * std::log(token_prob[v]);
    }
    result.loglik[d] = loglik / chain.snapshots.size();
    result.tokens[d] = static_cast<long long>(split.score_half.size());
  });

  result.finalize();
  return result;
}

PerplexityResult perplexity_lda(const std::vector<double>& trained_beta,
                                const Corpus& test_corpus, const LdaHyperparams& hyper,
                                const ChainConfig& config, int threads) {
  const int D = test_corpus.num_samples();
  const int V = test_corpus.num_taxa();
  const int K = hyper.K;
  if (D == 0) throw DataError("empty test corpus");
  if (trained_beta.size() != static_cast<std::size_t>(K) * V)
    throw ConfigError("trained beta does not match K and V");

  PerplexityResult result;
  result.loglik.assign(D, 0.0);
  result.tokens.assign(D, 0);
  result.mc_iterations = config.num_snapshots();

  parallel_for(D, threads, [&](int d) {
    const SplitSample split = split_document(test_corpus.tokens[d]);
    const std::vector<long long> score_counts = leaf_histogram(split.score_half, V);
    const Corpus one = single_sample_corpus(test_corpus, d, split.fit_half);

    ChainConfig cfg = config;
    cfg.threads = 1;
    cfg.seed = mix_seed(config.seed, 0x9e4fULL, d);
    const LdaChain chain = run_lda_chain(one, hyper, cfg, &trained_beta);

    const double denom = static_cast<double>(split.fit_half.size()) + K * hyper.alpha;
    double loglik = 0.0;
    std::vector<double> token_prob(V);
    for (const LdaSnapshot& snap : chain.snapshots) {
      std::fill(token_prob.begin(), token_prob.end(), 0.0);
      for (int k = 0; k < K; ++k) {
        const double phi = (snap.n_dk[k] + hyper.alpha) / denom;
        for (int v = 0; v < V; ++v)
          token_prob[v] += phi * trained_beta[static_cast<std::size_t>(k) * V + v];
      }
      for (int v = 0; v < V; ++v)
        if (score_counts[v] > 0) loglik += score_counts[v] * std::log(token_prob[v]);
    }
    result.loglik[d] = loglik / chain.snapshots.size();
    result.tokens[d] = static_cast<long long>(split.score_half.size());
  });

  result.finalize();
  return result;
}

int inflection_index(const std::vector<double>& means, double tol) {
  if (means.empty()) throw ConfigError("inflection of an empty curve");
  for (std::size_t j = 0; j + 1 < means.size(); ++j) {
    const double improvement = (means[j] - means[j + 1]) / means[j];
    if (improvement < tol) return static_cast<int>(j);
  }
  return static_cast<int>(means.size()) - 1;
}

CvResult cv_grid(const Corpus& corpus, const PhyloTree& tree, const CvOptions& options) {
  if (options.folds < 2) throw ConfigError("cross-validation needs at least 2 folds");
  if (options.k_grid.empty()) throw ConfigError("empty K grid");
  const bool is_ltn = options.model == "ltn";
  if (!is_ltn && options.model != "lda")
    throw ConfigError("cv model must be 'ltn' or 'lda'");
  if (is_ltn && options.c_grid.empty()) throw ConfigError("empty C grid");
  const std::vector<int> c_grid = is_ltn ? options.c_grid : std::vector<int>{0};
  const int D = corpus.num_samples();
  if (options.folds > D) throw ConfigError("more folds than samples");

  CvResult result;

  // Deterministic fold assignment: seeded shuffle, then round robin.
  std::vector<int> order(D);
  std::iota(order.begin(), order.end(), 0);
  Rng fold_rng(mix_seed(options.seed, 0xf01d5ULL));
  for (int i = D - 1; i > 0; --i)
    std::swap(order[i], order[fold_rng.uniform_int(static_cast<std::uint64_t>(i) + 1)]);
  result.fold_assignment.assign(options.folds, {});
  for (int i = 0; i < D; ++i) result.fold_assignment[i % options.folds].push_back(order[i]);
  for (auto& fold : result.fold_assignment) {
    std::sort(fold.begin(), fold.end());
    if (fold.empty()) throw ConfigError("a cross-validation fold is empty");
  }

  auto subset_corpus = [&](const std::vector<int>& samples) {
    Corpus sub;
    sub.labels = corpus.labels;
    for (int d : samples) {
      sub.sample_ids.push_back(corpus.sample_ids[d]);
      sub.tokens.push_back(corpus.tokens[d]);
      sub.counts.push_back(corpus.counts[d]);
    }
    return sub;
  };

  struct Job {
    int K, C, fold;
  };
  std::vector<Job> jobs;
  for (int K : options.k_grid)
    for (int C : c_grid)
      for (int f = 0; f < options.folds; ++f) jobs.push_back({K, C, f});
  result.cells.resize(jobs.size());

  parallel_for(static_cast<int>(jobs.size()), options.threads, [&](int j) {
    const Job& job = jobs[j];
    std::vector<int> train_samples;
    for (int f = 0; f < options.folds; ++f)
      if (f != job.fold)
        train_samples.insert(train_samples.end(), result.fold_assignment[f].begin(),
                             result.fold_assignment[f].end());
    std::sort(train_samples.begin(), train_samples.end());
    const Corpus train = subset_corpus(train_samples);
    const Corpus test = subset_corpus(result.fold_assignment[job.fold]);

    const std::uint64_t cell_seed =
        mix_seed(mix_seed(options.seed, job.K, job.C), 0xce11ULL, job.fold);

    PerplexityResult perp;
    if (is_ltn) {
      LtnHyperparams hyper = options.base;
      hyper.K = job.K;
      hyper.C = job.C;
      ChainConfig fit = options.fit_config;
      fit.threads = 1;
      fit.seed = mix_seed(cell_seed, 0xf17ULL);
      const LtnChain chain = run_ltn_chain(train, tree, hyper, fit);
      const PosteriorSummary summary =
          summarize_ltn(chain, tree, hyper, train.sample_ids, train.labels);
      ChainConfig eval = options.eval_config;
      eval.seed = mix_seed(cell_seed, 0xe7a1ULL);
      perp = perplexity_ltn(summary.mu_hat, summary.tau_hat, test, tree, hyper, eval, 1);
    } else {
      LdaHyperparams hyper;
      hyper.K = job.K;
      hyper.alpha = options.base.alpha;
      hyper.gamma = options.lda_gamma;
      ChainConfig fit = options.fit_config;
      fit.threads = 1;
      fit.seed = mix_seed(cell_seed, 0xf17ULL);
      const LdaChain chain = run_lda_chain(train, hyper, fit);
      const PosteriorSummary summary =
          summarize_lda(chain, hyper, train.sample_ids, train.labels);
      ChainConfig eval = options.eval_config;
      eval.seed = mix_seed(cell_seed, 0xe7a1ULL);
      perp = perplexity_lda(summary.beta_k, test, hyper, eval, 1);
    }

    CvCell cell;
    cell.K = job.K;
    cell.C = job.C;
    cell.fold = job.fold;
    cell.perplexity = perp.perplexity;
    cell.loglik = perp.total_loglik;
    cell.tokens = perp.total_tokens;
    result.cells[j] = cell;
  });

  // Fold means and standard errors per grid point.
  for (int K : options.k_grid)
    for (int C : c_grid) {
      std::vector<double> values;
      for (const CvCell& cell : result.cells)
        if (cell.K == K && cell.C == C) values.push_back(cell.perplexity);
      CvCurvePoint pt;
      pt.K = K;
      pt.C = C;
      pt.folds = static_cast<int>(values.size());
      pt.mean = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
      double ss = 0.0;
      for (double v : values) ss += (v - pt.mean) * (v - pt.mean);
      pt.se = values.size() > 1
                  ? std::sqrt(ss / (values.size() - 1) / static_cast<double>(values.size()))
                  : 0.0;
      result.curves.push_back(pt);
    }

  auto mean_at = [&](int K, int C) {
    for (const CvCurvePoint& pt : result.curves)
      if (pt.K == K && pt.C == C) return pt.mean;
    throw ConfigError("missing grid point");
  };

  if (is_ltn) {
    // Stage one: flag C on each K curve, take the median flag as consensus.
    std::vector<int> flags;
    for (int K : options.k_grid) {
      std::vector<double> curve;
      for (int C : c_grid) curve.push_back(mean_at(K, C));
      const int c_flag = c_grid[inflection_index(curve, options.inflection_tol)];
      result.c_inflection_per_k.emplace_back(K, c_flag);
      flags.push_back(c_flag);
    }
    std::sort(flags.begin(), flags.end());
    result.c_star = flags[flags.size() / 2];
  } else {
    result.c_star = 0;
  }

  // Stage two: flag K on the curve at the consensus C.
  std::vector<double> k_curve;
  for (int K : options.k_grid) k_curve.push_back(mean_at(K, result.c_star));
  result.k_star = options.k_grid[inflection_index(k_curve, options.inflection_tol)];

  return result;
}

}  // namespace ltnlda
