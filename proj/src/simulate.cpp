#include "ltnlda/simulate.hpp"

#include <cmath>

#include "ltnlda/rng.hpp"

namespace ltnlda {

namespace {

struct TreeBuilder {
  std::vector<TreeNode> nodes;
  int next_leaf = 1;

  int make_leaf() {
    const int id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    nodes[id].label = "t" + std::to_string(next_leaf++);
    nodes[id].leaf_count = 1;
    return id;
  }

  int make_internal(int left, int right) {
    const int id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    nodes[id].left = left;
    nodes[id].right = right;
    nodes[left].parent = id;
    nodes[right].parent = id;
    return id;
  }

  int build(int n, TreeShape shape, Rng& rng) {
    if (n == 1) return make_leaf();
    int left_size;
    switch (shape) {
      case TreeShape::kBalanced:
        left_size = (n + 1) / 2;
        break;
      case TreeShape::kCaterpillar:
        left_size = 1;
        break;
      default:
        left_size = 1 + static_cast<int>(rng.uniform_int(n - 1));
    }
    const int left = build(left_size, shape, rng);
    const int right = build(n - left_size, shape, rng);
    return make_internal(left, right);
  }
};

}  // namespace

TreeShape tree_shape_from_string(const std::string& name) {
  if (name == "balanced") return TreeShape::kBalanced;
  if (name == "caterpillar") return TreeShape::kCaterpillar;
  if (name == "random") return TreeShape::kRandom;
  throw ConfigError("unknown tree shape '" + name + "' (balanced|caterpillar|random)");
}

std::string to_string(TreeShape shape) {
  switch (shape) {
    case TreeShape::kBalanced:
      return "balanced";
    case TreeShape::kCaterpillar:
      return "caterpillar";
    default:
      return "random";
  }
}

PhyloTree generate_tree(int V, TreeShape shape, std::uint64_t seed) {
  if (V < 2) throw ConfigError("tree generation needs V >= 2");
  Rng rng(mix_seed(seed, 0x7133ULL));
  TreeBuilder builder;
  const int root = builder.build(V, shape, rng);
  return PhyloTree::from_parts(std::move(builder.nodes), root);
}

std::pair<Corpus, LtnGroundTruth> generate_ltn_corpus(const PhyloTree& tree,
                                                      const LtnHyperparams& hyper_in,
                                                      const LtnSimOptions& options) {
  if (options.D < 1) throw ConfigError("simulation needs D >= 1");
  if (options.tokens_per_sample < 0) throw ConfigError("tokens per sample must be >= 0");
  LtnHyperparams hyper = hyper_in;
  const int p = tree.num_internal();
  const int V = tree.num_leaves();
  const int K = hyper.K;
  hyper.validate_and_expand(p);
  const NodePartition partition = partition_nodes(tree, hyper.C);

  LtnGroundTruth truth;
  truth.D = options.D;
  truth.K = K;
  truth.V = V;
  truth.p = p;
  truth.mu.resize(static_cast<std::size_t>(K) * p);
  truth.tau.resize(static_cast<std::size_t>(K) * p);
  truth.psi.resize(static_cast<std::size_t>(options.D) * K * p);
  truth.phi.resize(static_cast<std::size_t>(options.D) * K);
  truth.z.resize(options.D);
  truth.y.assign(static_cast<std::size_t>(options.D) * K * tree.num_nodes(), 0);

  Rng global(mix_seed(options.seed, 0x51b0ULL));
  if (options.fixed_mu) {
    if (options.fixed_mu->size() != truth.mu.size() ||
        !options.fixed_tau || options.fixed_tau->size() != truth.tau.size())
      throw ConfigError("fixed mu/tau have the wrong shape");
    truth.mu = *options.fixed_mu;
    truth.tau = *options.fixed_tau;
  } else {
    for (int k = 0; k < K; ++k)
      for (int i = 0; i < p; ++i) {
        truth.mu[k * p + i] = global.normal(hyper.mu0[i], std::sqrt(hyper.lambda0[i]));
        truth.tau[k * p + i] =
            global.inverse_gamma(partition.upper[i] ? hyper.a1 : hyper.a2, hyper.b);
      }
  }
  if (options.knockout_zero_tau)
    std::fill(truth.tau.begin(), truth.tau.end(), 0.0);

  std::vector<std::vector<int>> tokens(options.D);
  for (int d = 0; d < options.D; ++d) {
    Rng rng(mix_seed(options.seed, 0xd00dULL, d));
    const std::vector<double> phi_d = rng.dirichlet_symmetric(hyper.alpha, K);
    for (int k = 0; k < K; ++k) truth.phi[static_cast<std::size_t>(d) * K + k] = phi_d[k];

    std::vector<double> expits(static_cast<std::size_t>(K) * p);
    for (int k = 0; k < K; ++k)
      for (int i = 0; i < p; ++i) {
        const double sd = std::sqrt(truth.tau[k * p + i]);
        const double psi = truth.mu[k * p + i] + (sd > 0.0 ? sd * rng.normal() : 0.0);
        truth.psi[(static_cast<std::size_t>(d) * K + k) * p + i] = psi;
        expits[k * p + i] = expit(psi);
      }

    tokens[d].reserve(static_cast<std::size_t>(options.tokens_per_sample));
    truth.z[d].reserve(static_cast<std::size_t>(options.tokens_per_sample));
    long long* yd = truth.y.data() + static_cast<std::size_t>(d) * K * tree.num_nodes();
    for (long long n = 0; n < options.tokens_per_sample; ++n) {
      const int k = rng.categorical(phi_d);
      int id = tree.root();
      ++yd[static_cast<std::size_t>(k) * tree.num_nodes() + id];
      while (!tree.node(id).is_leaf()) {
        const TreeNode& node = tree.node(id);
        const double theta = expits[static_cast<std::size_t>(k) * p + node.internal_index];
        id = rng.uniform() < theta ? node.left : node.right;
        ++yd[static_cast<std::size_t>(k) * tree.num_nodes() + id];
      }
      tokens[d].push_back(tree.node(id).leaf_index);
      truth.z[d].push_back(k);
    }
  }

  truth.beta_k.resize(static_cast<std::size_t>(K) * V);
  for (int k = 0; k < K; ++k) {
    const std::vector<double> mu_k(truth.mu.begin() + static_cast<std::size_t>(k) * p,
                                   truth.mu.begin() + static_cast<std::size_t>(k + 1) * p);
    const std::vector<double> beta = psi_to_beta(tree, mu_k);
    std::copy(beta.begin(), beta.end(), truth.beta_k.begin() + static_cast<std::size_t>(k) * V);
  }
  truth.beta_dk.resize(static_cast<std::size_t>(options.D) * K * V);
  for (int d = 0; d < options.D; ++d)
    for (int k = 0; k < K; ++k) {
      const std::vector<double> psi_dk(
          truth.psi.begin() + (static_cast<std::size_t>(d) * K + k) * p,
          truth.psi.begin() + (static_cast<std::size_t>(d) * K + k + 1) * p);
      const std::vector<double> beta = psi_to_beta(tree, psi_dk);
      std::copy(beta.begin(), beta.end(),
                truth.beta_dk.begin() + (static_cast<std::size_t>(d) * K + k) * V);
    }

  Corpus corpus;
  corpus.labels = tree.leaf_labels();
  for (int d = 0; d < options.D; ++d) corpus.sample_ids.push_back("s" + std::to_string(d + 1));
  corpus.tokens = std::move(tokens);
  corpus.counts.assign(options.D, std::vector<long long>(V, 0));
  corpus.rebuild_counts();
  return {std::move(corpus), std::move(truth)};
}

std::pair<Corpus, LdaGroundTruth> generate_lda_corpus(const LdaHyperparams& hyper, int V, int D,
                                                      long long tokens_per_sample,
                                                      std::uint64_t seed) {
  hyper.validate();
  if (V < 1) throw ConfigError("simulation needs V >= 1");
  if (D < 1) throw ConfigError("simulation needs D >= 1");
  const int K = hyper.K;

  LdaGroundTruth truth;
  truth.D = D;
  truth.K = K;
  truth.V = V;
  truth.beta_k.resize(static_cast<std::size_t>(K) * V);
  truth.phi.resize(static_cast<std::size_t>(D) * K);
  truth.z.resize(D);

  Rng global(mix_seed(seed, 0x1da51bULL));
  for (int k = 0; k < K; ++k) {
    const std::vector<double> beta = global.dirichlet_symmetric(hyper.gamma, V);
    std::copy(beta.begin(), beta.end(), truth.beta_k.begin() + static_cast<std::size_t>(k) * V);
  }

  std::vector<std::vector<int>> tokens(D);
  for (int d = 0; d < D; ++d) {
    Rng rng(mix_seed(seed, 0x1dadULL, d));
    const std::vector<double> phi_d = rng.dirichlet_symmetric(hyper.alpha, K);
    for (int k = 0; k < K; ++k) truth.phi[static_cast<std::size_t>(d) * K + k] = phi_d[k];
    tokens[d].reserve(static_cast<std::size_t>(tokens_per_sample));
    truth.z[d].reserve(static_cast<std::size_t>(tokens_per_sample));
    for (long long n = 0; n < tokens_per_sample; ++n) {
      const int k = rng.categorical(phi_d);
      const std::span<const double> beta_k(truth.beta_k.data() + static_cast<std::size_t>(k) * V,
                                           static_cast<std::size_t>(V));
      tokens[d].push_back(rng.categorical(beta_k));
      truth.z[d].push_back(k);
    }
  }

  Corpus corpus;
  for (int v = 1; v <= V; ++v) corpus.labels.push_back("t" + std::to_string(v));
  for (int d = 0; d < D; ++d) corpus.sample_ids.push_back("s" + std::to_string(d + 1));
  corpus.tokens = std::move(tokens);
  corpus.counts.assign(D, std::vector<long long>(V, 0));
  corpus.rebuild_counts();
  return {std::move(corpus), std::move(truth)};
}

}  // namespace ltnlda
