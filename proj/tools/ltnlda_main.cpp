// Batch front end: simulation, fitting, summarization, scoring and model
// selection, wired for reproducibility. Every run writes a manifest with its
// resolved options and input digests; `replay` re-executes a manifest and must
// reproduce the primary CSV outputs byte for byte.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ltnlda/corpus.hpp"
#include "ltnlda/evaluation.hpp"
#include "ltnlda/io.hpp"
#include "ltnlda/lda_gibbs.hpp"
#include "ltnlda/ltn_gibbs.hpp"
#include "ltnlda/posterior.hpp"
#include "ltnlda/simulate.hpp"
#include "ltnlda/tree.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ltnlda;

namespace {

constexpr const char* kVersion = "0.1.0";

std::uint64_t default_seed() {
  if (const char* env = std::getenv("LTNLDA_SEED")) return std::strtoull(env, nullptr, 10);
  return 1;
}

void ensure_out_dir(const std::string& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw DataError("cannot create output directory: " + out);
}

// "2..8" or "1,3,9" or a mix of comma-separated ranges.
std::vector<int> parse_grid(const std::string& spec) {
  std::vector<int> values;
  std::stringstream ss(spec);
  std::string token;
  while (std::getline(ss, token, ',')) {
    const auto dots = token.find("..");
    if (dots == std::string::npos) {
      values.push_back(std::stoi(token));
    } else {
      const int lo = std::stoi(token.substr(0, dots));
      const int hi = std::stoi(token.substr(dots + 2));
      if (hi < lo) throw ConfigError("bad grid range '" + token + "'");
      for (int v = lo; v <= hi; ++v) values.push_back(v);
    }
  }
  if (values.empty()) throw ConfigError("empty grid '" + spec + "'");
  return values;
}

void write_manifest(const std::string& out, const std::string& subcommand, const json& options,
                    const std::vector<std::string>& inputs, double seconds) {
  json manifest;
  manifest["tool"] = "ltnlda";
  manifest["version"] = kVersion;
  manifest["subcommand"] = subcommand;
  manifest["options"] = options;
  manifest["out"] = out;
  json in = json::array();
  for (const std::string& path : inputs) {
    json entry;
    entry["path"] = fs::absolute(path).string();
    entry["bytes"] = fs::file_size(path);
    entry["fnv64"] = fnv64_file(path);
    in.push_back(entry);
  }
  manifest["inputs"] = in;
  manifest["seconds"] = seconds;
  manifest["created_unix"] =
      std::chrono::duration_cast<std::chrono::seconds>(
          std::chrono::system_clock::now().time_since_epoch())
          .count();
  write_text_file(out + "/manifest.json", manifest.dump(2) + "\n");
}

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// ----- subcommand payloads ---------------------------------------------------
// Each command consumes a json options object; the CLI builds it from flags
// and replay feeds back the object stored in a manifest.

void cmd_simulate(const json& o) {
  Timer timer;
  const std::string out = o.at("out");
  ensure_out_dir(out);
  const std::string model = o.value("model", "ltn");
  const std::uint64_t seed = o.at("seed").get<std::uint64_t>();
  std::vector<std::string> inputs;

  if (model == "ltn") {
    PhyloTree tree = [&]() {
      if (const std::string tree_file = o.value("tree", ""); !tree_file.empty()) {
        inputs.push_back(tree_file);
        return read_newick_file(tree_file);
      }
      return generate_tree(o.at("V").get<int>(),
                           tree_shape_from_string(o.value("tree_shape", "random")),
                           mix_seed(seed, 0x7265eULL));
    }();
    LtnHyperparams hyper;
    hyper.K = o.at("K").get<int>();
    hyper.C = o.at("C").get<int>();
    hyper.alpha = o.at("alpha").get<double>();
    hyper.a1 = o.at("a1").get<double>();
    hyper.a2 = o.at("a2").get<double>();
    hyper.b = o.at("b").get<double>();
    LtnSimOptions options;
    options.D = o.at("D").get<int>();
    options.tokens_per_sample = o.at("N").get<long long>();
    options.seed = seed;
    options.knockout_zero_tau = o.value("knockout", false);
    const auto [corpus, truth] = generate_ltn_corpus(tree, hyper, options);
    write_counts_csv(corpus, out + "/counts.csv");
    write_text_file(out + "/tree.newick", to_newick(tree) + "\n");
    write_ltn_truth(out + "/truth.json", truth, to_newick(tree), seed);
  } else if (model == "lda") {
    LdaHyperparams hyper;
    hyper.K = o.at("K").get<int>();
    hyper.alpha = o.at("alpha").get<double>();
    hyper.gamma = o.at("gamma").get<double>();
    const auto [corpus, truth] =
        generate_lda_corpus(hyper, o.at("V").get<int>(), o.at("D").get<int>(),
                            o.at("N").get<long long>(), seed);
    write_counts_csv(corpus, out + "/counts.csv");
    write_lda_truth(out + "/truth.json", truth, seed);
  } else {
    throw ConfigError("unknown model '" + model + "'");
  }
  write_manifest(out, "simulate", o, inputs, timer.seconds());
}

ChainConfig chain_config_from(const json& o) {
  ChainConfig config;
  config.iterations = o.at("iters").get<int>();
  config.burn_in = o.at("burnin").get<int>();
  config.thin = o.at("thin").get<int>();
  config.seed = o.at("seed").get<std::uint64_t>();
  config.pg_threshold = o.value("pg_threshold", 30);
  config.threads = o.value("threads", 1);
  config.validate();
  return config;
}

void cmd_fit_ltn(const json& o) {
  Timer timer;
  const std::string out = o.at("out");
  ensure_out_dir(out);
  const std::string counts_path = o.at("counts");
  const std::string tree_path = o.at("tree");

  const PhyloTree tree = read_newick_file(tree_path);
  IngestOptions ingest;
  ingest.prune_threshold = o.value("prune", 0LL);
  IngestReport report;
  const Corpus raw = ingest_counts(counts_path, ingest, &report);
  const Corpus corpus = reconcile_with_tree(raw, tree);
  if (ingest.prune_threshold > 0)
    std::cerr << "pruned to " << report.taxa_after << "/" << report.taxa_before
              << " taxa, retaining " << report.retained_count_fraction * 100.0
              << "% of counts\n";

  LtnHyperparams hyper;
  hyper.K = o.at("K").get<int>();
  hyper.C = o.at("C").get<int>();
  hyper.alpha = o.at("alpha").get<double>();
  hyper.a1 = o.at("a1").get<double>();
  hyper.a2 = o.at("a2").get<double>();
  hyper.b = o.at("b").get<double>();
  hyper.validate_and_expand(tree.num_internal());

  const ChainConfig config = chain_config_from(o);
  const LtnChain chain = run_ltn_chain(corpus, tree, hyper, config);
  write_ltn_chain(out, chain, hyper, config, corpus.sample_ids, corpus.labels);
  write_manifest(out, "fit-ltn", o, {counts_path, tree_path}, timer.seconds());
}

void cmd_fit_lda(const json& o) {
  Timer timer;
  const std::string out = o.at("out");
  ensure_out_dir(out);
  const std::string counts_path = o.at("counts");

  IngestOptions ingest;
  ingest.prune_threshold = o.value("prune", 0LL);
  const Corpus corpus = ingest_counts(counts_path, ingest);

  LdaHyperparams hyper;
  hyper.K = o.at("K").get<int>();
  hyper.alpha = o.at("alpha").get<double>();
  hyper.gamma = o.at("gamma").get<double>();
  hyper.validate();

  const ChainConfig config = chain_config_from(o);
  const LdaChain chain = run_lda_chain(corpus, hyper, config);
  write_lda_chain(out, chain, hyper, config, corpus.sample_ids, corpus.labels);
  write_manifest(out, "fit-lda", o, {counts_path}, timer.seconds());
}

void write_l2_vs_truth(const std::string& out, const PosteriorSummary& s,
                       const std::string& truth_path) {
  std::string csv = "quantity,value\n";
  if (truth_model(truth_path) == "ltn") {
    const LtnGroundTruth truth = read_ltn_truth(truth_path);
    if (truth.V != s.V || truth.D != s.D)
      throw DataError("ground truth dimensions do not match the summary");
    if (truth.K > s.K) throw DataError("summary has fewer subcommunities than the truth");
    const std::vector<int> match = align_subset(truth.beta_k, truth.K, s.beta_k, s.K, s.V);

    std::vector<double> phi_est(static_cast<std::size_t>(s.D) * truth.K);
    for (int d = 0; d < s.D; ++d)
      for (int k = 0; k < truth.K; ++k)
        phi_est[static_cast<std::size_t>(d) * truth.K + k] = s.phi_at(d, match[k]);
    csv += "phi," + fmt_double(mean_l2(phi_est, truth.phi, s.D, truth.K)) + '\n';

    std::vector<double> beta_est(static_cast<std::size_t>(truth.K) * s.V);
    for (int k = 0; k < truth.K; ++k)
      for (int v = 0; v < s.V; ++v)
        beta_est[static_cast<std::size_t>(k) * s.V + v] = s.beta_k_at(match[k], v);
    csv += "beta_k," + fmt_double(mean_l2(beta_est, truth.beta_k, truth.K, s.V)) + '\n';

    if (s.has_sample_compositions()) {
      std::vector<double> bdk_est(static_cast<std::size_t>(s.D) * truth.K * s.V);
      for (int d = 0; d < s.D; ++d)
        for (int k = 0; k < truth.K; ++k)
          for (int v = 0; v < s.V; ++v)
            bdk_est[(static_cast<std::size_t>(d) * truth.K + k) * s.V + v] =
                s.beta_dk_at(d, match[k], v);
      csv += "beta_dk," +
             fmt_double(mean_l2(bdk_est, truth.beta_dk, s.D * truth.K, s.V)) + '\n';
    }
  } else {
    const LdaGroundTruth truth = read_lda_truth(truth_path);
    if (truth.V != s.V || truth.D != s.D)
      throw DataError("ground truth dimensions do not match the summary");
    if (truth.K > s.K) throw DataError("summary has fewer subcommunities than the truth");
    const std::vector<int> match = align_subset(truth.beta_k, truth.K, s.beta_k, s.K, s.V);
    std::vector<double> phi_est(static_cast<std::size_t>(s.D) * truth.K);
    for (int d = 0; d < s.D; ++d)
      for (int k = 0; k < truth.K; ++k)
        phi_est[static_cast<std::size_t>(d) * truth.K + k] = s.phi_at(d, match[k]);
    csv += "phi," + fmt_double(mean_l2(phi_est, truth.phi, s.D, truth.K)) + '\n';
    std::vector<double> beta_est(static_cast<std::size_t>(truth.K) * s.V);
    for (int k = 0; k < truth.K; ++k)
      for (int v = 0; v < s.V; ++v)
        beta_est[static_cast<std::size_t>(k) * s.V + v] = s.beta_k_at(match[k], v);
    csv += "beta_k," + fmt_double(mean_l2(beta_est, truth.beta_k, truth.K, s.V)) + '\n';
  }
  write_text_file(out + "/l2_truth.csv", csv);
}

void cmd_summarize(const json& o) {
  Timer timer;
  const std::string out = o.at("out");
  ensure_out_dir(out);
  const std::string chain_dir = o.at("chain");
  const int top_n = o.value("top_n", 5);
  std::vector<std::string> inputs = {chain_dir + "/chain.json"};

  const std::string model = chain_model(chain_dir);
  PosteriorSummary summary;
  if (model == "ltn") {
    const std::string tree_path = o.at("tree");
    inputs.push_back(tree_path);
    const PhyloTree tree = read_newick_file(tree_path);
    LtnChainBundle bundle = read_ltn_chain(chain_dir);
    if (tree.num_internal() != bundle.chain.p)
      throw DataError("tree does not match the chain dimensions");
    summary = summarize_ltn(bundle.chain, tree, bundle.hyper, bundle.sample_ids, bundle.labels);
  } else {
    LdaChainBundle bundle = read_lda_chain(chain_dir);
    summary = summarize_lda(bundle.chain, bundle.hyper, bundle.sample_ids, bundle.labels);
  }
  write_summary(out, summary, model, top_n);

  if (const std::string truth = o.value("truth", ""); !truth.empty()) {
    inputs.push_back(truth);
    write_l2_vs_truth(out, summary, truth);
  }
  write_manifest(out, "summarize", o, inputs, timer.seconds());
}

void cmd_perplexity(const json& o) {
  Timer timer;
  const std::string out = o.at("out");
  ensure_out_dir(out);
  const std::string summary_dir = o.at("summary");
  const std::string counts_path = o.at("counts");
  std::vector<std::string> inputs = {summary_dir + "/summary.json", counts_path};

  const SummaryBundle trained = read_summary(summary_dir);
  const Corpus test_raw = ingest_counts(counts_path);

  ChainConfig config = chain_config_from(o);
  const int threads = o.value("threads", 1);

  PerplexityResult result;
  Corpus test;
  if (trained.model == "ltn") {
    const std::string tree_path = o.at("tree");
    inputs.push_back(tree_path);
    const PhyloTree tree = read_newick_file(tree_path);
    test = reconcile_with_tree(test_raw, tree);
    LtnHyperparams hyper;
    hyper.K = trained.summary.K;
    hyper.alpha = o.at("alpha").get<double>();
    hyper.validate_and_expand(tree.num_internal());
    result = perplexity_ltn(trained.summary.mu_hat, trained.summary.tau_hat, test, tree, hyper,
                            config, threads);
  } else {
    test = test_raw;
    if (test.labels != trained.summary.labels)
      throw DataError("test corpus taxa do not match the training summary");
    LdaHyperparams hyper;
    hyper.K = trained.summary.K;
    hyper.alpha = o.at("alpha").get<double>();
    result = perplexity_lda(trained.summary.beta_k, test, hyper, config, threads);
  }
  write_perplexity(out, result, test.sample_ids, trained.model, trained.summary.K, 0);
  write_manifest(out, "perplexity", o, inputs, timer.seconds());
}

void cmd_cv_grid(const json& o) {
  Timer timer;
  const std::string out = o.at("out");
  ensure_out_dir(out);
  const std::string counts_path = o.at("counts");
  std::vector<std::string> inputs = {counts_path};

  CvOptions cv;
  cv.model = o.value("model", "ltn");
  cv.k_grid = parse_grid(o.at("k_grid").get<std::string>());
  if (cv.model == "ltn") cv.c_grid = parse_grid(o.at("c_grid").get<std::string>());
  cv.folds = o.at("folds").get<int>();
  cv.base.alpha = o.at("alpha").get<double>();
  cv.base.a1 = o.at("a1").get<double>();
  cv.base.a2 = o.at("a2").get<double>();
  cv.base.b = o.at("b").get<double>();
  cv.lda_gamma = o.value("gamma", 1.0);
  cv.fit_config.iterations = o.at("fit_iters").get<int>();
  cv.fit_config.burn_in = o.at("fit_burnin").get<int>();
  cv.fit_config.thin = o.at("fit_thin").get<int>();
  cv.fit_config.pg_threshold = o.value("pg_threshold", 30);
  cv.eval_config.iterations = o.at("eval_iters").get<int>();
  cv.eval_config.burn_in = o.at("eval_burnin").get<int>();
  cv.eval_config.thin = o.at("eval_thin").get<int>();
  cv.eval_config.pg_threshold = o.value("pg_threshold", 30);
  cv.fit_config.validate();
  cv.eval_config.validate();
  cv.seed = o.at("seed").get<std::uint64_t>();
  cv.threads = o.value("threads", 1);
  cv.inflection_tol = o.value("inflection_tol", 0.01);

  Corpus corpus;
  PhyloTree tree;
  if (cv.model == "ltn") {
    const std::string tree_path = o.at("tree");
    inputs.push_back(tree_path);
    tree = read_newick_file(tree_path);
    corpus = reconcile_with_tree(ingest_counts(counts_path), tree);
  } else {
    corpus = ingest_counts(counts_path);
  }
  const CvResult result = cv_grid(corpus, tree, cv);
  write_cv_result(out, result, cv.model, cv.inflection_tol);
  write_manifest(out, "cv-grid", o, inputs, timer.seconds());
}

void cmd_compare(const json& o) {
  Timer timer;
  const std::string out = o.at("out");
  ensure_out_dir(out);
  const std::string dir_a = o.at("a");
  const std::string dir_b = o.at("b");
  std::vector<std::string> inputs = {dir_a + "/summary.json", dir_b + "/summary.json"};

  const SummaryBundle a = read_summary(dir_a);
  const SummaryBundle b = read_summary(dir_b);
  const PosteriorSummary& sa = a.summary;
  const PosteriorSummary& sb = b.summary;
  if (sa.V != sb.V || sa.D != sb.D)
    throw DataError("summaries cover different corpora and cannot be compared");
  if (sa.K > sb.K)
    throw DataError("summary A has more subcommunities than B; swap the arguments");

  const std::vector<int> match = align_subset(sa.beta_k, sa.K, sb.beta_k, sb.K, sa.V);
  std::vector<bool> used(sb.K, false);
  for (int j : match) used[j] = true;
  std::vector<int> column_order = match;
  for (int j = 0; j < sb.K; ++j)
    if (!used[j]) column_order.push_back(j);

  std::string map_csv = "slot,source_k_in_b,matched\n";
  for (std::size_t slot = 0; slot < column_order.size(); ++slot)
    map_csv += std::to_string(slot + 1) + ',' + std::to_string(column_order[slot] + 1) + ',' +
               (slot < match.size() ? "1" : "0") + '\n';
  write_text_file(out + "/alignment_map.csv", map_csv);

  auto write_phi = [&](const PosteriorSummary& s, const std::vector<int>& order,
                       const std::string& path) {
    std::string csv = "sample_id";
    for (std::size_t k = 1; k <= order.size(); ++k) csv += ",k" + std::to_string(k);
    csv += '\n';
    for (int d = 0; d < s.D; ++d) {
      csv += s.sample_ids[d];
      for (int kk : order) csv += ',' + fmt_double(s.phi_at(d, kk));
      csv += '\n';
    }
    write_text_file(path, csv);
  };
  std::vector<int> identity_a(sa.K);
  for (int k = 0; k < sa.K; ++k) identity_a[k] = k;
  write_phi(sa, identity_a, out + "/phi_a.csv");
  write_phi(sb, column_order, out + "/phi_b_aligned.csv");

  auto write_beta = [&](const PosteriorSummary& s, const std::vector<int>& order,
                        const std::string& path) {
    std::string csv = "k";
    for (const auto& label : s.labels) csv += ',' + label;
    csv += '\n';
    for (std::size_t slot = 0; slot < order.size(); ++slot) {
      csv += std::to_string(slot + 1);
      for (int v = 0; v < s.V; ++v) csv += ',' + fmt_double(s.beta_k_at(order[slot], v));
      csv += '\n';
    }
    write_text_file(path, csv);
  };
  write_beta(sa, identity_a, out + "/beta_k_a.csv");
  write_beta(sb, column_order, out + "/beta_k_b_aligned.csv");

  std::string abundance = "run,k,mean_phi\n";
  for (int k = 0; k < sa.K; ++k) {
    double mean = 0.0;
    for (int d = 0; d < sa.D; ++d) mean += sa.phi_at(d, k) / sa.D;
    abundance += "a," + std::to_string(k + 1) + ',' + fmt_double(mean) + '\n';
  }
  for (std::size_t slot = 0; slot < column_order.size(); ++slot) {
    double mean = 0.0;
    for (int d = 0; d < sb.D; ++d) mean += sb.phi_at(d, column_order[slot]) / sb.D;
    abundance += "b," + std::to_string(slot + 1) + ',' + fmt_double(mean) + '\n';
  }
  write_text_file(out + "/mean_abundance.csv", abundance);

  std::string l2 = "quantity,value\n";
  {
    std::vector<double> phi_a(static_cast<std::size_t>(sa.D) * sa.K);
    std::vector<double> phi_b(phi_a.size());
    for (int d = 0; d < sa.D; ++d)
      for (int k = 0; k < sa.K; ++k) {
        phi_a[static_cast<std::size_t>(d) * sa.K + k] = sa.phi_at(d, k);
        phi_b[static_cast<std::size_t>(d) * sa.K + k] = sb.phi_at(d, match[k]);
      }
    l2 += "phi_ab," + fmt_double(mean_l2(phi_a, phi_b, sa.D, sa.K)) + '\n';
    std::vector<double> beta_b(static_cast<std::size_t>(sa.K) * sa.V);
    for (int k = 0; k < sa.K; ++k)
      for (int v = 0; v < sa.V; ++v)
        beta_b[static_cast<std::size_t>(k) * sa.V + v] = sb.beta_k_at(match[k], v);
    l2 += "beta_k_ab," + fmt_double(mean_l2(sa.beta_k, beta_b, sa.K, sa.V)) + '\n';
  }
  write_text_file(out + "/l2.csv", l2);

  if (const std::string truth = o.value("truth", ""); !truth.empty()) {
    inputs.push_back(truth);
    write_l2_vs_truth(out, sa, truth);
    fs::rename(out + "/l2_truth.csv", out + "/l2_truth_a.csv");
    write_l2_vs_truth(out, sb, truth);
    fs::rename(out + "/l2_truth.csv", out + "/l2_truth_b.csv");
  }
  write_manifest(out, "compare", o, inputs, timer.seconds());
}

void cmd_export_tree(const json& o) {
  Timer timer;
  const std::string out = o.at("out");
  ensure_out_dir(out);
  const std::string tree_path = o.at("tree");
  const PhyloTree tree = read_newick_file(tree_path);
  write_text_file(out + "/tree.newick", to_newick(tree) + "\n");
  write_text_file(out + "/nodes.csv", node_table_csv(tree));
  write_manifest(out, "export-tree", o, {tree_path}, timer.seconds());
}

void dispatch(const std::string& subcommand, const json& options);

void cmd_replay(const json& o) {
  const std::string manifest_path = o.at("manifest");
  const json manifest = json::parse(read_text_file(manifest_path));
  for (const json& input : manifest.at("inputs")) {
    const std::string path = input.at("path");
    if (!fs::exists(path)) throw DataError("replay input missing: " + path);
    if (fnv64_file(path) != input.at("fnv64").get<std::uint64_t>())
      throw DataError("replay input changed since the original run: " + path);
  }
  json options = manifest.at("options");
  options["out"] = o.at("out");
  dispatch(manifest.at("subcommand").get<std::string>(), options);
}

void dispatch(const std::string& subcommand, const json& options) {
  if (subcommand == "simulate") {
    cmd_simulate(options);
  } else if (subcommand == "fit-ltn") {
    cmd_fit_ltn(options);
  } else if (subcommand == "fit-lda") {
    cmd_fit_lda(options);
  } else if (subcommand == "summarize") {
    cmd_summarize(options);
  } else if (subcommand == "perplexity") {
    cmd_perplexity(options);
  } else if (subcommand == "cv-grid") {
    cmd_cv_grid(options);
  } else if (subcommand == "compare") {
    cmd_compare(options);
  } else if (subcommand == "export-tree") {
    cmd_export_tree(options);
  } else {
    throw ConfigError("unknown subcommand in manifest: " + subcommand);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tree-normal mixed-membership modeling of microbiome count data"};
  app.set_config("--config", "", "Read options from an INI file (sections per subcommand)");
  app.require_subcommand(1);

  // simulate ------------------------------------------------------------
  std::string sim_model = "ltn", sim_out, sim_tree_shape = "random", sim_tree;
  int sim_V = 16, sim_D = 20, sim_K = 3, sim_C = 3;
  long long sim_N = 1000;
  double sim_alpha = 1.0, sim_a1 = 1e4, sim_a2 = 10.0, sim_b = 10.0, sim_gamma = 1.0;
  bool sim_knockout = false;
  std::uint64_t sim_seed = default_seed();
  CLI::App* simulate = app.add_subcommand("simulate", "Generate a corpus with known truth");
  simulate->add_option("--model", sim_model)->check(CLI::IsMember({"ltn", "lda"}));
  simulate->add_option("--out", sim_out)->required();
  simulate->add_option("--V", sim_V);
  simulate->add_option("--D", sim_D);
  simulate->add_option("--N", sim_N, "reads per sample");
  simulate->add_option("--K", sim_K);
  simulate->add_option("--C", sim_C);
  simulate->add_option("--alpha", sim_alpha);
  simulate->add_option("--a1", sim_a1);
  simulate->add_option("--a2", sim_a2);
  simulate->add_option("--b", sim_b);
  simulate->add_option("--gamma", sim_gamma);
  simulate->add_option("--tree-shape", sim_tree_shape)
      ->check(CLI::IsMember({"balanced", "caterpillar", "random"}));
  simulate->add_option("--tree", sim_tree, "reuse an existing Newick tree");
  simulate->add_flag("--knockout", sim_knockout, "force zero cross-sample variance");
  simulate->add_option("--seed", sim_seed);

  // fit-ltn ---------------------------------------------------------------
  std::string fl_counts, fl_tree, fl_out;
  int fl_K = 4, fl_C = 5, fl_iters = 2000, fl_burnin = 1000, fl_thin = 10, fl_pg = 30,
      fl_threads = 1;
  double fl_alpha = 1.0, fl_a1 = 1e4, fl_a2 = 10.0, fl_b = 10.0;
  long long fl_prune = 0;
  std::uint64_t fl_seed = default_seed();
  CLI::App* fit_ltn = app.add_subcommand("fit-ltn", "Fit the tree-normal model");
  fit_ltn->add_option("--counts", fl_counts)->required();
  fit_ltn->add_option("--tree", fl_tree)->required();
  fit_ltn->add_option("--out", fl_out)->required();
  fit_ltn->add_option("--K", fl_K);
  fit_ltn->add_option("--C", fl_C);
  fit_ltn->add_option("--alpha", fl_alpha);
  fit_ltn->add_option("--a1", fl_a1);
  fit_ltn->add_option("--a2", fl_a2);
  fit_ltn->add_option("--b", fl_b);
  fit_ltn->add_option("--iters", fl_iters);
  fit_ltn->add_option("--burnin", fl_burnin);
  fit_ltn->add_option("--thin", fl_thin);
  fit_ltn->add_option("--pg-threshold", fl_pg);
  fit_ltn->add_option("--threads", fl_threads);
  fit_ltn->add_option("--prune", fl_prune, "drop taxa with corpus-wide total below this");
  fit_ltn->add_option("--seed", fl_seed);

  // fit-lda ---------------------------------------------------------------
  std::string fd_counts, fd_out;
  int fd_K = 4, fd_iters = 2000, fd_burnin = 1000, fd_thin = 10;
  double fd_alpha = 1.0, fd_gamma = 1.0;
  long long fd_prune = 0;
  std::uint64_t fd_seed = default_seed();
  CLI::App* fit_lda = app.add_subcommand("fit-lda", "Fit the baseline model");
  fit_lda->add_option("--counts", fd_counts)->required();
  fit_lda->add_option("--out", fd_out)->required();
  fit_lda->add_option("--K", fd_K);
  fit_lda->add_option("--alpha", fd_alpha);
  fit_lda->add_option("--gamma", fd_gamma);
  fit_lda->add_option("--iters", fd_iters);
  fit_lda->add_option("--burnin", fd_burnin);
  fit_lda->add_option("--thin", fd_thin);
  fit_lda->add_option("--prune", fd_prune);
  fit_lda->add_option("--seed", fd_seed);

  // summarize --------------------------------------------------------------
  std::string sm_chain, sm_out, sm_tree, sm_truth;
  int sm_top_n = 5;
  CLI::App* summarize = app.add_subcommand("summarize", "Posterior means from a saved chain");
  summarize->add_option("--chain", sm_chain)->required();
  summarize->add_option("--out", sm_out)->required();
  summarize->add_option("--tree", sm_tree, "required for tree-normal chains");
  summarize->add_option("--truth", sm_truth, "ground-truth JSON for L2 tables");
  summarize->add_option("--top-n", sm_top_n);

  // perplexity ---------------------------------------------------------------
  std::string pp_summary, pp_counts, pp_tree, pp_out;
  int pp_iters = 300, pp_burnin = 100, pp_thin = 2, pp_pg = 30, pp_threads = 1;
  double pp_alpha = 1.0;
  std::uint64_t pp_seed = default_seed();
  CLI::App* perplexity = app.add_subcommand("perplexity", "Document-completion scoring");
  perplexity->add_option("--summary", pp_summary, "training summary directory")->required();
  perplexity->add_option("--counts", pp_counts, "test counts CSV")->required();
  perplexity->add_option("--out", pp_out)->required();
  perplexity->add_option("--tree", pp_tree);
  perplexity->add_option("--alpha", pp_alpha);
  perplexity->add_option("--iters", pp_iters);
  perplexity->add_option("--burnin", pp_burnin);
  perplexity->add_option("--thin", pp_thin);
  perplexity->add_option("--pg-threshold", pp_pg);
  perplexity->add_option("--threads", pp_threads);
  perplexity->add_option("--seed", pp_seed);

  // cv-grid -------------------------------------------------------------------
  std::string cg_model = "ltn", cg_counts, cg_tree, cg_out, cg_k_grid = "2..8",
              cg_c_grid = "1..21";
  int cg_folds = 4, cg_fit_iters = 500, cg_fit_burnin = 250, cg_fit_thin = 5,
      cg_eval_iters = 300, cg_eval_burnin = 100, cg_eval_thin = 2, cg_pg = 30, cg_threads = 0;
  double cg_alpha = 1.0, cg_a1 = 1e4, cg_a2 = 10.0, cg_b = 10.0, cg_gamma = 1.0, cg_tol = 0.01;
  std::uint64_t cg_seed = default_seed();
  CLI::App* cvgrid = app.add_subcommand("cv-grid", "Cross-validated (K, C) selection");
  cvgrid->add_option("--model", cg_model)->check(CLI::IsMember({"ltn", "lda"}));
  cvgrid->add_option("--counts", cg_counts)->required();
  cvgrid->add_option("--tree", cg_tree);
  cvgrid->add_option("--out", cg_out)->required();
  cvgrid->add_option("--K-grid", cg_k_grid, "e.g. 2..8 or 2,4,6");
  cvgrid->add_option("--C-grid", cg_c_grid);
  cvgrid->add_option("--folds", cg_folds);
  cvgrid->add_option("--alpha", cg_alpha);
  cvgrid->add_option("--a1", cg_a1);
  cvgrid->add_option("--a2", cg_a2);
  cvgrid->add_option("--b", cg_b);
  cvgrid->add_option("--gamma", cg_gamma);
  cvgrid->add_option("--fit-iters", cg_fit_iters);
  cvgrid->add_option("--fit-burnin", cg_fit_burnin);
  cvgrid->add_option("--fit-thin", cg_fit_thin);
  cvgrid->add_option("--eval-iters", cg_eval_iters);
  cvgrid->add_option("--eval-burnin", cg_eval_burnin);
  cvgrid->add_option("--eval-thin", cg_eval_thin);
  cvgrid->add_option("--pg-threshold", cg_pg);
  cvgrid->add_option("--threads", cg_threads, "0 = all cores");
  cvgrid->add_option("--inflection-tol", cg_tol);
  cvgrid->add_option("--seed", cg_seed);

  // compare ---------------------------------------------------------------------
  std::string cp_a, cp_b, cp_out, cp_truth;
  CLI::App* compare = app.add_subcommand("compare", "Align and compare two summaries");
  compare->add_option("--summary-a", cp_a)->required();
  compare->add_option("--summary-b", cp_b)->required();
  compare->add_option("--out", cp_out)->required();
  compare->add_option("--truth", cp_truth);

  // export-tree -------------------------------------------------------------------
  std::string et_tree, et_out;
  CLI::App* export_tree = app.add_subcommand("export-tree", "Normalized Newick and node table");
  export_tree->add_option("--tree", et_tree)->required();
  export_tree->add_option("--out", et_out)->required();

  // replay ---------------------------------------------------------------------
  std::string rp_manifest, rp_out;
  CLI::App* replay = app.add_subcommand("replay", "Re-run a recorded manifest");
  replay->add_option("--manifest", rp_manifest)->required();
  replay->add_option("--out", rp_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (simulate->parsed()) {
      json o;
      o["model"] = sim_model;
      o["out"] = sim_out;
      o["V"] = sim_V;
      o["D"] = sim_D;
      o["N"] = sim_N;
      o["K"] = sim_K;
      o["C"] = sim_C;
      o["alpha"] = sim_alpha;
      o["a1"] = sim_a1;
      o["a2"] = sim_a2;
      o["b"] = sim_b;
      o["gamma"] = sim_gamma;
      o["tree_shape"] = sim_tree_shape;
      o["tree"] = sim_tree;
      o["knockout"] = sim_knockout;
      o["seed"] = sim_seed;
      cmd_simulate(o);
    } else if (fit_ltn->parsed()) {
      json o;
      o["counts"] = fl_counts;
      o["tree"] = fl_tree;
      o["out"] = fl_out;
      o["K"] = fl_K;
      o["C"] = fl_C;
      o["alpha"] = fl_alpha;
      o["a1"] = fl_a1;
      o["a2"] = fl_a2;
      o["b"] = fl_b;
      o["iters"] = fl_iters;
      o["burnin"] = fl_burnin;
      o["thin"] = fl_thin;
      o["pg_threshold"] = fl_pg;
      o["threads"] = fl_threads;
      o["prune"] = fl_prune;
      o["seed"] = fl_seed;
      cmd_fit_ltn(o);
    } else if (fit_lda->parsed()) {
      json o;
      o["counts"] = fd_counts;
      o["out"] = fd_out;
      o["K"] = fd_K;
      o["alpha"] = fd_alpha;
      o["gamma"] = fd_gamma;
      o["iters"] = fd_iters;
      o["burnin"] = fd_burnin;
      o["thin"] = fd_thin;
      o["prune"] = fd_prune;
      o["seed"] = fd_seed;
      cmd_fit_lda(o);
    } else if (summarize->parsed()) {
      json o;
      o["chain"] = sm_chain;
      o["out"] = sm_out;
      o["tree"] = sm_tree;
      o["truth"] = sm_truth;
      o["top_n"] = sm_top_n;
      cmd_summarize(o);
    } else if (perplexity->parsed()) {
      json o;
      o["summary"] = pp_summary;
      o["counts"] = pp_counts;
      o["tree"] = pp_tree;
      o["out"] = pp_out;
      o["alpha"] = pp_alpha;
      o["iters"] = pp_iters;
      o["burnin"] = pp_burnin;
      o["thin"] = pp_thin;
      o["pg_threshold"] = pp_pg;
      o["threads"] = pp_threads;
      o["seed"] = pp_seed;
      cmd_perplexity(o);
    } else if (cvgrid->parsed()) {
      json o;
      o["model"] = cg_model;
      o["counts"] = cg_counts;
      o["tree"] = cg_tree;
      o["out"] = cg_out;
      o["k_grid"] = cg_k_grid;
      o["c_grid"] = cg_c_grid;
      o["folds"] = cg_folds;
      o["alpha"] = cg_alpha;
      o["a1"] = cg_a1;
      o["a2"] = cg_a2;
      o["b"] = cg_b;
      o["gamma"] = cg_gamma;
      o["fit_iters"] = cg_fit_iters;
      o["fit_burnin"] = cg_fit_burnin;
      o["fit_thin"] = cg_fit_thin;
      o["eval_iters"] = cg_eval_iters;
      o["eval_burnin"] = cg_eval_burnin;
      o["eval_thin"] = cg_eval_thin;
      o["pg_threshold"] = cg_pg;
      o["threads"] = cg_threads > 0
                         ? cg_threads
                         : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
      o["inflection_tol"] = cg_tol;
      o["seed"] = cg_seed;
      cmd_cv_grid(o);
    } else if (compare->parsed()) {
      json o;
      o["a"] = cp_a;
      o["b"] = cp_b;
      o["out"] = cp_out;
      o["truth"] = cp_truth;
      cmd_compare(o);
    } else if (export_tree->parsed()) {
      json o;
      o["tree"] = et_tree;
      o["out"] = et_out;
      cmd_export_tree(o);
    } else if (replay->parsed()) {
      json o;
      o["manifest"] = rp_manifest;
      o["out"] = rp_out;
      cmd_replay(o);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
