#include "ltnlda/io.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

namespace ltnlda {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fmt_double(double x) {
  char buf[40];
  // 17 significant digits round-trip any double exactly.
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path);
  out << content;
  if (!out) throw DataError("failed writing file: " + path);
}

std::uint64_t fnv64_bytes(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv64_file(const std::string& path) { return fnv64_bytes(read_text_file(path)); }

namespace {

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create directory: " + dir);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

// Calls fn(fields) for every data row; checks the header verbatim.
void for_each_csv_row(const std::string& path, const std::string& expected_header,
                      const std::function<void(const std::vector<std::string>&)>& fn) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expected_header)
    throw DataError("unexpected header in " + path + ": '" + line + "'");
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    fn(split_line(line));
  }
}

double to_double(const std::string& s) { return std::strtod(s.c_str(), nullptr); }

json chain_meta(const std::string& model, int D, int K, int V, int p,
                const ChainConfig& config, const std::vector<std::string>& sample_ids,
                const std::vector<std::string>& labels,
                const std::vector<long long>& sample_totals) {
  json meta;
  meta["model"] = model;
  meta["D"] = D;
  meta["K"] = K;
  meta["V"] = V;
  meta["p"] = p;
  meta["iterations"] = config.iterations;
  meta["burn_in"] = config.burn_in;
  meta["thin"] = config.thin;
  meta["seed"] = config.seed;
  meta["pg_threshold"] = config.pg_threshold;
  meta["fixed_global"] = config.fixed_global;
  meta["sample_ids"] = sample_ids;
  meta["labels"] = labels;
  meta["sample_totals"] = sample_totals;
  return meta;
}

void read_chain_meta(const json& meta, ChainConfig& config, std::vector<std::string>& sample_ids,
                     std::vector<std::string>& labels, std::vector<long long>& sample_totals) {
  config.iterations = meta.at("iterations").get<int>();
  config.burn_in = meta.at("burn_in").get<int>();
  config.thin = meta.at("thin").get<int>();
  config.seed = meta.at("seed").get<std::uint64_t>();
  config.pg_threshold = meta.at("pg_threshold").get<int>();
  config.fixed_global = meta.at("fixed_global").get<bool>();
  sample_ids = meta.at("sample_ids").get<std::vector<std::string>>();
  labels = meta.at("labels").get<std::vector<std::string>>();
  sample_totals = meta.at("sample_totals").get<std::vector<long long>>();
}

void write_logjoint(const std::string& dir, const std::vector<double>& trace) {
  std::string out = "iter,value\n";
  for (std::size_t t = 0; t < trace.size(); ++t)
    out += std::to_string(t + 1) + ',' + fmt_double(trace[t]) + '\n';
  write_text_file(dir + "/logjoint.csv", out);
}

std::vector<double> read_logjoint(const std::string& dir) {
  std::vector<double> trace;
  for_each_csv_row(dir + "/logjoint.csv", "iter,value",
                   [&](const std::vector<std::string>& f) { trace.push_back(to_double(f[1])); });
  return trace;
}

}  // namespace

std::string chain_model(const std::string& dir) {
  const json meta = json::parse(read_text_file(dir + "/chain.json"));
  return meta.at("model").get<std::string>();
}

void write_ltn_chain(const std::string& dir, const LtnChain& chain, const LtnHyperparams& hyper,
                     const ChainConfig& config, const std::vector<std::string>& sample_ids,
                     const std::vector<std::string>& labels) {
  ensure_dir(dir);
  json meta = chain_meta("ltn", chain.D, chain.K, static_cast<int>(labels.size()), chain.p,
                         config, sample_ids, labels, chain.sample_totals);
  meta["alpha"] = hyper.alpha;
  meta["C"] = hyper.C;
  meta["a1"] = hyper.a1;
  meta["a2"] = hyper.a2;
  meta["b"] = hyper.b;
  meta["mu0"] = hyper.mu0;
  meta["lambda0"] = hyper.lambda0;
  write_text_file(dir + "/chain.json", meta.dump(2) + "\n");

  std::string y = "iter,sample,k,count\n";
  std::string psi = "iter,sample,k,node,value\n";
  std::string mu = "iter,k,node,value\n";
  std::string tau = "iter,k,node,value\n";
  for (const LtnSnapshot& snap : chain.snapshots) {
    const std::string it = std::to_string(snap.iteration);
    for (int d = 0; d < chain.D; ++d)
      for (int k = 0; k < chain.K; ++k) {
        y += it + ',' + std::to_string(d) + ',' + std::to_string(k) + ',' +
             std::to_string(snap.y_root[static_cast<std::size_t>(d) * chain.K + k]) + '\n';
        for (int i = 0; i < chain.p; ++i)
          psi += it + ',' + std::to_string(d) + ',' + std::to_string(k) + ',' +
                 std::to_string(i) + ',' +
                 fmt_double(snap.psi[(static_cast<std::size_t>(d) * chain.K + k) * chain.p + i]) +
                 '\n';
      }
    for (int k = 0; k < chain.K; ++k)
      for (int i = 0; i < chain.p; ++i) {
        mu += it + ',' + std::to_string(k) + ',' + std::to_string(i) + ',' +
              fmt_double(snap.mu[static_cast<std::size_t>(k) * chain.p + i]) + '\n';
        tau += it + ',' + std::to_string(k) + ',' + std::to_string(i) + ',' +
               fmt_double(snap.tau[static_cast<std::size_t>(k) * chain.p + i]) + '\n';
      }
  }
  write_text_file(dir + "/y_root.csv", y);
  write_text_file(dir + "/psi.csv", psi);
  write_text_file(dir + "/mu.csv", mu);
  write_text_file(dir + "/tau.csv", tau);
  write_logjoint(dir, chain.log_joint_trace);
}

LtnChainBundle read_ltn_chain(const std::string& dir) {
  const json meta = json::parse(read_text_file(dir + "/chain.json"));
  if (meta.at("model") != "ltn") throw DataError(dir + " does not hold a tree-normal chain");

  LtnChainBundle bundle;
  bundle.chain.D = meta.at("D").get<int>();
  bundle.chain.K = meta.at("K").get<int>();
  bundle.chain.p = meta.at("p").get<int>();
  bundle.hyper.K = bundle.chain.K;
  bundle.hyper.alpha = meta.at("alpha").get<double>();
  bundle.hyper.C = meta.at("C").get<int>();
  bundle.hyper.a1 = meta.at("a1").get<double>();
  bundle.hyper.a2 = meta.at("a2").get<double>();
  bundle.hyper.b = meta.at("b").get<double>();
  bundle.hyper.mu0 = meta.at("mu0").get<std::vector<double>>();
  bundle.hyper.lambda0 = meta.at("lambda0").get<std::vector<double>>();
  read_chain_meta(meta, bundle.config, bundle.sample_ids, bundle.labels,
                  bundle.chain.sample_totals);

  const int D = bundle.chain.D, K = bundle.chain.K, p = bundle.chain.p;
  std::vector<int> iters;
  auto snapshot_slot = [&](int iter) -> LtnSnapshot& {
    if (iters.empty() || iters.back() != iter) {
      iters.push_back(iter);
      bundle.chain.snapshots.emplace_back();
      LtnSnapshot& snap = bundle.chain.snapshots.back();
      snap.iteration = iter;
      snap.y_root.assign(static_cast<std::size_t>(D) * K, 0);
      snap.psi.assign(static_cast<std::size_t>(D) * K * p, 0.0);
      snap.mu.assign(static_cast<std::size_t>(K) * p, 0.0);
      snap.tau.assign(static_cast<std::size_t>(K) * p, 0.0);
    }
    return bundle.chain.snapshots.back();
  };

  for_each_csv_row(dir + "/y_root.csv", "iter,sample,k,count",
                   [&](const std::vector<std::string>& f) {
                     LtnSnapshot& snap = snapshot_slot(std::stoi(f[0]));
                     snap.y_root[static_cast<std::size_t>(std::stoi(f[1])) * K + std::stoi(f[2])] =
                         std::stoi(f[3]);
                   });
  for_each_csv_row(dir + "/psi.csv", "iter,sample,k,node,value",
                   [&](const std::vector<std::string>& f) {
                     LtnSnapshot& snap = snapshot_slot(std::stoi(f[0]));
                     snap.psi[(static_cast<std::size_t>(std::stoi(f[1])) * K + std::stoi(f[2])) * p +
                              std::stoi(f[3])] = to_double(f[4]);
                   });
  for_each_csv_row(dir + "/mu.csv", "iter,k,node,value", [&](const std::vector<std::string>& f) {
    LtnSnapshot& snap = snapshot_slot(std::stoi(f[0]));
    snap.mu[static_cast<std::size_t>(std::stoi(f[1])) * p + std::stoi(f[2])] = to_double(f[3]);
  });
  for_each_csv_row(dir + "/tau.csv", "iter,k,node,value", [&](const std::vector<std::string>& f) {
    LtnSnapshot& snap = snapshot_slot(std::stoi(f[0]));
    snap.tau[static_cast<std::size_t>(std::stoi(f[1])) * p + std::stoi(f[2])] = to_double(f[3]);
  });
  bundle.chain.log_joint_trace = read_logjoint(dir);
  for (std::size_t s = 0; s < bundle.chain.snapshots.size(); ++s) {
    LtnSnapshot& snap = bundle.chain.snapshots[s];
    if (snap.iteration >= 1 &&
        snap.iteration <= static_cast<int>(bundle.chain.log_joint_trace.size()))
      snap.log_joint = bundle.chain.log_joint_trace[snap.iteration - 1];
  }
  return bundle;
}

void write_lda_chain(const std::string& dir, const LdaChain& chain, const LdaHyperparams& hyper,
                     const ChainConfig& config, const std::vector<std::string>& sample_ids,
                     const std::vector<std::string>& labels) {
  ensure_dir(dir);
  json meta = chain_meta("lda", chain.D, chain.K, chain.V, 0, config, sample_ids, labels,
                         chain.sample_totals);
  meta["alpha"] = hyper.alpha;
  meta["gamma"] = hyper.gamma;
  write_text_file(dir + "/chain.json", meta.dump(2) + "\n");

  std::string ndk = "iter,sample,k,count\n";
  std::string nkv = "iter,k,asv,count\n";
  for (const LdaSnapshot& snap : chain.snapshots) {
    const std::string it = std::to_string(snap.iteration);
    for (int d = 0; d < chain.D; ++d)
      for (int k = 0; k < chain.K; ++k)
        ndk += it + ',' + std::to_string(d) + ',' + std::to_string(k) + ',' +
               std::to_string(snap.n_dk[static_cast<std::size_t>(d) * chain.K + k]) + '\n';
    for (int k = 0; k < chain.K; ++k)
      for (int v = 0; v < chain.V; ++v)
        nkv += it + ',' + std::to_string(k) + ',' + std::to_string(v) + ',' +
               std::to_string(snap.n_kv[static_cast<std::size_t>(k) * chain.V + v]) + '\n';
  }
  write_text_file(dir + "/n_dk.csv", ndk);
  write_text_file(dir + "/n_kv.csv", nkv);
  write_logjoint(dir, chain.log_joint_trace);
}

LdaChainBundle read_lda_chain(const std::string& dir) {
  const json meta = json::parse(read_text_file(dir + "/chain.json"));
  if (meta.at("model") != "lda") throw DataError(dir + " does not hold a baseline chain");

  LdaChainBundle bundle;
  bundle.chain.D = meta.at("D").get<int>();
  bundle.chain.K = meta.at("K").get<int>();
  bundle.chain.V = meta.at("V").get<int>();
  bundle.hyper.K = bundle.chain.K;
  bundle.hyper.alpha = meta.at("alpha").get<double>();
  bundle.hyper.gamma = meta.at("gamma").get<double>();
  read_chain_meta(meta, bundle.config, bundle.sample_ids, bundle.labels,
                  bundle.chain.sample_totals);

  const int D = bundle.chain.D, K = bundle.chain.K, V = bundle.chain.V;
  std::vector<int> iters;
  auto snapshot_slot = [&](int iter) -> LdaSnapshot& {
    if (iters.empty() || iters.back() != iter) {
      iters.push_back(iter);
      bundle.chain.snapshots.emplace_back();
      LdaSnapshot& snap = bundle.chain.snapshots.back();
      snap.iteration = iter;
      snap.n_dk.assign(static_cast<std::size_t>(D) * K, 0);
      snap.n_kv.assign(static_cast<std::size_t>(K) * V, 0);
    }
    return bundle.chain.snapshots.back();
  };

  for_each_csv_row(dir + "/n_dk.csv", "iter,sample,k,count",
                   [&](const std::vector<std::string>& f) {
                     LdaSnapshot& snap = snapshot_slot(std::stoi(f[0]));
                     snap.n_dk[static_cast<std::size_t>(std::stoi(f[1])) * K + std::stoi(f[2])] =
                         std::stoi(f[3]);
                   });
  for_each_csv_row(dir + "/n_kv.csv", "iter,k,asv,count",
                   [&](const std::vector<std::string>& f) {
                     LdaSnapshot& snap = snapshot_slot(std::stoi(f[0]));
                     snap.n_kv[static_cast<std::size_t>(std::stoi(f[1])) * V + std::stoi(f[2])] =
                         std::stoi(f[3]);
                   });
  bundle.chain.log_joint_trace = read_logjoint(dir);
  for (auto& snap : bundle.chain.snapshots)
    if (snap.iteration >= 1 &&
        snap.iteration <= static_cast<int>(bundle.chain.log_joint_trace.size()))
      snap.log_joint = bundle.chain.log_joint_trace[snap.iteration - 1];
  return bundle;
}

void write_summary(const std::string& dir, const PosteriorSummary& s, const std::string& model,
                   int top_n) {
  ensure_dir(dir);

  json meta;
  meta["model"] = model;
  meta["D"] = s.D;
  meta["K"] = s.K;
  meta["V"] = s.V;
  meta["p"] = s.p;
  meta["sample_ids"] = s.sample_ids;
  meta["labels"] = s.labels;
  write_text_file(dir + "/summary.json", meta.dump(2) + "\n");

  std::string phi = "sample_id";
  for (int k = 1; k <= s.K; ++k) phi += ",k" + std::to_string(k);
  phi += '\n';
  for (int d = 0; d < s.D; ++d) {
    phi += s.sample_ids[d];
    for (int k = 0; k < s.K; ++k) phi += ',' + fmt_double(s.phi_at(d, k));
    phi += '\n';
  }
  write_text_file(dir + "/phi.csv", phi);

  std::string beta = "k";
  for (const auto& label : s.labels) beta += ',' + label;
  beta += '\n';
  for (int k = 0; k < s.K; ++k) {
    beta += std::to_string(k + 1);
    for (int v = 0; v < s.V; ++v) beta += ',' + fmt_double(s.beta_k_at(k, v));
    beta += '\n';
  }
  write_text_file(dir + "/beta_k.csv", beta);

  if (s.has_sample_compositions()) {
    std::string bdk = "sample_id,k,asv,value\n";
    for (int d = 0; d < s.D; ++d)
      for (int k = 0; k < s.K; ++k)
        for (int v = 0; v < s.V; ++v)
          bdk += s.sample_ids[d] + ',' + std::to_string(k + 1) + ',' + s.labels[v] + ',' +
                 fmt_double(s.beta_dk_at(d, k, v)) + '\n';
    write_text_file(dir + "/beta_dk.csv", bdk);

    std::string mu = "k,node,value\n";
    std::string tau = "k,node,value\n";
    for (int k = 0; k < s.K; ++k)
      for (int i = 0; i < s.p; ++i) {
        mu += std::to_string(k + 1) + ',' + std::to_string(i) + ',' +
              fmt_double(s.mu_hat[static_cast<std::size_t>(k) * s.p + i]) + '\n';
        tau += std::to_string(k + 1) + ',' + std::to_string(i) + ',' +
               fmt_double(s.tau_hat[static_cast<std::size_t>(k) * s.p + i]) + '\n';
      }
    write_text_file(dir + "/mu_hat.csv", mu);
    write_text_file(dir + "/tau_hat.csv", tau);
  }

  std::string intervals = "quantity,sample_id,k,asv,lower,upper\n";
  for (int d = 0; d < s.D; ++d)
    for (int k = 0; k < s.K; ++k)
      intervals += "phi," + s.sample_ids[d] + ',' + std::to_string(k + 1) + ",," +
                   fmt_double(s.phi_lo[static_cast<std::size_t>(d) * s.K + k]) + ',' +
                   fmt_double(s.phi_hi[static_cast<std::size_t>(d) * s.K + k]) + '\n';
  for (int k = 0; k < s.K; ++k)
    for (int v = 0; v < s.V; ++v)
      intervals += "beta_k,," + std::to_string(k + 1) + ',' + s.labels[v] + ',' +
                   fmt_double(s.beta_k_lo[static_cast<std::size_t>(k) * s.V + v]) + ',' +
                   fmt_double(s.beta_k_hi[static_cast<std::size_t>(k) * s.V + v]) + '\n';
  write_text_file(dir + "/intervals.csv", intervals);

  const auto ranked = top_asvs(s, std::min(top_n, s.V));
  json top;
  top["n"] = std::min(top_n, s.V);
  top["subcommunities"] = json::array();
  for (int k = 0; k < s.K; ++k) {
    json entry;
    entry["k"] = k + 1;
    entry["asvs"] = json::array();
    for (int v : ranked[k]) {
      json item;
      item["label"] = s.labels[v];
      item["mean"] = s.beta_k_at(k, v);
      entry["asvs"].push_back(item);
    }
    top["subcommunities"].push_back(entry);
  }
  write_text_file(dir + "/top_asvs.json", top.dump(2) + "\n");

  std::string align = "snapshot,slot,source\n";
  for (std::size_t i = 0; i < s.snapshot_perms.size(); ++i)
    for (int k = 0; k < s.K; ++k)
      align += std::to_string(i) + ',' + std::to_string(k + 1) + ',' +
               std::to_string(s.snapshot_perms[i][k] + 1) + '\n';
  write_text_file(dir + "/alignment.csv", align);
}

SummaryBundle read_summary(const std::string& dir) {
  const json meta = json::parse(read_text_file(dir + "/summary.json"));
  SummaryBundle bundle;
  bundle.model = meta.at("model").get<std::string>();
  PosteriorSummary& s = bundle.summary;
  s.D = meta.at("D").get<int>();
  s.K = meta.at("K").get<int>();
  s.V = meta.at("V").get<int>();
  s.p = meta.at("p").get<int>();
  s.sample_ids = meta.at("sample_ids").get<std::vector<std::string>>();
  s.labels = meta.at("labels").get<std::vector<std::string>>();

  s.phi.assign(static_cast<std::size_t>(s.D) * s.K, 0.0);
  std::string phi_header = "sample_id";
  for (int k = 1; k <= s.K; ++k) phi_header += ",k" + std::to_string(k);
  int row = 0;
  for_each_csv_row(dir + "/phi.csv", phi_header, [&](const std::vector<std::string>& f) {
    for (int k = 0; k < s.K; ++k)
      s.phi[static_cast<std::size_t>(row) * s.K + k] = to_double(f[k + 1]);
    ++row;
  });

  s.beta_k.assign(static_cast<std::size_t>(s.K) * s.V, 0.0);
  std::string beta_header = "k";
  for (const auto& label : s.labels) beta_header += ',' + label;
  for_each_csv_row(dir + "/beta_k.csv", beta_header, [&](const std::vector<std::string>& f) {
    const int k = std::stoi(f[0]) - 1;
    for (int v = 0; v < s.V; ++v)
      s.beta_k[static_cast<std::size_t>(k) * s.V + v] = to_double(f[v + 1]);
  });

  if (bundle.model == "ltn") {
    s.beta_dk.assign(static_cast<std::size_t>(s.D) * s.K * s.V, 0.0);
    std::unordered_map<std::string, int> sample_index, label_index;
    for (int d = 0; d < s.D; ++d) sample_index[s.sample_ids[d]] = d;
    for (int v = 0; v < s.V; ++v) label_index[s.labels[v]] = v;
    for_each_csv_row(dir + "/beta_dk.csv", "sample_id,k,asv,value",
                     [&](const std::vector<std::string>& f) {
                       const int d = sample_index.at(f[0]);
                       const int k = std::stoi(f[1]) - 1;
                       const int v = label_index.at(f[2]);
                       s.beta_dk[(static_cast<std::size_t>(d) * s.K + k) * s.V + v] =
                           to_double(f[3]);
                     });
    s.mu_hat.assign(static_cast<std::size_t>(s.K) * s.p, 0.0);
    s.tau_hat.assign(static_cast<std::size_t>(s.K) * s.p, 0.0);
    for_each_csv_row(dir + "/mu_hat.csv", "k,node,value", [&](const std::vector<std::string>& f) {
      s.mu_hat[static_cast<std::size_t>(std::stoi(f[0]) - 1) * s.p + std::stoi(f[1])] =
          to_double(f[2]);
    });
    for_each_csv_row(dir + "/tau_hat.csv", "k,node,value", [&](const std::vector<std::string>& f) {
      s.tau_hat[static_cast<std::size_t>(std::stoi(f[0]) - 1) * s.p + std::stoi(f[1])] =
          to_double(f[2]);
    });
  }
  return bundle;
}

void write_ltn_truth(const std::string& path, const LtnGroundTruth& truth,
                     const std::string& newick, std::uint64_t seed) {
  json j;
  j["model"] = "ltn";
  j["D"] = truth.D;
  j["K"] = truth.K;
  j["V"] = truth.V;
  j["p"] = truth.p;
  j["seed"] = seed;
  j["tree_newick"] = newick;
  j["phi"] = truth.phi;
  j["mu"] = truth.mu;
  j["tau"] = truth.tau;
  j["psi"] = truth.psi;
  j["beta_k"] = truth.beta_k;
  j["beta_dk"] = truth.beta_dk;
  write_text_file(path, j.dump() + "\n");
}

LtnGroundTruth read_ltn_truth(const std::string& path) {
  const json j = json::parse(read_text_file(path));
  if (j.at("model") != "ltn") throw DataError(path + " is not tree-normal ground truth");
  LtnGroundTruth truth;
  truth.D = j.at("D").get<int>();
  truth.K = j.at("K").get<int>();
  truth.V = j.at("V").get<int>();
  truth.p = j.at("p").get<int>();
  truth.phi = j.at("phi").get<std::vector<double>>();
  truth.mu = j.at("mu").get<std::vector<double>>();
  truth.tau = j.at("tau").get<std::vector<double>>();
  truth.psi = j.at("psi").get<std::vector<double>>();
  truth.beta_k = j.at("beta_k").get<std::vector<double>>();
  truth.beta_dk = j.at("beta_dk").get<std::vector<double>>();
  return truth;
}

void write_lda_truth(const std::string& path, const LdaGroundTruth& truth, std::uint64_t seed) {
  json j;
  j["model"] = "lda";
  j["D"] = truth.D;
  j["K"] = truth.K;
  j["V"] = truth.V;
  j["seed"] = seed;
  j["phi"] = truth.phi;
  j["beta_k"] = truth.beta_k;
  write_text_file(path, j.dump() + "\n");
}

LdaGroundTruth read_lda_truth(const std::string& path) {
  const json j = json::parse(read_text_file(path));
  if (j.at("model") != "lda") throw DataError(path + " is not baseline ground truth");
  LdaGroundTruth truth;
  truth.D = j.at("D").get<int>();
  truth.K = j.at("K").get<int>();
  truth.V = j.at("V").get<int>();
  truth.phi = j.at("phi").get<std::vector<double>>();
  truth.beta_k = j.at("beta_k").get<std::vector<double>>();
  return truth;
}

std::string truth_model(const std::string& path) {
  return json::parse(read_text_file(path)).at("model").get<std::string>();
}

void write_perplexity(const std::string& dir, const PerplexityResult& result,
                      const std::vector<std::string>& sample_ids, const std::string& model,
                      int K, int C) {
  ensure_dir(dir);
  std::string per = "sample_id,loglik,tokens\n";
  for (std::size_t d = 0; d < result.loglik.size(); ++d)
    per += sample_ids[d] + ',' + fmt_double(result.loglik[d]) + ',' +
           std::to_string(result.tokens[d]) + '\n';
  write_text_file(dir + "/perplexity.csv", per);

  std::string agg = "model,K,C,perplexity,loglik,tokens,mc_iterations\n";
  agg += model + ',' + std::to_string(K) + ',' + std::to_string(C) + ',' +
         fmt_double(result.perplexity) + ',' + fmt_double(result.total_loglik) + ',' +
         std::to_string(result.total_tokens) + ',' + std::to_string(result.mc_iterations) + '\n';
  write_text_file(dir + "/perplexity_summary.csv", agg);
}

void write_cv_result(const std::string& dir, const CvResult& result, const std::string& model,
                     double inflection_tol) {
  ensure_dir(dir);
  std::string grid = "K,C,fold,perplexity,loglik,tokens\n";
  for (const CvCell& cell : result.cells)
    grid += std::to_string(cell.K) + ',' + std::to_string(cell.C) + ',' +
            std::to_string(cell.fold) + ',' + fmt_double(cell.perplexity) + ',' +
            fmt_double(cell.loglik) + ',' + std::to_string(cell.tokens) + '\n';
  write_text_file(dir + "/perplexity_grid.csv", grid);

  std::string curves = "K,C,mean,se,folds\n";
  for (const CvCurvePoint& pt : result.curves)
    curves += std::to_string(pt.K) + ',' + std::to_string(pt.C) + ',' + fmt_double(pt.mean) +
              ',' + fmt_double(pt.se) + ',' + std::to_string(pt.folds) + '\n';
  write_text_file(dir + "/perplexity_curves.csv", curves);

  json inflections;
  inflections["model"] = model;
  inflections["relative_tolerance"] = inflection_tol;
  inflections["c_per_k"] = json::array();
  for (const auto& [K, C] : result.c_inflection_per_k) {
    json e;
    e["K"] = K;
    e["C"] = C;
    inflections["c_per_k"].push_back(e);
  }
  inflections["c_star"] = result.c_star;
  inflections["k_star"] = result.k_star;
  json folds = json::array();
  for (const auto& fold : result.fold_assignment) folds.push_back(fold);
  inflections["fold_assignment"] = folds;
  write_text_file(dir + "/inflections.json", inflections.dump(2) + "\n");
}

}  // namespace ltnlda
