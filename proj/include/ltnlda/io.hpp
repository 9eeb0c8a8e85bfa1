#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ltnlda/corpus.hpp"
#include "ltnlda/evaluation.hpp"
#include "ltnlda/lda_gibbs.hpp"
#include "ltnlda/ltn_gibbs.hpp"
#include "ltnlda/posterior.hpp"
#include "ltnlda/simulate.hpp"
#include "ltnlda/tree.hpp"

namespace ltnlda {

// Shortest round-trip-exact decimal form.
std::string fmt_double(double x);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);
std::uint64_t fnv64_bytes(const std::string& bytes);
std::uint64_t fnv64_file(const std::string& path);

// ----- chain serialization -------------------------------------------------
// A chain directory holds chain.json (model, dimensions, hyperparameters,
// labels) and columnar CSVs of the saved iterations. Assignments are not
// persisted.

struct LtnChainBundle {
  LtnChain chain;
  LtnHyperparams hyper;
  ChainConfig config;
  std::vector<std::string> sample_ids;
  std::vector<std::string> labels;
};

struct LdaChainBundle {
  LdaChain chain;
  LdaHyperparams hyper;
  ChainConfig config;
  std::vector<std::string> sample_ids;
  std::vector<std::string> labels;
};

void write_ltn_chain(const std::string& dir, const LtnChain& chain, const LtnHyperparams& hyper,
                     const ChainConfig& config, const std::vector<std::string>& sample_ids,
                     const std::vector<std::string>& labels);
LtnChainBundle read_ltn_chain(const std::string& dir);

void write_lda_chain(const std::string& dir, const LdaChain& chain, const LdaHyperparams& hyper,
                     const ChainConfig& config, const std::vector<std::string>& sample_ids,
                     const std::vector<std::string>& labels);
LdaChainBundle read_lda_chain(const std::string& dir);

// "ltn" or "lda" from chain.json.
std::string chain_model(const std::string& dir);

// ----- posterior summary ---------------------------------------------------

void write_summary(const std::string& dir, const PosteriorSummary& summary,
                   const std::string& model, int top_n);

struct SummaryBundle {
  std::string model;
  PosteriorSummary summary;
};

SummaryBundle read_summary(const std::string& dir);

// ----- simulation ground truth ----------------------------------------------

void write_ltn_truth(const std::string& path, const LtnGroundTruth& truth,
                     const std::string& newick, std::uint64_t seed);
LtnGroundTruth read_ltn_truth(const std::string& path);

void write_lda_truth(const std::string& path, const LdaGroundTruth& truth, std::uint64_t seed);
LdaGroundTruth read_lda_truth(const std::string& path);

std::string truth_model(const std::string& path);

// ----- perplexity and cross-validation outputs ------------------------------

void write_perplexity(const std::string& dir, const PerplexityResult& result,
                      const std::vector<std::string>& sample_ids, const std::string& model,
                      int K, int C);

void write_cv_result(const std::string& dir, const CvResult& result, const std::string& model,
                     double inflection_tol);

}  // namespace ltnlda
