#pragma once

#include <cstdint>
#include <filesystem>
#include <span>

#include "rbcorr/types.hpp"

namespace rbcorr {

/// Controlled-bias generator spec. The unbiased construction rotates the same
/// (margin-separated) signal pattern across gold classes, so per-option
/// unbiased means are equal — the condition under which full-set mean
/// subtraction provably recovers the unbiased decision.
struct SyntheticSpec {
  OptionSpace space = OptionSpace::for_question_type(QuestionType::two_choice);
  int n_per_class = 0;
  double signal_margin = 1.0;     // logprob gap favoring the gold option
  double noise_sigma = 0.0;       // zero-mean Gaussian per option logprob
  std::map<std::string, double> bias;  // additive per-option offset
  std::uint64_t seed = 0;
  RunConfig run{"synthetic-model", "synthetic", PromptFormat::fewshot,
                "synthetic", QuestionType::two_choice};
};

struct SyntheticGroup {
  std::vector<LogProbRecord> records;
  // Unbiased (signal + noise, no bias) logprobs, parallel to records.
  std::vector<std::map<std::string, double>> unbiased;
};

/// Deterministic per seed; records are interleaved by gold class so every
/// prefix is near-balanced and the full group is exactly class-balanced.
SyntheticGroup generate_synthetic(const SyntheticSpec& spec);

struct OracleReport {
  int n = 0;
  int agreements = 0;
  double agreement_rate = 0.0;
  std::vector<std::string> disagreeing_items;
};

/// Compares respond(record, term) against the argmax of the retained unbiased
/// logprobs, record by record.
OracleReport oracle_check(
    std::span<const LogProbRecord> records,
    std::span<const std::map<std::string, double>> unbiased,
    const CorrectionTerm& term);

/// Sidecar metadata: one JSON line per record with item_id and its unbiased
/// logprobs.
void save_synthetic_metadata(const SyntheticGroup& group,
                             const std::filesystem::path& path);

}  // namespace rbcorr
