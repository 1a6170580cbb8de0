#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>

#include "rbcorr/experiments.hpp"
#include "rbcorr/ingest.hpp"
#include "rbcorr/types.hpp"

namespace rbcorr {

enum class TransferModality { cross_dataset, cross_model, cross_prompt };

std::string_view to_string(TransferModality m);
TransferModality transfer_modality_from_string(std::string_view s);

/// Ordered (source, target) condition pair; exactly one of the identity
/// fields differs, matching the modality. Cross-model pairs stay within one
/// model family; cross-dataset pairs stay within one question type.
struct TransferPair {
  RunConfig source;
  RunConfig target;
  TransferModality modality = TransferModality::cross_dataset;
};

// nullopt when the pair satisfies every TransferPair invariant.
std::optional<std::string> validate_pair(const TransferPair& pair);

/// All ordered pairs over the (deduplicated) configs that are valid for the
/// modality. A->B and B->A are distinct.
std::vector<TransferPair> enumerate_pairs(std::span<const RunConfig> configs,
                                          TransferModality modality);

struct TransferOptions {
  CorrectionMethod method = CorrectionMethod::rbcorr;
  int size = 500;
  int n_iter = 100;
  std::uint64_t base_seed = 0;
  // Test mode: permit source == target (self-transfer oracle).
  bool allow_self = false;
};

struct TransferOutcome {
  TransferPair pair;
  // Median-over-iterations deltas vs the per-iteration target baseline.
  double delta_acc = 0.0;
  double delta_tvd = 0.0;
  double same_cond_delta_acc = 0.0;
  double same_cond_delta_tvd = 0.0;
  // False when same-condition correction did not improve both metrics; such
  // pairs are scored not-successful.
  bool same_condition_improved = false;
  bool success = false;
};

/// The 80%-preservation criterion, inclusive at the boundary (a 1e-12 slack
/// absorbs floating-point noise in the scaled comparison). Only defined when
/// same-condition correction improved both metrics.
bool transfer_success(double delta_acc, double delta_tvd,
                      double same_cond_delta_acc, double same_cond_delta_tvd);

/// Per iteration k (seed = base_seed + k): build the method's term from a
/// source calibration sample and apply it to the target evaluation split;
/// same-condition deltas come from the target's own term on the identical
/// split, so self-transfer reproduces them bit-for-bit.
TransferOutcome run_transfer(const TransferPair& pair,
                             const ConditionGroup& source,
                             const ConditionGroup& target,
                             const TransferOptions& options);

struct ModalitySummary {
  TransferModality modality = TransferModality::cross_dataset;
  int total_pairs = 0;
  int successes = 0;
  double success_rate = 0.0;
  // NaN when no pair qualifies for the bucket.
  double mean_dacc_success = 0.0;
  double mean_dtvd_success = 0.0;
  double mean_dacc_all = 0.0;
  double mean_dtvd_all = 0.0;
};

/// One row per modality present in the outcomes; absent modalities get an
/// explicit zero-pair row.
std::vector<ModalitySummary> transfer_summary(
    std::span<const TransferOutcome> outcomes);

/// Square matrix over the axis configs (the field the modality varies);
/// diagonal cells carry the same-condition deltas. Throws Error when the
/// outcomes do not cover the full off-diagonal grid, listing missing cells.
struct TransferHeatmap {
  TransferModality modality = TransferModality::cross_dataset;
  std::vector<std::string> keys;               // axis labels, input order
  std::vector<std::vector<double>> delta_acc;  // [source][target]
  std::vector<std::vector<double>> delta_tvd;
};

TransferHeatmap transfer_heatmap(std::span<const RunConfig> axis_configs,
                                 std::span<const TransferOutcome> outcomes);

// CSV: modality,total_pairs,successful,success_rate,mean_dacc_success,
//      mean_dtvd_success,mean_dacc_all,mean_dtvd_all ("NA" for empty means)
void write_transfer_summary_csv(std::ostream& out,
                                std::span<const ModalitySummary> rows);

// Long-form CSV: source,target,delta_acc,delta_tvd (diagonal included).
void write_heatmap_csv(std::ostream& out, const TransferHeatmap& heatmap);

nlohmann::ordered_json transfer_outcomes_to_json(
    std::span<const TransferOutcome> outcomes);
nlohmann::ordered_json transfer_summary_to_json(
    std::span<const ModalitySummary> rows);

}  // namespace rbcorr
