#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>

#include <json.hpp>

#include "rbcorr/ingest.hpp"
#include "rbcorr/types.hpp"

namespace rbcorr {

struct IterationOutcome {
  double accuracy = 0.0;
  double tvd = 0.0;
  // Identity-term metrics on the same evaluation split.
  double baseline_accuracy = 0.0;
  double baseline_tvd = 0.0;
};

struct SweepResult {
  int size = 0;
  CorrectionMethod method = CorrectionMethod::rbcorr;
  std::uint64_t base_seed = 0;
  std::vector<IterationOutcome> per_iteration;

  double mean_accuracy = 0.0;
  double median_accuracy = 0.0;
  double median_tvd = 0.0;
  double iqr_q1 = 0.0;  // accuracy quartiles over iterations
  double iqr_q3 = 0.0;

  // Medians of the per-iteration evaluation-split baselines.
  double median_baseline_accuracy = 0.0;
  double median_baseline_tvd = 0.0;

  // Headline baseline: identity term on the full group.
  double baseline_accuracy = 0.0;
  double baseline_tvd = 0.0;
};

/// Iteration k uses seed base_seed + k: sample a class-balanced calibration
/// set, build the method's term, and evaluate on the complementary split.
/// Per-iteration baselines use the identity term on the same split, so they
/// depend only on the split, not on the method.
///
/// Term construction per method: rbcorr from the calibration sample; bc from
/// the evaluation split itself (the batch being predicted, one full batch);
/// cc from the group's content-free probes (fixed across iterations);
/// identity is the zero term.
SweepResult run_correction_iterations(const ConditionGroup& group,
                                      CorrectionMethod method, int size,
                                      int n_iter, std::uint64_t base_seed);

struct SweepEntry {
  int size = 0;
  std::optional<SweepResult> result;
  std::string error;  // set when this size was infeasible
};

/// One entry per requested size; infeasible sizes report their error without
/// aborting the sweep. Seeds are varied deterministically per (size,
/// iteration).
std::vector<SweepEntry> size_sweep(const ConditionGroup& group,
                                   CorrectionMethod method,
                                   std::span<const int> sizes, int n_iter,
                                   std::uint64_t base_seed);

struct BeforeAfterReport {
  EvalResult baseline;  // identity term on the full group
  double median_corrected_accuracy = 0.0;
  double median_corrected_tvd = 0.0;
  // Median corrected minus median per-iteration baseline.
  double delta_accuracy = 0.0;
  double delta_tvd = 0.0;
  SweepResult iterations;
};

BeforeAfterReport before_after_report(const ConditionGroup& group,
                                      CorrectionMethod method, int size,
                                      int n_iter, std::uint64_t base_seed);

/// CSV columns: size, iteration, accuracy, tvd, baseline_accuracy,
/// baseline_tvd. Failed sweep entries are skipped (their errors live in the
/// JSON form).
void write_sweep_csv(std::ostream& out, std::span<const SweepEntry> entries);

nlohmann::ordered_json sweep_to_json(std::span<const SweepEntry> entries);
nlohmann::ordered_json sweep_result_to_json(const SweepResult& result);
nlohmann::ordered_json before_after_to_json(const BeforeAfterReport& report);
nlohmann::ordered_json eval_result_to_json(const EvalResult& result);

}  // namespace rbcorr
