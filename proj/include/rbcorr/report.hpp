#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>

#include <json.hpp>

#include "rbcorr/ingest.hpp"
#include "rbcorr/types.hpp"

namespace rbcorr {

/// Writes via a temp file in the target directory plus rename, so readers
/// never observe a half-written file.
void write_atomic(const std::filesystem::path& path, std::string_view content);

std::string csv_escape(std::string_view field);

/// UTC ISO-8601 timestamp; honors SOURCE_DATE_EPOCH so report outputs stay
/// byte-identical across reruns when reproducibility matters.
std::string timestamp_utc();

/// Baseline response label distributions, one row per (condition, label):
/// model,dataset,prompt_format,label,proportion,uniform_reference
void emit_label_distribution_csv(std::ostream& out, const RecordStore& store);

struct MethodComparisonRow {
  std::string dataset;
  std::string model;
  double baseline_acc = 0.0;   // fraction
  double baseline_tvd = 0.0;
  std::optional<double> cc_dacc, cc_dtvd;
  std::optional<double> bc_dacc, bc_dtvd;
  std::optional<double> rbcorr_dacc, rbcorr_dtvd;
};

/// Accuracy cells in percent at one decimal, tvd cells at three decimals,
/// missing method cells as NA. Columns: dataset,model,baseline_acc,
/// baseline_tvd,cc_dacc,cc_dtvd,bc_dacc,bc_dtvd,rbcorr_dacc,rbcorr_dtvd
void emit_method_comparison_csv(std::ostream& out,
                                std::span<const MethodComparisonRow> rows);

struct MethodOutcomeSummary {
  CorrectionMethod method = CorrectionMethod::rbcorr;
  int size = 0;
  int iterations = 0;
  std::uint64_t base_seed = 0;
  double delta_acc = 0.0;
  double delta_tvd = 0.0;
  double median_corrected_accuracy = 0.0;
  double median_corrected_tvd = 0.0;
};

struct ConditionReport {
  RunConfig run;
  EvalResult baseline;
  std::vector<MethodOutcomeSummary> methods;
};

struct ReportBundle {
  std::string version;
  std::string generated_at;
  std::vector<ConditionReport> conditions;
  nlohmann::ordered_json sweeps = nlohmann::ordered_json::array();
  nlohmann::ordered_json transfers = nlohmann::ordered_json::array();
};

nlohmann::ordered_json bundle_to_json(const ReportBundle& bundle);

}  // namespace rbcorr
