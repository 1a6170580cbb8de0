#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "rbcorr/types.hpp"

namespace rbcorr {

/// Numerically stable log(sum(exp(lp_i))) over token-variant logprobs.
/// Shifts by the maximum before exponentiating, so widely negative inputs
/// stay finite. Throws std::invalid_argument on an empty or non-finite list.
double merge_variants(
    std::span<const std::pair<std::string, double>> variants);

/// All records sharing one RunConfig. Content-free probe records are kept
/// apart from evaluation items; metrics and calibration operate on `records`
/// only.
struct ConditionGroup {
  RunConfig run;
  std::vector<LogProbRecord> records;
  std::vector<LogProbRecord> probes;

  const OptionSpace& space() const { return run.space(); }
};

/// Validated, immutable-after-load collection of records grouped by
/// condition. Groups appear in first-seen order; records keep input order.
class RecordStore {
 public:
  // Validates the record and enforces item_id uniqueness within its
  // condition group; throws Error on violation.
  void add(LogProbRecord record);

  const std::vector<ConditionGroup>& groups() const { return groups_; }
  const ConditionGroup* find(const RunConfig& run) const;
  std::size_t size() const;
  bool empty() const { return groups_.empty(); }

  std::vector<std::string>& warnings() { return warnings_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  std::vector<ConditionGroup> groups_;
  std::vector<std::unordered_set<std::string>> seen_ids_;
  std::vector<std::string> warnings_;
};

nlohmann::ordered_json record_to_json(const LogProbRecord& record);

// Throws Error on schema violations; merges raw variants into
// option_logprobs and cross-checks against pre-merged values when both are
// present (tolerance 1e-9).
LogProbRecord record_from_json(const nlohmann::json& j);

/// Loads JSON-lines records. Parse and validation errors name the offending
/// line ("path:N: ..."); logprob values above 0 produce warnings on the
/// store rather than errors.
RecordStore load_records(const std::filesystem::path& path);
void load_records_into(RecordStore& store, const std::filesystem::path& path);
void load_records_into(RecordStore& store, std::istream& in,
                       std::string_view source_name);

void save_records(const RecordStore& store, const std::filesystem::path& path);
void save_records(const RecordStore& store, std::ostream& out);

/// Per-gold-label counts for one record group; balanced iff all counts are
/// equal. Content-free probes are skipped.
struct ImbalanceReport {
  bool balanced = false;
  std::map<std::string, int> counts;
};

ImbalanceReport assert_class_balanced(std::span<const LogProbRecord> records,
                                      const OptionSpace& space);

}  // namespace rbcorr
