#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "rbcorr/types.hpp"

namespace rbcorr {

/// Item ids of one class-balanced, seeded calibration draw.
struct CalibrationSample {
  std::vector<std::string> item_ids;
  int size = 0;
  std::uint64_t seed = 0;
  std::map<std::string, int> per_label_counts;
};

/// Stratified sample: floor(size/arity) items per gold class, with the
/// remainder going one each to classes in canonical label order. Selection is
/// uniform without replacement within each class and deterministic given
/// (records, size, seed).
CalibrationSample sample_calibration(std::span<const LogProbRecord> records,
                                     int size, std::uint64_t seed);

/// Mean per-option logprob over the calibration items, in log space.
CorrectionTerm rbcorr_term(std::span<const LogProbRecord> records,
                           const CalibrationSample& sample);

/// Records minus the calibration items; disjointness guaranteed.
std::vector<LogProbRecord> evaluation_split(
    std::span<const LogProbRecord> records, const CalibrationSample& sample);

/// Contextual-calibration term from content-free probe records: each probe's
/// logprobs are softmax-normalized over the option set, the probability
/// vectors are averaged, and the offsets are the logs of the mean
/// probabilities. Subtracting the offset in log space divides by the mean
/// content-free probability in probability space.
CorrectionTerm cc_term(std::span<const LogProbRecord> content_free_records);

/// Batch-calibration term: unlabeled per-option mean logprob over the batch.
CorrectionTerm bc_term(std::span<const LogProbRecord> batch);

/// Running per-option mean over all items seen so far; after any batch
/// partition of a set, the emitted term equals bc_term over the full set.
/// Single-writer: callers serialize update().
class BcStreamingState {
 public:
  explicit BcStreamingState(const OptionSpace& space);

  CorrectionTerm update(std::span<const LogProbRecord> incoming);
  CorrectionTerm current() const;
  long items_seen() const { return count_; }

 private:
  OptionSpace space_;
  std::map<std::string, double> sums_;
  long count_ = 0;
};

nlohmann::ordered_json term_to_json(const CorrectionTerm& term);
CorrectionTerm term_from_json(const nlohmann::json& j);

}  // namespace rbcorr
