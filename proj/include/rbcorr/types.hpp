#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

namespace rbcorr {

// Data and I/O failures. Precondition violations throw std::invalid_argument.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class QuestionType { two_choice, three_choice, four_choice };
enum class PromptFormat { zeroshot, instruction_only, fewshot };

std::string_view to_string(QuestionType qt);
std::string_view to_string(PromptFormat pf);
QuestionType question_type_from_string(std::string_view s);
PromptFormat prompt_format_from_string(std::string_view s);

/// Ordered set of canonical answer labels for a question type.
///
/// Label order is canonical: index i means the same label everywhere —
/// serialization, metrics, correction terms, and argmax tie-breaking all use
/// this ordering.
class OptionSpace {
 public:
  // Throws std::invalid_argument unless labels are unique, non-empty, and
  // 2-4 in count.
  explicit OptionSpace(std::vector<std::string> labels);

  static const OptionSpace& for_question_type(QuestionType qt);

  const std::vector<std::string>& labels() const { return labels_; }
  int arity() const { return static_cast<int>(labels_.size()); }
  bool contains(std::string_view label) const;
  std::optional<int> index_of(std::string_view label) const;

  bool operator==(const OptionSpace&) const = default;

 private:
  std::vector<std::string> labels_;
};

/// (model, dataset, prompt format) triple identifying one experimental
/// condition, plus the attributes transfer constraints check against.
struct RunConfig {
  std::string model_id;
  std::string dataset_id;
  PromptFormat prompt_format = PromptFormat::fewshot;
  std::string model_family;
  QuestionType question_type = QuestionType::two_choice;

  const OptionSpace& space() const {
    return OptionSpace::for_question_type(question_type);
  }

  auto key() const {
    return std::tie(model_id, dataset_id, prompt_format, model_family,
                    question_type);
  }

  friend bool operator==(const RunConfig& a, const RunConfig& b) {
    return a.key() == b.key();
  }
  friend bool operator<(const RunConfig& a, const RunConfig& b) {
    return a.key() < b.key();
  }
};

// Human-readable "model/dataset/format" tag for diagnostics.
std::string describe(const RunConfig& run);

/// One evaluation item: merged per-option log-probabilities plus optional raw
/// token variants (kept so merging stays auditable).
struct LogProbRecord {
  std::string item_id;
  RunConfig run;
  // canonical label -> merged log-probability
  std::map<std::string, double> option_logprobs;
  // canonical label -> [(variant token, logprob), ...]; empty when the source
  // supplied pre-merged values only
  std::map<std::string, std::vector<std::pair<std::string, double>>>
      raw_variants;
  std::string gold_label;
  bool is_content_free = false;
};

enum class CorrectionMethod { rbcorr, cc, bc, identity };

std::string_view to_string(CorrectionMethod m);
CorrectionMethod correction_method_from_string(std::string_view s);

/// How a correction term's offsets were estimated.
struct CalibrationDescriptor {
  int size = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> item_ids;
};

/// Per-option additive offsets subtracted from item log-probabilities before
/// the argmax.
struct CorrectionTerm {
  std::map<std::string, double> offsets;
  CorrectionMethod method = CorrectionMethod::identity;
  std::optional<RunConfig> provenance_run;
  std::optional<CalibrationDescriptor> provenance_calibration;

  static CorrectionTerm identity_for(const OptionSpace& space);
};

struct LabelDistribution {
  std::map<std::string, double> proportions;
  int n = 0;
};

struct EvalResult {
  double accuracy = 0.0;
  double tvd = 0.0;
  double rstd = 0.0;
  LabelDistribution label_distribution;
  int n_items = 0;
};

enum class ValidationCode {
  missing_option,
  unknown_gold,
  non_finite,
  arity_mismatch,
  invalid_prompt_format,
};

std::string_view to_string(ValidationCode code);

struct ValidationError {
  ValidationCode code;
  std::string message;
};

/// Checks every record invariant against the given space; nullopt means ok.
///
/// Logprob values above zero are accepted (some endpoints return unnormalized
/// scores); only NaN/Inf fail, with code non_finite.
std::optional<ValidationError> validate_record(const LogProbRecord& record,
                                               const OptionSpace& space);

}  // namespace rbcorr
