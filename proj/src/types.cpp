#include "rbcorr/types.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace rbcorr {

std::string_view to_string(QuestionType qt) {
  switch (qt) {
    case QuestionType::two_choice:
      return "two_choice";
    case QuestionType::three_choice:
      return "three_choice";
    case QuestionType::four_choice:
      return "four_choice";
  }
  return "?";
}

std::string_view to_string(PromptFormat pf) {
  switch (pf) {
    case PromptFormat::zeroshot:
      return "zeroshot";
    case PromptFormat::instruction_only:
      return "instruction_only";
    case PromptFormat::fewshot:
      return "fewshot";
  }
  return "?";
}

QuestionType question_type_from_string(std::string_view s) {
  if (s == "two_choice") return QuestionType::two_choice;
  if (s == "three_choice") return QuestionType::three_choice;
  if (s == "four_choice") return QuestionType::four_choice;
  throw Error("unknown question_type: '" + std::string(s) + "'");
}

PromptFormat prompt_format_from_string(std::string_view s) {
  if (s == "zeroshot") return PromptFormat::zeroshot;
  if (s == "instruction_only") return PromptFormat::instruction_only;
  if (s == "fewshot") return PromptFormat::fewshot;
  throw Error("unknown prompt_format: '" + std::string(s) + "'");
}

std::string_view to_string(CorrectionMethod m) {
  switch (m) {
    case CorrectionMethod::rbcorr:
      return "rbcorr";
    case CorrectionMethod::cc:
      return "cc";
    case CorrectionMethod::bc:
      return "bc";
    case CorrectionMethod::identity:
      return "identity";
  }
  return "?";
}

CorrectionMethod correction_method_from_string(std::string_view s) {
  if (s == "rbcorr") return CorrectionMethod::rbcorr;
  if (s == "cc") return CorrectionMethod::cc;
  if (s == "bc") return CorrectionMethod::bc;
  if (s == "identity") return CorrectionMethod::identity;
  throw Error("unknown correction method: '" + std::string(s) + "'");
}

std::string_view to_string(ValidationCode code) {
  switch (code) {
    case ValidationCode::missing_option:
      return "missing-option";
    case ValidationCode::unknown_gold:
      return "unknown-gold";
    case ValidationCode::non_finite:
      return "non-finite";
    case ValidationCode::arity_mismatch:
      return "arity-mismatch";
    case ValidationCode::invalid_prompt_format:
      return "invalid-prompt-format";
  }
  return "?";
}

OptionSpace::OptionSpace(std::vector<std::string> labels)
    : labels_(std::move(labels)) {
  if (labels_.size() < 2 || labels_.size() > 4) {
    throw std::invalid_argument("OptionSpace: arity must be 2, 3, or 4");
  }
  std::set<std::string> seen;
  for (const auto& l : labels_) {
    if (l.empty()) {
      throw std::invalid_argument("OptionSpace: labels must be non-empty");
    }
    if (!seen.insert(l).second) {
      throw std::invalid_argument("OptionSpace: duplicate label '" + l + "'");
    }
  }
}

const OptionSpace& OptionSpace::for_question_type(QuestionType qt) {
  static const OptionSpace two({"Yes", "No"});
  static const OptionSpace three({"0", "1", "2"});
  static const OptionSpace four({"A", "B", "C", "D"});
  switch (qt) {
    case QuestionType::two_choice:
      return two;
    case QuestionType::three_choice:
      return three;
    case QuestionType::four_choice:
      return four;
  }
  throw std::invalid_argument("bad QuestionType");
}

bool OptionSpace::contains(std::string_view label) const {
  return index_of(label).has_value();
}

std::optional<int> OptionSpace::index_of(std::string_view label) const {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] == label) return static_cast<int>(i);
  }
  return std::nullopt;
}

std::string describe(const RunConfig& run) {
  std::string s = run.model_id;
  s += "/";
  s += run.dataset_id;
  s += "/";
  s += to_string(run.prompt_format);
  return s;
}

CorrectionTerm CorrectionTerm::identity_for(const OptionSpace& space) {
  CorrectionTerm term;
  term.method = CorrectionMethod::identity;
  for (const auto& label : space.labels()) {
    term.offsets[label] = 0.0;
  }
  return term;
}

std::optional<ValidationError> validate_record(const LogProbRecord& record,
                                               const OptionSpace& space) {
  const auto fail = [&](ValidationCode code, std::string msg) {
    return ValidationError{code, "record '" + record.item_id + "': " +
                                     std::move(msg)};
  };

  if (OptionSpace::for_question_type(record.run.question_type) != space) {
    return fail(ValidationCode::arity_mismatch,
                "question_type implies a different option space");
  }
  if (record.run.question_type == QuestionType::three_choice &&
      record.run.prompt_format == PromptFormat::zeroshot) {
    return fail(ValidationCode::invalid_prompt_format,
                "three_choice records cannot use the zeroshot prompt format");
  }

  for (const auto& label : space.labels()) {
    if (!record.option_logprobs.count(label)) {
      return fail(ValidationCode::missing_option,
                  "missing logprob for option '" + label + "'");
    }
  }
  if (static_cast<int>(record.option_logprobs.size()) != space.arity()) {
    for (const auto& [label, _] : record.option_logprobs) {
      if (!space.contains(label)) {
        return fail(ValidationCode::arity_mismatch,
                    "logprob for '" + label + "' is not in the option space");
      }
    }
    return fail(ValidationCode::arity_mismatch, "option count mismatch");
  }
  for (const auto& [label, lp] : record.option_logprobs) {
    if (!std::isfinite(lp)) {
      return fail(ValidationCode::non_finite,
                  "non-finite logprob for option '" + label + "'");
    }
  }

  for (const auto& [label, variants] : record.raw_variants) {
    if (!space.contains(label)) {
      return fail(ValidationCode::arity_mismatch,
                  "raw variants for '" + label + "' not in the option space");
    }
    for (const auto& [token, lp] : variants) {
      if (!std::isfinite(lp)) {
        return fail(ValidationCode::non_finite,
                    "non-finite variant logprob for token '" + token + "'");
      }
    }
  }

  if (!record.is_content_free && !space.contains(record.gold_label)) {
    return fail(ValidationCode::unknown_gold,
                "gold label '" + record.gold_label + "' not in option space");
  }
  return std::nullopt;
}

}  // namespace rbcorr
