#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "rbcorr/types.hpp"

namespace rbcorr {

/// One dataset's prompt scaffolding for one format.
///
/// fewshot = instruction + two worked example blocks + item slot;
/// instruction_only = instruction + item slot; zeroshot = the item text
/// alone. Three-choice templates exist only for instruction_only and
/// fewshot.
struct PromptTemplate {
  std::string dataset_id;
  PromptFormat format = PromptFormat::fewshot;
  QuestionType question_type = QuestionType::two_choice;
  std::string instruction;
  std::vector<std::string> example_blocks;
  std::string item_prefix;      // "#EXAMPLE\nQuestion:" or "#EXAMPLE:"
  std::string item_separator;   // " " or "\n" between prefix and item text
  // Ends the prompt with "\nResponse:" so scoring happens right after the
  // response cue, mirroring the example blocks. Ignored for zeroshot.
  bool append_response_line = true;
};

/// Known dataset template keys: arith, babi, comps, ewok, snli, mnli, mmlu
/// (any id starting with "mmlu" maps to the mmlu template). Throws Error for
/// unknown datasets or format mismatches (e.g. snli + zeroshot).
PromptTemplate prompt_template(std::string_view dataset_id,
                               PromptFormat format);

std::vector<std::string> known_template_datasets();

/// Byte-exact prompt assembly, ending at the point where the response token
/// is scored.
std::string build_prompt(const PromptTemplate& tpl, std::string_view item_text);

}  // namespace rbcorr
