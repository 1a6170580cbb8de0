#include "rbcorr/prompts.hpp"

#include <algorithm>

namespace rbcorr {

namespace {

struct TemplateDef {
  const char* dataset;
  QuestionType question_type;
  const char* instruction;
  const char* example1;
  const char* example2;
  const char* item_prefix;
  const char* item_separator;
};

// The 3-choice NLI datasets carry their own scaffolding conventions: example
// blocks start directly with "Premise:" and the item slot is "#EXAMPLE:" with
// the item on the next line.
constexpr TemplateDef kTemplates[] = {
    {"arith", QuestionType::two_choice,
     "Answer the following yes-no questions:",
     "#EXAMPLE\nQuestion: Is 7 minus 9 equal to 4?\nResponse: No",
     "#EXAMPLE\nQuestion: Is 17 plus 15 equal to 32?\nResponse: Yes",
     "#EXAMPLE\nQuestion:", " "},
    {"babi", QuestionType::two_choice,
     "Answer the following yes-no questions:",
     "#EXAMPLE\nQuestion: Marshall is in the car. Is Marshall in the "
     "building?\nResponse: No",
     "#EXAMPLE\nQuestion: Nathan is a pianist. Pianists like oranges. Does "
     "Nathan like oranges?\nResponse: Yes",
     "#EXAMPLE\nQuestion:", " "},
    {"comps", QuestionType::two_choice,
     "Answer the following yes-no questions:",
     "#EXAMPLE\nQuestion: Does a blueberry fire bullets?\nResponse: No",
     "#EXAMPLE\nQuestion: Does a turtle have a hard shell?\nResponse: Yes",
     "#EXAMPLE\nQuestion:", " "},
    {"ewok", QuestionType::two_choice,
     "Answer the following yes-no questions:",
     "#EXAMPLE\nQuestion: Claire sees something that is fabric. Can Claire "
     "pour it?\nResponse: No",
     "#EXAMPLE\nQuestion: Sally pays salary to Harry. Is Sally Harry's "
     "boss?\nResponse: Yes",
     "#EXAMPLE\nQuestion:", " "},
    {"snli", QuestionType::three_choice,
     "Answer the following Recognizing Textual Entailment questions using a "
     "single digit. Entailment (0) implies the hypothesis is true given the "
     "premise. Neutral (1) implies the premise doesn't provide enough "
     "information to determine the hypothesis. Contradiction (2) implies the "
     "hypothesis is false given the premise.",
     "#EXAMPLE\nPremise: A man is playing a guitar. Hypothesis: A person is "
     "making music.\nResponse: 0",
     "#EXAMPLE\nPremise: A woman is reading a book in the library. "
     "Hypothesis: A woman is swimming. \nResponse: 2",
     "#EXAMPLE:", "\n"},
    {"mnli", QuestionType::three_choice,
     "Answer the following Recognizing Textual Entailment questions using a "
     "single digit. Entailment (0) implies the hypothesis is true given the "
     "premise. Neutral (1) implies the premise doesn't provide enough "
     "information to determine the hypothesis. Contradiction (2) implies the "
     "hypothesis is false given the premise.",
     "#EXAMPLE\nPremise: A man is playing a guitar. Hypothesis: A person is "
     "making music.\nResponse: 0",
     "#EXAMPLE\nPremise: A woman is reading a book in the library. "
     "Hypothesis: A woman is swimming. \nResponse: 2",
     "#EXAMPLE:", "\n"},
    {"mmlu", QuestionType::four_choice,
     "Answer the following multiple choice questions:",
     "#EXAMPLE\nQuestion: What is the shape of the Earth?\nOptions: (A) "
     "Cone, (B) Cube, (C) Sphere, (D) Cylinder\nResponse: C",
     "#EXAMPLE\nQuestion: What is the color of the sky?\nOptions: (A) Red, "
     "(B) Blue, (C) Green, (D) Yellow\nResponse: B",
     "#EXAMPLE\nQuestion:", " "},
};

std::string normalize_dataset(std::string_view dataset_id) {
  std::string key(dataset_id);
  std::transform(key.begin(), key.end(), key.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (key.rfind("mmlu", 0) == 0) return "mmlu";
  return key;
}

}  // namespace

PromptTemplate prompt_template(std::string_view dataset_id,
                               PromptFormat format) {
  const std::string key = normalize_dataset(dataset_id);
  const TemplateDef* def = nullptr;
  for (const auto& t : kTemplates) {
    if (key == t.dataset) {
      def = &t;
      break;
    }
  }
  if (def == nullptr) {
    throw Error("prompt_template: unknown dataset '" + std::string(dataset_id) +
                "'");
  }
  if (def->question_type == QuestionType::three_choice &&
      format == PromptFormat::zeroshot) {
    throw Error("prompt_template: format mismatch: '" + def->dataset +
                std::string("' has no zeroshot template"));
  }

  PromptTemplate tpl;
  tpl.dataset_id = def->dataset;
  tpl.format = format;
  tpl.question_type = def->question_type;
  tpl.instruction = def->instruction;
  tpl.example_blocks = {def->example1, def->example2};
  tpl.item_prefix = def->item_prefix;
  tpl.item_separator = def->item_separator;
  return tpl;
}

std::vector<std::string> known_template_datasets() {
  std::vector<std::string> names;
  for (const auto& t : kTemplates) names.emplace_back(t.dataset);
  return names;
}

std::string build_prompt(const PromptTemplate& tpl,
                         std::string_view item_text) {
  if (tpl.format == PromptFormat::zeroshot) {
    if (tpl.question_type == QuestionType::three_choice) {
      throw Error("build_prompt: format mismatch: three-choice items have no "
                  "zeroshot scaffolding");
    }
    return std::string(item_text);
  }

  std::string prompt = "#INSTRUCTIONS\n";
  prompt += tpl.instruction;
  if (tpl.format == PromptFormat::fewshot) {
    for (const auto& block : tpl.example_blocks) {
      prompt += "\n\n";
      prompt += block;
    }
  }
  prompt += "\n\n";
  prompt += tpl.item_prefix;
  prompt += tpl.item_separator;
  prompt += item_text;
  if (tpl.append_response_line) {
    prompt += "\nResponse:";
  }
  return prompt;
}

}  // namespace rbcorr
