#include "rbcorr/synthetic.hpp"

#include <fstream>
#include <random>

#include <json.hpp>

#include "rbcorr/metrics.hpp"

namespace rbcorr {

SyntheticGroup generate_synthetic(const SyntheticSpec& spec) {
  if (spec.n_per_class < 1) {
    throw std::invalid_argument("generate_synthetic: n_per_class must be >= 1");
  }
  if (spec.signal_margin <= 0.0) {
    throw std::invalid_argument("generate_synthetic: signal_margin must be > 0");
  }
  if (spec.noise_sigma < 0.0) {
    throw std::invalid_argument("generate_synthetic: noise_sigma must be >= 0");
  }
  for (const auto& [label, _] : spec.bias) {
    if (!spec.space.contains(label)) {
      throw std::invalid_argument("generate_synthetic: bias label '" + label +
                                  "' not in option space");
    }
  }

  RunConfig run = spec.run;
  switch (spec.space.arity()) {
    case 2: run.question_type = QuestionType::two_choice; break;
    case 3: run.question_type = QuestionType::three_choice; break;
    case 4: run.question_type = QuestionType::four_choice; break;
    default:
      throw std::invalid_argument("generate_synthetic: unsupported arity");
  }
  if (run.question_type == QuestionType::three_choice &&
      run.prompt_format == PromptFormat::zeroshot) {
    run.prompt_format = PromptFormat::fewshot;
  }
  if (run.space() != spec.space) {
    throw std::invalid_argument(
        "generate_synthetic: only the canonical option spaces are supported");
  }

  const int arity = spec.space.arity();
  const int total = spec.n_per_class * arity;
  const double hi = -1.0;
  const double lo = -1.0 - spec.signal_margin;

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> noise(0.0, spec.noise_sigma > 0.0
                                                  ? spec.noise_sigma
                                                  : 1.0);

  SyntheticGroup group;
  group.records.reserve(total);
  group.unbiased.reserve(total);

  char id_buf[32];
  for (int i = 0; i < total; ++i) {
    const int c = i % arity;
    const std::string& gold = spec.space.labels()[c];

    LogProbRecord rec;
    std::snprintf(id_buf, sizeof(id_buf), "syn-%06d", i);
    rec.item_id = id_buf;
    rec.run = run;
    rec.gold_label = gold;

    std::map<std::string, double> unbiased;
    for (int o = 0; o < arity; ++o) {
      const std::string& label = spec.space.labels()[o];
      double value = (o == c) ? hi : lo;
      if (spec.noise_sigma > 0.0) value += noise(rng);
      unbiased[label] = value;
      auto bias_it = spec.bias.find(label);
      rec.option_logprobs[label] =
          value + (bias_it != spec.bias.end() ? bias_it->second : 0.0);
    }
    group.records.push_back(std::move(rec));
    group.unbiased.push_back(std::move(unbiased));
  }
  return group;
}

OracleReport oracle_check(
    std::span<const LogProbRecord> records,
    std::span<const std::map<std::string, double>> unbiased,
    const CorrectionTerm& term) {
  if (records.size() != unbiased.size()) {
    throw Error("oracle_check: metadata misaligned with record group");
  }
  OracleReport report;
  report.n = static_cast<int>(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const OptionSpace& space = records[i].run.space();
    const std::string* best = nullptr;
    double best_score = 0.0;
    for (const auto& label : space.labels()) {
      auto it = unbiased[i].find(label);
      if (it == unbiased[i].end()) {
        throw Error("oracle_check: metadata for '" + records[i].item_id +
                    "' missing option '" + label + "'");
      }
      if (best == nullptr || it->second > best_score) {
        best = &label;
        best_score = it->second;
      }
    }
    if (respond(records[i], term) == *best) {
      ++report.agreements;
    } else {
      report.disagreeing_items.push_back(records[i].item_id);
    }
  }
  report.agreement_rate =
      report.n == 0 ? 1.0
                    : static_cast<double>(report.agreements) / report.n;
  return report;
}

void save_synthetic_metadata(const SyntheticGroup& group,
                             const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open file for writing: " + path.string());
  for (std::size_t i = 0; i < group.records.size(); ++i) {
    nlohmann::ordered_json j;
    j["item_id"] = group.records[i].item_id;
    nlohmann::ordered_json lp;
    for (const auto& label : group.records[i].run.space().labels()) {
      lp[label] = group.unbiased[i].at(label);
    }
    j["unbiased_logprobs"] = std::move(lp);
    out << j.dump() << '\n';
  }
}

}  // namespace rbcorr
