#include "rbcorr/metrics.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "rbcorr/stats.hpp"

namespace rbcorr {

LabelDistribution uniform_distribution(const OptionSpace& space, int n) {
  LabelDistribution dist;
  dist.n = n;
  const double p = 1.0 / static_cast<double>(space.arity());
  for (const auto& label : space.labels()) dist.proportions[label] = p;
  return dist;
}

std::string respond(const LogProbRecord& record, const CorrectionTerm& term) {
  const OptionSpace& space = record.run.space();
  const std::string* best = nullptr;
  double best_score = -std::numeric_limits<double>::infinity();
  for (const auto& label : space.labels()) {
    auto lp = record.option_logprobs.find(label);
    if (lp == record.option_logprobs.end()) {
      throw Error("respond: record '" + record.item_id +
                  "' missing option '" + label + "'");
    }
    auto off = term.offsets.find(label);
    if (off == term.offsets.end()) {
      throw Error("respond: correction term does not cover option '" + label +
                  "'");
    }
    const double score = lp->second - off->second;
    if (best == nullptr || score > best_score) {
      best = &label;
      best_score = score;
    }
  }
  return *best;
}

namespace {

const OptionSpace& group_space(std::span<const LogProbRecord> records,
                               const char* op) {
  if (records.empty()) {
    throw std::invalid_argument(std::string(op) + ": empty record group");
  }
  const OptionSpace& space = records.front().run.space();
  for (const auto& rec : records) {
    if (rec.run.space() != space) {
      throw Error(std::string(op) + ": records span multiple option spaces");
    }
  }
  return space;
}

}  // namespace

LabelDistribution response_distribution(
    std::span<const LogProbRecord> records, const CorrectionTerm& term) {
  const OptionSpace& space = group_space(records, "response_distribution");
  std::map<std::string, int> counts;
  for (const auto& label : space.labels()) counts[label] = 0;
  for (const auto& rec : records) {
    counts[respond(rec, term)] += 1;
  }
  LabelDistribution dist;
  dist.n = static_cast<int>(records.size());
  for (const auto& [label, c] : counts) {
    dist.proportions[label] = static_cast<double>(c) / dist.n;
  }
  return dist;
}

double tvd(const LabelDistribution& g, const LabelDistribution& m) {
  if (g.proportions.size() != m.proportions.size()) {
    throw Error("tvd: option-space mismatch");
  }
  double acc = 0.0;
  for (const auto& [label, gp] : g.proportions) {
    auto it = m.proportions.find(label);
    if (it == m.proportions.end()) {
      throw Error("tvd: option-space mismatch on label '" + label + "'");
    }
    acc += std::abs(gp - it->second);
  }
  return 0.5 * acc;
}

double accuracy(std::span<const LogProbRecord> records,
                const CorrectionTerm& term) {
  group_space(records, "accuracy");
  int correct = 0;
  for (const auto& rec : records) {
    if (respond(rec, term) == rec.gold_label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(records.size());
}

double rstd(std::span<const LogProbRecord> records,
            const CorrectionTerm& term) {
  const OptionSpace& space = group_space(records, "rstd");
  std::map<std::string, int> totals;
  std::map<std::string, int> correct;
  for (const auto& label : space.labels()) {
    totals[label] = 0;
    correct[label] = 0;
  }
  for (const auto& rec : records) {
    auto it = totals.find(rec.gold_label);
    if (it == totals.end()) {
      throw Error("rstd: gold label '" + rec.gold_label +
                  "' not in option space");
    }
    ++it->second;
    if (respond(rec, term) == rec.gold_label) ++correct[rec.gold_label];
  }
  std::vector<double> recalls;
  for (const auto& label : space.labels()) {
    if (totals[label] == 0) {
      throw Error("rstd: missing-class: no gold items for '" + label + "'");
    }
    recalls.push_back(static_cast<double>(correct[label]) /
                      static_cast<double>(totals[label]));
  }
  return population_stddev(recalls);
}

EvalResult eval_all(std::span<const LogProbRecord> records,
                    const CorrectionTerm& term) {
  const OptionSpace& space = group_space(records, "eval_all");
  EvalResult result;
  result.n_items = static_cast<int>(records.size());
  result.label_distribution = response_distribution(records, term);
  result.accuracy = accuracy(records, term);
  result.rstd = rstd(records, term);
  result.tvd = tvd(uniform_distribution(space, result.n_items),
                   result.label_distribution);
  return result;
}

}  // namespace rbcorr
