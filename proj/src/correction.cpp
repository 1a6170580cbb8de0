#include "rbcorr/correction.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_map>
#include <unordered_set>

namespace rbcorr {

namespace {

const RunConfig& single_run(std::span<const LogProbRecord> records,
                            const char* op) {
  if (records.empty()) {
    throw std::invalid_argument(std::string(op) + ": empty record group");
  }
  const RunConfig& run = records.front().run;
  for (const auto& rec : records) {
    if (!(rec.run == run)) {
      throw Error(std::string(op) + ": records span multiple conditions");
    }
  }
  return run;
}

}  // namespace

CalibrationSample sample_calibration(std::span<const LogProbRecord> records,
                                     int size, std::uint64_t seed) {
  if (size <= 0) {
    throw std::invalid_argument("sample_calibration: size must be positive");
  }
  const RunConfig& run = single_run(records, "sample_calibration");
  const OptionSpace& space = run.space();
  if (size > static_cast<int>(records.size())) {
    throw Error("sample_calibration: size " + std::to_string(size) +
                " exceeds group size " + std::to_string(records.size()));
  }

  // Per-class record indices in input order.
  std::map<std::string, std::vector<std::size_t>> by_class;
  for (const auto& label : space.labels()) by_class[label] = {};
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto it = by_class.find(records[i].gold_label);
    if (it == by_class.end()) {
      throw Error("sample_calibration: gold label '" +
                  records[i].gold_label + "' not in option space");
    }
    it->second.push_back(i);
  }

  const int arity = space.arity();
  const int base = size / arity;
  const int remainder = size % arity;

  CalibrationSample sample;
  sample.size = size;
  sample.seed = seed;

  std::mt19937_64 rng(seed);
  for (int c = 0; c < arity; ++c) {
    const std::string& label = space.labels()[c];
    const int quota = base + (c < remainder ? 1 : 0);
    auto& indices = by_class[label];
    if (static_cast<int>(indices.size()) < quota) {
      throw Error("sample_calibration: insufficient-class-members: label '" +
                  label + "' has " + std::to_string(indices.size()) +
                  " items, " + std::to_string(quota) + " required");
    }
    // Partial Fisher-Yates: pick `quota` without replacement.
    for (int j = 0; j < quota; ++j) {
      std::uniform_int_distribution<std::size_t> pick(j, indices.size() - 1);
      std::swap(indices[j], indices[pick(rng)]);
      sample.item_ids.push_back(records[indices[j]].item_id);
    }
    sample.per_label_counts[label] = quota;
  }
  return sample;
}

CorrectionTerm rbcorr_term(std::span<const LogProbRecord> records,
                           const CalibrationSample& sample) {
  if (sample.item_ids.empty()) {
    throw std::invalid_argument("rbcorr_term: empty calibration sample");
  }
  const RunConfig& run = single_run(records, "rbcorr_term");
  const OptionSpace& space = run.space();

  std::unordered_map<std::string, const LogProbRecord*> by_id;
  by_id.reserve(records.size());
  for (const auto& rec : records) by_id.emplace(rec.item_id, &rec);

  std::map<std::string, double> sums;
  for (const auto& label : space.labels()) sums[label] = 0.0;
  for (const auto& id : sample.item_ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) {
      throw Error("rbcorr_term: calibration item '" + id +
                  "' not found in records");
    }
    for (const auto& label : space.labels()) {
      sums[label] += it->second->option_logprobs.at(label);
    }
  }

  CorrectionTerm term;
  term.method = CorrectionMethod::rbcorr;
  const double n = static_cast<double>(sample.item_ids.size());
  for (const auto& label : space.labels()) {
    term.offsets[label] = sums[label] / n;
  }
  term.provenance_run = run;
  term.provenance_calibration =
      CalibrationDescriptor{sample.size, sample.seed, sample.item_ids};
  return term;
}

std::vector<LogProbRecord> evaluation_split(
    std::span<const LogProbRecord> records, const CalibrationSample& sample) {
  std::unordered_set<std::string> taken(sample.item_ids.begin(),
                                        sample.item_ids.end());
  std::vector<LogProbRecord> out;
  out.reserve(records.size() - std::min(records.size(), taken.size()));
  for (const auto& rec : records) {
    if (!taken.count(rec.item_id)) out.push_back(rec);
  }
  return out;
}

CorrectionTerm cc_term(std::span<const LogProbRecord> content_free_records) {
  if (content_free_records.empty()) {
    throw Error("cc_term: no-content-free-records");
  }
  const RunConfig& run = single_run(content_free_records, "cc_term");
  const OptionSpace& space = run.space();

  std::map<std::string, double> mean_probs;
  for (const auto& label : space.labels()) mean_probs[label] = 0.0;

  for (const auto& probe : content_free_records) {
    double max_lp = -std::numeric_limits<double>::infinity();
    for (const auto& label : space.labels()) {
      auto it = probe.option_logprobs.find(label);
      if (it == probe.option_logprobs.end()) {
        throw Error("cc_term: probe '" + probe.item_id +
                    "' missing option '" + label + "'");
      }
      max_lp = std::max(max_lp, it->second);
    }
    double z = 0.0;
    for (const auto& label : space.labels()) {
      z += std::exp(probe.option_logprobs.at(label) - max_lp);
    }
    for (const auto& label : space.labels()) {
      mean_probs[label] +=
          std::exp(probe.option_logprobs.at(label) - max_lp) / z;
    }
  }

  CorrectionTerm term;
  term.method = CorrectionMethod::cc;
  const double n = static_cast<double>(content_free_records.size());
  for (const auto& label : space.labels()) {
    // Floor keeps the offset finite if a probe probability underflows.
    term.offsets[label] = std::log(std::max(mean_probs[label] / n, 1e-300));
  }
  term.provenance_run = run;
  return term;
}

CorrectionTerm bc_term(std::span<const LogProbRecord> batch) {
  if (batch.empty()) {
    throw Error("bc_term: empty batch");
  }
  const RunConfig& run = single_run(batch, "bc_term");
  const OptionSpace& space = run.space();

  std::map<std::string, double> sums;
  for (const auto& label : space.labels()) sums[label] = 0.0;
  for (const auto& rec : batch) {
    for (const auto& label : space.labels()) {
      auto it = rec.option_logprobs.find(label);
      if (it == rec.option_logprobs.end()) {
        throw Error("bc_term: record '" + rec.item_id +
                    "' missing option '" + label + "'");
      }
      sums[label] += it->second;
    }
  }

  CorrectionTerm term;
  term.method = CorrectionMethod::bc;
  const double n = static_cast<double>(batch.size());
  for (const auto& label : space.labels()) {
    term.offsets[label] = sums[label] / n;
  }
  term.provenance_run = run;
  return term;
}

BcStreamingState::BcStreamingState(const OptionSpace& space) : space_(space) {
  for (const auto& label : space_.labels()) sums_[label] = 0.0;
}

CorrectionTerm BcStreamingState::update(
    std::span<const LogProbRecord> incoming) {
  for (const auto& rec : incoming) {
    if (rec.run.space() != space_) {
      throw Error("bc_streaming: space-mismatch for record '" + rec.item_id +
                  "'");
    }
    for (const auto& label : space_.labels()) {
      auto it = rec.option_logprobs.find(label);
      if (it == rec.option_logprobs.end()) {
        throw Error("bc_streaming: record '" + rec.item_id +
                    "' missing option '" + label + "'");
      }
      sums_[label] += it->second;
    }
    ++count_;
  }
  return current();
}

CorrectionTerm BcStreamingState::current() const {
  if (count_ == 0) {
    throw Error("bc_streaming: no items seen yet");
  }
  CorrectionTerm term;
  term.method = CorrectionMethod::bc;
  for (const auto& label : space_.labels()) {
    term.offsets[label] = sums_.at(label) / static_cast<double>(count_);
  }
  return term;
}

nlohmann::ordered_json term_to_json(const CorrectionTerm& term) {
  nlohmann::ordered_json j;
  j["method"] = to_string(term.method);
  nlohmann::ordered_json offsets;
  for (const auto& [label, v] : term.offsets) offsets[label] = v;
  j["offsets"] = std::move(offsets);
  nlohmann::ordered_json prov;
  if (term.provenance_run) {
    nlohmann::ordered_json run;
    run["model_id"] = term.provenance_run->model_id;
    run["dataset_id"] = term.provenance_run->dataset_id;
    run["prompt_format"] = to_string(term.provenance_run->prompt_format);
    run["question_type"] = to_string(term.provenance_run->question_type);
    run["model_family"] = term.provenance_run->model_family;
    prov["run"] = std::move(run);
  }
  if (term.provenance_calibration) {
    nlohmann::ordered_json cal;
    cal["size"] = term.provenance_calibration->size;
    cal["seed"] = term.provenance_calibration->seed;
    cal["item_ids"] = term.provenance_calibration->item_ids;
    prov["calibration"] = std::move(cal);
  }
  if (!prov.empty()) j["provenance"] = std::move(prov);
  return j;
}

CorrectionTerm term_from_json(const nlohmann::json& j) {
  CorrectionTerm term;
  term.method = correction_method_from_string(
      j.at("method").get<std::string>());
  for (const auto& [label, v] : j.at("offsets").items()) {
    if (!v.is_number()) throw Error("term offsets must be numbers");
    term.offsets[label] = v.get<double>();
  }
  if (j.contains("provenance")) {
    const auto& prov = j.at("provenance");
    if (prov.contains("run")) {
      const auto& r = prov.at("run");
      RunConfig run;
      run.model_id = r.at("model_id").get<std::string>();
      run.dataset_id = r.at("dataset_id").get<std::string>();
      run.prompt_format =
          prompt_format_from_string(r.at("prompt_format").get<std::string>());
      run.question_type =
          question_type_from_string(r.at("question_type").get<std::string>());
      run.model_family = r.at("model_family").get<std::string>();
      term.provenance_run = std::move(run);
    }
    if (prov.contains("calibration")) {
      const auto& c = prov.at("calibration");
      CalibrationDescriptor cal;
      cal.size = c.at("size").get<int>();
      cal.seed = c.at("seed").get<std::uint64_t>();
      cal.item_ids = c.at("item_ids").get<std::vector<std::string>>();
      term.provenance_calibration = std::move(cal);
    }
  }
  return term;
}

}  // namespace rbcorr
