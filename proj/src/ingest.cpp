#include "rbcorr/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace rbcorr {

double merge_variants(
    std::span<const std::pair<std::string, double>> variants) {
  if (variants.empty()) {
    throw std::invalid_argument("merge_variants: empty variant list");
  }
  double max_lp = -std::numeric_limits<double>::infinity();
  for (const auto& [token, lp] : variants) {
    if (!std::isfinite(lp)) {
      throw std::invalid_argument("merge_variants: non-finite logprob for '" +
                                  token + "'");
    }
    max_lp = std::max(max_lp, lp);
  }
  double acc = 0.0;
  for (const auto& [token, lp] : variants) {
    acc += std::exp(lp - max_lp);
  }
  return max_lp + std::log(acc);
}

void RecordStore::add(LogProbRecord record) {
  const OptionSpace& space = record.run.space();
  if (auto err = validate_record(record, space)) {
    throw Error("validation error (" + std::string(to_string(err->code)) +
                "): " + err->message);
  }

  std::size_t gi = 0;
  for (; gi < groups_.size(); ++gi) {
    if (groups_[gi].run == record.run) break;
  }
  if (gi == groups_.size()) {
    groups_.push_back(ConditionGroup{record.run, {}, {}});
    seen_ids_.emplace_back();
  }
  if (!seen_ids_[gi].insert(record.item_id).second) {
    throw Error("duplicate item_id '" + record.item_id + "' in condition " +
                describe(record.run));
  }
  if (record.is_content_free) {
    groups_[gi].probes.push_back(std::move(record));
  } else {
    groups_[gi].records.push_back(std::move(record));
  }
}

const ConditionGroup* RecordStore::find(const RunConfig& run) const {
  for (const auto& g : groups_) {
    if (g.run == run) return &g;
  }
  return nullptr;
}

std::size_t RecordStore::size() const {
  std::size_t n = 0;
  for (const auto& g : groups_) n += g.records.size() + g.probes.size();
  return n;
}

namespace {

std::string require_string(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    throw Error(std::string("missing or non-string field '") + key + "'");
  }
  return it->get<std::string>();
}

}  // namespace

nlohmann::ordered_json record_to_json(const LogProbRecord& record) {
  nlohmann::ordered_json j;
  j["item_id"] = record.item_id;
  j["model_id"] = record.run.model_id;
  j["dataset_id"] = record.run.dataset_id;
  j["prompt_format"] = to_string(record.run.prompt_format);
  j["question_type"] = to_string(record.run.question_type);
  j["model_family"] = record.run.model_family;
  j["gold_label"] = record.gold_label;
  if (record.is_content_free) j["is_content_free"] = true;
  nlohmann::ordered_json lp;
  for (const auto& label : record.run.space().labels()) {
    auto it = record.option_logprobs.find(label);
    if (it != record.option_logprobs.end()) lp[label] = it->second;
  }
  j["option_logprobs"] = std::move(lp);
  if (!record.raw_variants.empty()) {
    nlohmann::ordered_json rv;
    for (const auto& label : record.run.space().labels()) {
      auto it = record.raw_variants.find(label);
      if (it == record.raw_variants.end()) continue;
      nlohmann::ordered_json list = nlohmann::ordered_json::array();
      for (const auto& [token, value] : it->second) {
        list.push_back({token, value});
      }
      rv[label] = std::move(list);
    }
    j["raw_variants"] = std::move(rv);
  }
  return j;
}

LogProbRecord record_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error("record is not a JSON object");
  LogProbRecord rec;
  rec.item_id = require_string(j, "item_id");
  rec.run.model_id = require_string(j, "model_id");
  rec.run.dataset_id = require_string(j, "dataset_id");
  rec.run.prompt_format =
      prompt_format_from_string(require_string(j, "prompt_format"));
  rec.run.question_type =
      question_type_from_string(require_string(j, "question_type"));
  rec.run.model_family = require_string(j, "model_family");
  rec.gold_label = require_string(j, "gold_label");
  rec.is_content_free = j.value("is_content_free", false);

  const bool has_merged = j.contains("option_logprobs");
  const bool has_raw = j.contains("raw_variants");
  if (!has_merged && !has_raw) {
    throw Error("record '" + rec.item_id +
                "' has neither option_logprobs nor raw_variants");
  }

  if (has_merged) {
    const auto& lp = j.at("option_logprobs");
    if (!lp.is_object()) throw Error("option_logprobs must be an object");
    for (const auto& [label, value] : lp.items()) {
      if (!value.is_number()) {
        throw Error("option_logprobs['" + label + "'] must be a number");
      }
      rec.option_logprobs[label] = value.get<double>();
    }
  }

  if (has_raw) {
    const auto& rv = j.at("raw_variants");
    if (!rv.is_object()) throw Error("raw_variants must be an object");
    for (const auto& [label, list] : rv.items()) {
      if (!list.is_array() || list.empty()) {
        throw Error("raw_variants['" + label +
                    "'] must be a non-empty array");
      }
      std::vector<std::pair<std::string, double>> variants;
      for (const auto& entry : list) {
        if (!entry.is_array() || entry.size() != 2 || !entry[0].is_string() ||
            !entry[1].is_number()) {
          throw Error("raw_variants['" + label +
                      "'] entries must be [token, logprob] pairs");
        }
        variants.emplace_back(entry[0].get<std::string>(),
                              entry[1].get<double>());
      }
      const double merged = merge_variants(variants);
      if (has_merged && rec.option_logprobs.count(label)) {
        if (std::abs(rec.option_logprobs.at(label) - merged) > 1e-9) {
          std::ostringstream os;
          os << "record '" << rec.item_id << "': option_logprobs['" << label
             << "'] = " << rec.option_logprobs.at(label)
             << " conflicts with merged raw variants = " << merged;
          throw Error(os.str());
        }
      }
      rec.option_logprobs[label] = merged;
      rec.raw_variants[label] = std::move(variants);
    }
  }
  return rec;
}

void load_records_into(RecordStore& store, std::istream& in,
                       std::string_view source_name) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where =
        std::string(source_name) + ":" + std::to_string(line_no) + ": ";
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(where + "parse error: " + e.what());
    }
    LogProbRecord rec;
    try {
      rec = record_from_json(j);
    } catch (const Error& e) {
      throw Error(where + e.what());
    }
    for (const auto& [label, lp] : rec.option_logprobs) {
      if (std::isfinite(lp) && lp > 0.0) {
        store.warnings().push_back(where + "option '" + label +
                                   "' logprob " + std::to_string(lp) +
                                   " > 0 (unnormalized score?)");
      }
    }
    try {
      store.add(std::move(rec));
    } catch (const Error& e) {
      throw Error(where + e.what());
    }
  }
}

void load_records_into(RecordStore& store,
                       const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open file: " + path.string());
  load_records_into(store, in, path.string());
}

RecordStore load_records(const std::filesystem::path& path) {
  RecordStore store;
  load_records_into(store, path);
  return store;
}

void save_records(const RecordStore& store, std::ostream& out) {
  for (const auto& group : store.groups()) {
    for (const auto& rec : group.records) {
      out << record_to_json(rec).dump() << '\n';
    }
    for (const auto& rec : group.probes) {
      out << record_to_json(rec).dump() << '\n';
    }
  }
}

void save_records(const RecordStore& store,
                  const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open file for writing: " + path.string());
  save_records(store, out);
}

ImbalanceReport assert_class_balanced(
    std::span<const LogProbRecord> records, const OptionSpace& space) {
  ImbalanceReport report;
  for (const auto& label : space.labels()) report.counts[label] = 0;
  for (const auto& rec : records) {
    if (rec.is_content_free) continue;
    auto it = report.counts.find(rec.gold_label);
    if (it == report.counts.end()) {
      throw Error("assert_class_balanced: gold label '" + rec.gold_label +
                  "' not in option space");
    }
    ++it->second;
  }
  int first = report.counts.begin()->second;
  report.balanced = std::all_of(
      report.counts.begin(), report.counts.end(),
      [&](const auto& kv) { return kv.second == first; });
  return report;
}

}  // namespace rbcorr
