#include "rbcorr/report.hpp"

#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <ostream>
#include <random>

#include "rbcorr/experiments.hpp"
#include "rbcorr/metrics.hpp"
#include "rbcorr/version.hpp"

namespace rbcorr {

void write_atomic(const std::filesystem::path& path,
                  std::string_view content) {
  std::filesystem::path dir = path.parent_path();
  if (dir.empty()) dir = ".";
  std::random_device rd;
  const std::filesystem::path tmp =
      dir / ("." + path.filename().string() + ".tmp-" +
             std::to_string(rd() % 1000000));
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot open temp file: " + tmp.string());
    out.write(content.data(),
              static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\n") == std::string_view::npos) {
    return std::string(field);
  }
  std::string quoted = "\"";
  for (char c : field) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

std::string timestamp_utc() {
  std::time_t now = std::time(nullptr);
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
    char* end = nullptr;
    const long long v = std::strtoll(epoch, &end, 10);
    if (end != epoch && *end == '\0') now = static_cast<std::time_t>(v);
  }
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void emit_label_distribution_csv(std::ostream& out,
                                 const RecordStore& store) {
  out << "model,dataset,prompt_format,label,proportion,uniform_reference\n";
  char buf[64];
  for (const auto& group : store.groups()) {
    if (group.records.empty()) continue;
    const CorrectionTerm identity =
        CorrectionTerm::identity_for(group.space());
    const LabelDistribution dist =
        response_distribution(group.records, identity);
    const double reference = 1.0 / group.space().arity();
    for (const auto& label : group.space().labels()) {
      out << csv_escape(group.run.model_id) << ','
          << csv_escape(group.run.dataset_id) << ','
          << to_string(group.run.prompt_format) << ',' << csv_escape(label);
      std::snprintf(buf, sizeof(buf), ",%.6f,%.6f\n",
                    dist.proportions.at(label), reference);
      out << buf;
    }
  }
}

namespace {

std::string fmt_pct(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", fraction * 100.0);
  return buf;
}

std::string fmt_tvd(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", value);
  return buf;
}

std::string pct_or_na(const std::optional<double>& v) {
  return v ? fmt_pct(*v) : "NA";
}

std::string tvd_or_na(const std::optional<double>& v) {
  return v ? fmt_tvd(*v) : "NA";
}

}  // namespace

void emit_method_comparison_csv(std::ostream& out,
                                std::span<const MethodComparisonRow> rows) {
  out << "dataset,model,baseline_acc,baseline_tvd,cc_dacc,cc_dtvd,bc_dacc,"
         "bc_dtvd,rbcorr_dacc,rbcorr_dtvd\n";
  for (const auto& row : rows) {
    out << csv_escape(row.dataset) << ',' << csv_escape(row.model) << ','
        << fmt_pct(row.baseline_acc) << ',' << fmt_tvd(row.baseline_tvd)
        << ',' << pct_or_na(row.cc_dacc) << ',' << tvd_or_na(row.cc_dtvd)
        << ',' << pct_or_na(row.bc_dacc) << ',' << tvd_or_na(row.bc_dtvd)
        << ',' << pct_or_na(row.rbcorr_dacc) << ','
        << tvd_or_na(row.rbcorr_dtvd) << '\n';
  }
}

nlohmann::ordered_json bundle_to_json(const ReportBundle& bundle) {
  nlohmann::ordered_json j;
  j["toolkit_version"] = bundle.version.empty() ? std::string(kVersion)
                                                : bundle.version;
  j["generated_at"] = bundle.generated_at;
  nlohmann::ordered_json conditions = nlohmann::ordered_json::array();
  for (const auto& cond : bundle.conditions) {
    nlohmann::ordered_json c;
    c["model_id"] = cond.run.model_id;
    c["dataset_id"] = cond.run.dataset_id;
    c["prompt_format"] = to_string(cond.run.prompt_format);
    c["question_type"] = to_string(cond.run.question_type);
    c["model_family"] = cond.run.model_family;
    c["baseline"] = eval_result_to_json(cond.baseline);
    nlohmann::ordered_json methods = nlohmann::ordered_json::array();
    for (const auto& m : cond.methods) {
      nlohmann::ordered_json mj;
      mj["method"] = to_string(m.method);
      mj["size"] = m.size;
      mj["iterations"] = m.iterations;
      mj["base_seed"] = m.base_seed;
      mj["delta_acc"] = m.delta_acc;
      mj["delta_tvd"] = m.delta_tvd;
      mj["median_corrected_accuracy"] = m.median_corrected_accuracy;
      mj["median_corrected_tvd"] = m.median_corrected_tvd;
      methods.push_back(std::move(mj));
    }
    c["methods"] = std::move(methods);
    conditions.push_back(std::move(c));
  }
  j["conditions"] = std::move(conditions);
  j["sweeps"] = bundle.sweeps;
  j["transfers"] = bundle.transfers;
  return j;
}

}  // namespace rbcorr
