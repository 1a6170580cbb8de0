#include "rbcorr/transfer.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "rbcorr/correction.hpp"
#include "rbcorr/metrics.hpp"
#include "rbcorr/stats.hpp"

namespace rbcorr {

std::string_view to_string(TransferModality m) {
  switch (m) {
    case TransferModality::cross_dataset:
      return "cross_dataset";
    case TransferModality::cross_model:
      return "cross_model";
    case TransferModality::cross_prompt:
      return "cross_prompt";
  }
  return "?";
}

TransferModality transfer_modality_from_string(std::string_view s) {
  if (s == "cross_dataset") return TransferModality::cross_dataset;
  if (s == "cross_model") return TransferModality::cross_model;
  if (s == "cross_prompt") return TransferModality::cross_prompt;
  throw Error("unknown transfer modality: '" + std::string(s) + "'");
}

std::optional<std::string> validate_pair(const TransferPair& pair) {
  const RunConfig& s = pair.source;
  const RunConfig& t = pair.target;
  if (s == t) return "source equals target";

  const bool model_differs = s.model_id != t.model_id;
  const bool dataset_differs = s.dataset_id != t.dataset_id;
  const bool prompt_differs = s.prompt_format != t.prompt_format;

  switch (pair.modality) {
    case TransferModality::cross_model:
      if (!model_differs) return "cross_model pair with identical model_id";
      if (dataset_differs || prompt_differs) {
        return "cross_model pair must keep dataset and prompt fixed";
      }
      if (s.model_family != t.model_family) {
        return "cross_model transfer only within one model family";
      }
      break;
    case TransferModality::cross_dataset:
      if (!dataset_differs) {
        return "cross_dataset pair with identical dataset_id";
      }
      if (model_differs || prompt_differs) {
        return "cross_dataset pair must keep model and prompt fixed";
      }
      if (s.question_type != t.question_type) {
        return "cross_dataset transfer only within one question type";
      }
      break;
    case TransferModality::cross_prompt:
      if (!prompt_differs) {
        return "cross_prompt pair with identical prompt_format";
      }
      if (model_differs || dataset_differs) {
        return "cross_prompt pair must keep model and dataset fixed";
      }
      break;
  }
  if (s.question_type != t.question_type) {
    return "question types differ";
  }
  if (s.model_family != t.model_family &&
      pair.modality != TransferModality::cross_model) {
    return "model families differ on a non-model axis";
  }
  return std::nullopt;
}

std::vector<TransferPair> enumerate_pairs(std::span<const RunConfig> configs,
                                          TransferModality modality) {
  std::vector<TransferPair> pairs;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    for (std::size_t j = 0; j < configs.size(); ++j) {
      if (i == j) continue;
      TransferPair pair{configs[i], configs[j], modality};
      if (!validate_pair(pair)) pairs.push_back(std::move(pair));
    }
  }
  return pairs;
}

bool transfer_success(double delta_acc, double delta_tvd,
                      double same_cond_delta_acc,
                      double same_cond_delta_tvd) {
  const bool improved = same_cond_delta_acc > 0.0 && same_cond_delta_tvd < 0.0;
  if (!improved) return false;
  constexpr double kSlack = 1e-12;
  return delta_acc >= 0.8 * same_cond_delta_acc - kSlack &&
         -delta_tvd >= 0.8 * -same_cond_delta_tvd - kSlack;
}

namespace {

CorrectionTerm source_term(CorrectionMethod method,
                           const ConditionGroup& group,
                           const CalibrationSample& sample) {
  switch (method) {
    case CorrectionMethod::rbcorr:
      return rbcorr_term(group.records, sample);
    case CorrectionMethod::bc:
      return bc_term(evaluation_split(group.records, sample));
    case CorrectionMethod::cc:
      return cc_term(group.probes);
    case CorrectionMethod::identity:
      return CorrectionTerm::identity_for(group.space());
  }
  throw std::invalid_argument("unknown correction method");
}

}  // namespace

TransferOutcome run_transfer(const TransferPair& pair,
                             const ConditionGroup& source,
                             const ConditionGroup& target,
                             const TransferOptions& options) {
  if (!options.allow_self) {
    if (auto problem = validate_pair(pair)) {
      throw std::invalid_argument("run_transfer: invalid pair: " + *problem);
    }
  }
  if (!(source.run == pair.source) || !(target.run == pair.target)) {
    throw Error("run_transfer: missing-condition data for the pair");
  }
  if (source.space() != target.space()) {
    throw Error("run_transfer: space-incompatibility between " +
                describe(source.run) + " and " + describe(target.run));
  }
  if (options.n_iter < 1) {
    throw std::invalid_argument("run_transfer: n_iter must be >= 1");
  }

  const CorrectionTerm identity =
      CorrectionTerm::identity_for(target.space());

  std::vector<double> trans_acc, trans_tvd, same_acc, same_tvd, base_acc,
      base_tvd;
  trans_acc.reserve(options.n_iter);

  for (int k = 0; k < options.n_iter; ++k) {
    const std::uint64_t seed =
        options.base_seed + static_cast<std::uint64_t>(k);
    const CalibrationSample src_sample =
        sample_calibration(source.records, options.size, seed);
    const CorrectionTerm src_term =
        source_term(options.method, source, src_sample);

    const CalibrationSample tgt_sample =
        sample_calibration(target.records, options.size, seed);
    const CorrectionTerm tgt_term =
        source_term(options.method, target, tgt_sample);
    const std::vector<LogProbRecord> tgt_eval =
        evaluation_split(target.records, tgt_sample);

    const EvalResult base = eval_all(tgt_eval, identity);
    const EvalResult transferred = eval_all(tgt_eval, src_term);
    const EvalResult same_cond = eval_all(tgt_eval, tgt_term);

    base_acc.push_back(base.accuracy);
    base_tvd.push_back(base.tvd);
    trans_acc.push_back(transferred.accuracy);
    trans_tvd.push_back(transferred.tvd);
    same_acc.push_back(same_cond.accuracy);
    same_tvd.push_back(same_cond.tvd);
  }

  TransferOutcome outcome;
  outcome.pair = pair;
  outcome.delta_acc = median(trans_acc) - median(base_acc);
  outcome.delta_tvd = median(trans_tvd) - median(base_tvd);
  outcome.same_cond_delta_acc = median(same_acc) - median(base_acc);
  outcome.same_cond_delta_tvd = median(same_tvd) - median(base_tvd);
  outcome.same_condition_improved = outcome.same_cond_delta_acc > 0.0 &&
                                    outcome.same_cond_delta_tvd < 0.0;
  outcome.success =
      transfer_success(outcome.delta_acc, outcome.delta_tvd,
                       outcome.same_cond_delta_acc,
                       outcome.same_cond_delta_tvd);
  return outcome;
}

std::vector<ModalitySummary> transfer_summary(
    std::span<const TransferOutcome> outcomes) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<ModalitySummary> rows;
  for (TransferModality m :
       {TransferModality::cross_dataset, TransferModality::cross_model,
        TransferModality::cross_prompt}) {
    ModalitySummary row;
    row.modality = m;
    double dacc_s = 0, dtvd_s = 0, dacc_a = 0, dtvd_a = 0;
    for (const auto& o : outcomes) {
      if (o.pair.modality != m) continue;
      ++row.total_pairs;
      dacc_a += o.delta_acc;
      dtvd_a += o.delta_tvd;
      if (o.success) {
        ++row.successes;
        dacc_s += o.delta_acc;
        dtvd_s += o.delta_tvd;
      }
    }
    if (row.total_pairs > 0) {
      row.success_rate =
          static_cast<double>(row.successes) / row.total_pairs;
      row.mean_dacc_all = dacc_a / row.total_pairs;
      row.mean_dtvd_all = dtvd_a / row.total_pairs;
    } else {
      row.success_rate = 0.0;
      row.mean_dacc_all = nan;
      row.mean_dtvd_all = nan;
    }
    row.mean_dacc_success = row.successes ? dacc_s / row.successes : nan;
    row.mean_dtvd_success = row.successes ? dtvd_s / row.successes : nan;
    rows.push_back(row);
  }
  return rows;
}

namespace {

std::string axis_key(const RunConfig& run, TransferModality modality) {
  switch (modality) {
    case TransferModality::cross_dataset:
      return run.dataset_id;
    case TransferModality::cross_model:
      return run.model_id;
    case TransferModality::cross_prompt:
      return std::string(to_string(run.prompt_format));
  }
  return {};
}

}  // namespace

TransferHeatmap transfer_heatmap(std::span<const RunConfig> axis_configs,
                                 std::span<const TransferOutcome> outcomes) {
  if (axis_configs.empty() || outcomes.empty()) {
    throw std::invalid_argument("transfer_heatmap: empty inputs");
  }
  const TransferModality modality = outcomes.front().pair.modality;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const std::size_t n = axis_configs.size();

  TransferHeatmap map;
  map.modality = modality;
  for (const auto& cfg : axis_configs) {
    map.keys.push_back(axis_key(cfg, modality));
  }
  map.delta_acc.assign(n, std::vector<double>(n, nan));
  map.delta_tvd.assign(n, std::vector<double>(n, nan));

  auto index_of = [&](const RunConfig& run) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < n; ++i) {
      if (axis_configs[i] == run) return i;
    }
    return std::nullopt;
  };

  for (const auto& o : outcomes) {
    if (o.pair.modality != modality) {
      throw Error("transfer_heatmap: mixed modalities in outcomes");
    }
    const auto si = index_of(o.pair.source);
    const auto ti = index_of(o.pair.target);
    if (!si || !ti) continue;  // outside this grid
    map.delta_acc[*si][*ti] = o.delta_acc;
    map.delta_tvd[*si][*ti] = o.delta_tvd;
    // Diagonal: target's same-condition deltas (identical for every source
    // under the shared seed schedule).
    if (std::isnan(map.delta_acc[*ti][*ti])) {
      map.delta_acc[*ti][*ti] = o.same_cond_delta_acc;
      map.delta_tvd[*ti][*ti] = o.same_cond_delta_tvd;
    } else if (map.delta_acc[*ti][*ti] != o.same_cond_delta_acc) {
      throw Error(
          "transfer_heatmap: inconsistent same-condition deltas for target " +
          describe(o.pair.target));
    }
  }

  std::string missing;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (std::isnan(map.delta_acc[i][j])) {
        if (!missing.empty()) missing += ", ";
        missing += map.keys[i] + "->" + map.keys[j];
      }
    }
  }
  if (!missing.empty()) {
    throw Error("transfer_heatmap: incomplete grid, missing cells: " +
                missing);
  }
  return map;
}

namespace {

void append_num(std::ostream& out, double v) {
  if (std::isnan(v)) {
    out << "NA";
  } else {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    out << buf;
  }
}

}  // namespace

void write_transfer_summary_csv(std::ostream& out,
                                std::span<const ModalitySummary> rows) {
  out << "modality,total_pairs,successful,success_rate,mean_dacc_success,"
         "mean_dtvd_success,mean_dacc_all,mean_dtvd_all\n";
  for (const auto& row : rows) {
    out << to_string(row.modality) << ',' << row.total_pairs << ','
        << row.successes << ',';
    append_num(out, row.success_rate);
    for (double v : {row.mean_dacc_success, row.mean_dtvd_success,
                     row.mean_dacc_all, row.mean_dtvd_all}) {
      out << ',';
      append_num(out, v);
    }
    out << '\n';
  }
}

void write_heatmap_csv(std::ostream& out, const TransferHeatmap& heatmap) {
  out << "source,target,delta_acc,delta_tvd\n";
  for (std::size_t i = 0; i < heatmap.keys.size(); ++i) {
    for (std::size_t j = 0; j < heatmap.keys.size(); ++j) {
      out << heatmap.keys[i] << ',' << heatmap.keys[j] << ',';
      append_num(out, heatmap.delta_acc[i][j]);
      out << ',';
      append_num(out, heatmap.delta_tvd[i][j]);
      out << '\n';
    }
  }
}

namespace {

nlohmann::ordered_json run_to_json(const RunConfig& run) {
  nlohmann::ordered_json j;
  j["model_id"] = run.model_id;
  j["dataset_id"] = run.dataset_id;
  j["prompt_format"] = to_string(run.prompt_format);
  j["question_type"] = to_string(run.question_type);
  j["model_family"] = run.model_family;
  return j;
}

nlohmann::ordered_json num_or_null(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

}  // namespace

nlohmann::ordered_json transfer_outcomes_to_json(
    std::span<const TransferOutcome> outcomes) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& o : outcomes) {
    nlohmann::ordered_json j;
    j["modality"] = to_string(o.pair.modality);
    j["source"] = run_to_json(o.pair.source);
    j["target"] = run_to_json(o.pair.target);
    j["delta_acc"] = o.delta_acc;
    j["delta_tvd"] = o.delta_tvd;
    j["same_cond_delta_acc"] = o.same_cond_delta_acc;
    j["same_cond_delta_tvd"] = o.same_cond_delta_tvd;
    j["same_condition_improved"] = o.same_condition_improved;
    j["success"] = o.success;
    arr.push_back(std::move(j));
  }
  return arr;
}

nlohmann::ordered_json transfer_summary_to_json(
    std::span<const ModalitySummary> rows) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& row : rows) {
    nlohmann::ordered_json j;
    j["modality"] = to_string(row.modality);
    j["total_pairs"] = row.total_pairs;
    j["successful"] = row.successes;
    j["success_rate"] = row.success_rate;
    j["mean_dacc_success"] = num_or_null(row.mean_dacc_success);
    j["mean_dtvd_success"] = num_or_null(row.mean_dtvd_success);
    j["mean_dacc_all"] = num_or_null(row.mean_dacc_all);
    j["mean_dtvd_all"] = num_or_null(row.mean_dtvd_all);
    arr.push_back(std::move(j));
  }
  return arr;
}

}  // namespace rbcorr
