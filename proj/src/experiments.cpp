#include "rbcorr/experiments.hpp"

#include <ostream>

#include "rbcorr/correction.hpp"
#include "rbcorr/metrics.hpp"
#include "rbcorr/stats.hpp"

namespace rbcorr {

namespace {

CorrectionTerm term_for(CorrectionMethod method, const ConditionGroup& group,
                        const CalibrationSample& sample,
                        std::span<const LogProbRecord> eval_split,
                        const CorrectionTerm& cc_cached) {
  switch (method) {
    case CorrectionMethod::rbcorr:
      return rbcorr_term(group.records, sample);
    case CorrectionMethod::bc:
      return bc_term(eval_split);
    case CorrectionMethod::cc:
      return cc_cached;
    case CorrectionMethod::identity:
      return CorrectionTerm::identity_for(group.space());
  }
  throw std::invalid_argument("unknown correction method");
}

}  // namespace

SweepResult run_correction_iterations(const ConditionGroup& group,
                                      CorrectionMethod method, int size,
                                      int n_iter, std::uint64_t base_seed) {
  if (n_iter < 1) {
    throw std::invalid_argument(
        "run_correction_iterations: n_iter must be >= 1");
  }

  CorrectionTerm cc_cached;
  if (method == CorrectionMethod::cc) {
    cc_cached = cc_term(group.probes);  // fixed probes, fixed term
  }
  const CorrectionTerm identity =
      CorrectionTerm::identity_for(group.space());

  SweepResult result;
  result.size = size;
  result.method = method;
  result.base_seed = base_seed;
  result.per_iteration.reserve(n_iter);

  const EvalResult full_baseline = eval_all(group.records, identity);
  result.baseline_accuracy = full_baseline.accuracy;
  result.baseline_tvd = full_baseline.tvd;

  for (int k = 0; k < n_iter; ++k) {
    const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(k);
    const CalibrationSample sample =
        sample_calibration(group.records, size, seed);
    const std::vector<LogProbRecord> split =
        evaluation_split(group.records, sample);
    const CorrectionTerm term =
        term_for(method, group, sample, split, cc_cached);

    const EvalResult corrected = eval_all(split, term);
    const EvalResult baseline = eval_all(split, identity);
    result.per_iteration.push_back(IterationOutcome{
        corrected.accuracy, corrected.tvd, baseline.accuracy, baseline.tvd});
  }

  std::vector<double> accs, tvds, base_accs, base_tvds;
  accs.reserve(n_iter);
  for (const auto& it : result.per_iteration) {
    accs.push_back(it.accuracy);
    tvds.push_back(it.tvd);
    base_accs.push_back(it.baseline_accuracy);
    base_tvds.push_back(it.baseline_tvd);
  }
  result.mean_accuracy = mean(accs);
  result.median_accuracy = median(accs);
  result.median_tvd = median(tvds);
  result.iqr_q1 = quantile(accs, 0.25);
  result.iqr_q3 = quantile(accs, 0.75);
  result.median_baseline_accuracy = median(base_accs);
  result.median_baseline_tvd = median(base_tvds);
  return result;
}

std::vector<SweepEntry> size_sweep(const ConditionGroup& group,
                                   CorrectionMethod method,
                                   std::span<const int> sizes, int n_iter,
                                   std::uint64_t base_seed) {
  std::vector<SweepEntry> entries;
  entries.reserve(sizes.size());
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    SweepEntry entry;
    entry.size = sizes[i];
    // Distinct seed block per size so (size, iteration) pairs never collide.
    const std::uint64_t seed =
        base_seed + static_cast<std::uint64_t>(i) *
                        static_cast<std::uint64_t>(n_iter);
    try {
      entry.result =
          run_correction_iterations(group, method, sizes[i], n_iter, seed);
    } catch (const std::exception& e) {
      entry.error = e.what();
    }
    entries.push_back(std::move(entry));
  }
  return entries;
}

BeforeAfterReport before_after_report(const ConditionGroup& group,
                                      CorrectionMethod method, int size,
                                      int n_iter, std::uint64_t base_seed) {
  BeforeAfterReport report;
  report.iterations =
      run_correction_iterations(group, method, size, n_iter, base_seed);
  report.baseline =
      eval_all(group.records, CorrectionTerm::identity_for(group.space()));
  report.median_corrected_accuracy = report.iterations.median_accuracy;
  report.median_corrected_tvd = report.iterations.median_tvd;
  report.delta_accuracy = report.iterations.median_accuracy -
                          report.iterations.median_baseline_accuracy;
  report.delta_tvd =
      report.iterations.median_tvd - report.iterations.median_baseline_tvd;
  return report;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepEntry> entries) {
  out << "size,iteration,accuracy,tvd,baseline_accuracy,baseline_tvd\n";
  char buf[192];
  for (const auto& entry : entries) {
    if (!entry.result) continue;
    const auto& iters = entry.result->per_iteration;
    for (std::size_t k = 0; k < iters.size(); ++k) {
      std::snprintf(buf, sizeof(buf), "%d,%zu,%.9g,%.9g,%.9g,%.9g\n",
                    entry.size, k, iters[k].accuracy, iters[k].tvd,
                    iters[k].baseline_accuracy, iters[k].baseline_tvd);
      out << buf;
    }
  }
}

nlohmann::ordered_json eval_result_to_json(const EvalResult& result) {
  nlohmann::ordered_json j;
  j["accuracy"] = result.accuracy;
  j["tvd"] = result.tvd;
  j["rstd"] = result.rstd;
  nlohmann::ordered_json dist;
  for (const auto& [label, p] : result.label_distribution.proportions) {
    dist[label] = p;
  }
  j["label_distribution"] = std::move(dist);
  j["n_items"] = result.n_items;
  return j;
}

nlohmann::ordered_json sweep_result_to_json(const SweepResult& result) {
  nlohmann::ordered_json j;
  j["size"] = result.size;
  j["method"] = to_string(result.method);
  j["base_seed"] = result.base_seed;
  j["iterations"] = result.per_iteration.size();
  j["mean_accuracy"] = result.mean_accuracy;
  j["median_accuracy"] = result.median_accuracy;
  j["median_tvd"] = result.median_tvd;
  j["iqr_accuracy"] = {result.iqr_q1, result.iqr_q3};
  j["median_baseline_accuracy"] = result.median_baseline_accuracy;
  j["median_baseline_tvd"] = result.median_baseline_tvd;
  j["baseline_accuracy"] = result.baseline_accuracy;
  j["baseline_tvd"] = result.baseline_tvd;
  nlohmann::ordered_json per = nlohmann::ordered_json::array();
  for (const auto& it : result.per_iteration) {
    per.push_back({{"accuracy", it.accuracy},
                   {"tvd", it.tvd},
                   {"baseline_accuracy", it.baseline_accuracy},
                   {"baseline_tvd", it.baseline_tvd}});
  }
  j["per_iteration"] = std::move(per);
  return j;
}

nlohmann::ordered_json sweep_to_json(std::span<const SweepEntry> entries) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& entry : entries) {
    if (entry.result) {
      arr.push_back(sweep_result_to_json(*entry.result));
    } else {
      arr.push_back({{"size", entry.size}, {"error", entry.error}});
    }
  }
  return arr;
}

nlohmann::ordered_json before_after_to_json(const BeforeAfterReport& report) {
  nlohmann::ordered_json j;
  j["baseline"] = eval_result_to_json(report.baseline);
  j["median_corrected_accuracy"] = report.median_corrected_accuracy;
  j["median_corrected_tvd"] = report.median_corrected_tvd;
  j["delta_accuracy"] = report.delta_accuracy;
  j["delta_tvd"] = report.delta_tvd;
  j["iterations"] = sweep_result_to_json(report.iterations);
  return j;
}

}  // namespace rbcorr
