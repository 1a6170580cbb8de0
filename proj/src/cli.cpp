#include "rbcorr/cli.hpp"

#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "rbcorr/correction.hpp"
#include "rbcorr/experiments.hpp"
#include "rbcorr/harvest.hpp"
#include "rbcorr/ingest.hpp"
#include "rbcorr/metrics.hpp"
#include "rbcorr/report.hpp"
#include "rbcorr/synthetic.hpp"
#include "rbcorr/transfer.hpp"
#include "rbcorr/version.hpp"

namespace rbcorr {

namespace {

struct ConditionFilter {
  std::string model;
  std::string dataset;
  std::string format;

  bool matches(const RunConfig& run) const {
    if (!model.empty() && run.model_id != model) return false;
    if (!dataset.empty() && run.dataset_id != dataset) return false;
    if (!format.empty() && std::string(to_string(run.prompt_format)) != format)
      return false;
    return true;
  }
};

void add_filter_flags(CLI::App* cmd, ConditionFilter& filter) {
  cmd->add_option("--model", filter.model, "Keep only this model_id");
  cmd->add_option("--dataset", filter.dataset, "Keep only this dataset_id");
  cmd->add_option("--format", filter.format, "Keep only this prompt_format");
}

RecordStore load_inputs(const std::vector<std::string>& inputs) {
  RecordStore store;
  for (const auto& path : inputs) {
    load_records_into(store, path);
  }
  return store;
}

std::vector<const ConditionGroup*> select_groups(
    const RecordStore& store, const ConditionFilter& filter) {
  std::vector<const ConditionGroup*> selected;
  for (const auto& group : store.groups()) {
    if (filter.matches(group.run)) selected.push_back(&group);
  }
  if (selected.empty()) {
    throw Error("no conditions match the given filters");
  }
  return selected;
}

void write_text_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
  } else {
    write_atomic(path, content);
  }
}

nlohmann::ordered_json run_meta(const RunConfig& run) {
  nlohmann::ordered_json j;
  j["model_id"] = run.model_id;
  j["dataset_id"] = run.dataset_id;
  j["prompt_format"] = to_string(run.prompt_format);
  j["question_type"] = to_string(run.question_type);
  j["model_family"] = run.model_family;
  return j;
}

std::map<std::string, double> parse_bias_flags(
    const std::vector<std::string>& entries) {
  std::map<std::string, double> bias;
  for (const auto& entry : entries) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw Error("bad --bias entry '" + entry + "', expected LABEL=VALUE");
    }
    bias[entry.substr(0, eq)] = std::stod(entry.substr(eq + 1));
  }
  return bias;
}

// ---- subcommand bodies ----------------------------------------------------

int cmd_ingest(const std::vector<std::string>& inputs) {
  RecordStore store = load_inputs(inputs);
  std::cout << "loaded " << store.size() << " records across "
            << store.groups().size() << " condition(s)\n";
  for (const auto& group : store.groups()) {
    std::cout << "  " << describe(group.run) << ": " << group.records.size()
              << " records, " << group.probes.size() << " probes";
    if (!group.records.empty()) {
      const auto report =
          assert_class_balanced(group.records, group.space());
      if (report.balanced) {
        std::cout << ", class-balanced";
      } else {
        std::cout << ", IMBALANCED (";
        bool first = true;
        for (const auto& [label, count] : report.counts) {
          if (!first) std::cout << ", ";
          std::cout << label << ":" << count;
          first = false;
        }
        std::cout << ")";
      }
    }
    std::cout << '\n';
  }
  for (const auto& w : store.warnings()) {
    std::cout << "warning: " << w << '\n';
  }
  return 0;
}

int cmd_eval(const std::vector<std::string>& inputs,
             const ConditionFilter& filter, const std::string& output) {
  RecordStore store = load_inputs(inputs);
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto* group : select_groups(store, filter)) {
    if (group->records.empty()) continue;
    nlohmann::ordered_json j = run_meta(group->run);
    j["baseline"] = eval_result_to_json(eval_all(
        group->records, CorrectionTerm::identity_for(group->space())));
    arr.push_back(std::move(j));
  }
  write_text_output(output, arr.dump(2) + "\n");
  return 0;
}

int cmd_correct(const std::vector<std::string>& inputs,
                const ConditionFilter& filter, const std::string& method_name,
                int size, int iters, std::uint64_t seed,
                const std::string& output, const std::string& csv_path,
                const std::string& term_path) {
  const CorrectionMethod method = correction_method_from_string(method_name);
  RecordStore store = load_inputs(inputs);
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  std::string csv;
  for (const auto* group : select_groups(store, filter)) {
    const BeforeAfterReport report =
        before_after_report(*group, method, size, iters, seed);
    nlohmann::ordered_json j = run_meta(group->run);
    j["method"] = method_name;
    j["report"] = before_after_to_json(report);
    arr.push_back(std::move(j));
    if (!csv_path.empty()) {
      std::ostringstream os;
      SweepEntry entry{size, report.iterations, ""};
      write_sweep_csv(os, std::span<const SweepEntry>(&entry, 1));
      csv = os.str();
    }
  }
  write_text_output(output, arr.dump(2) + "\n");
  if (!csv_path.empty()) write_atomic(csv_path, csv);
  if (!term_path.empty()) {
    // Emit a full-group term for reuse (e.g. manual transfer).
    const auto* group = select_groups(store, filter).front();
    CalibrationSample full;
    full.size = static_cast<int>(group->records.size());
    full.seed = seed;
    for (const auto& rec : group->records) {
      full.item_ids.push_back(rec.item_id);
      full.per_label_counts[rec.gold_label] += 1;
    }
    CorrectionTerm term;
    switch (method) {
      case CorrectionMethod::rbcorr:
        term = rbcorr_term(group->records, full);
        break;
      case CorrectionMethod::bc:
        term = bc_term(group->records);
        break;
      case CorrectionMethod::cc:
        term = cc_term(group->probes);
        break;
      case CorrectionMethod::identity:
        term = CorrectionTerm::identity_for(group->space());
        break;
    }
    write_atomic(term_path, term_to_json(term).dump(2) + "\n");
  }
  return 0;
}

int cmd_sweep(const std::vector<std::string>& inputs,
              const ConditionFilter& filter, const std::string& method_name,
              std::vector<int> sizes, int iters, std::uint64_t seed,
              const std::string& csv_path, const std::string& json_path) {
  const CorrectionMethod method = correction_method_from_string(method_name);
  RecordStore store = load_inputs(inputs);
  const auto groups = select_groups(store, filter);
  if (groups.size() != 1) {
    throw Error("sweep requires exactly one condition; use --model/--dataset/"
                "--format to narrow " +
                std::to_string(groups.size()) + " conditions down to one");
  }
  const auto entries = size_sweep(*groups.front(), method, sizes, iters, seed);
  for (const auto& entry : entries) {
    if (!entry.result) {
      std::cerr << "size " << entry.size << ": " << entry.error << '\n';
    }
  }
  std::ostringstream os;
  write_sweep_csv(os, entries);
  write_text_output(csv_path, os.str());
  if (!json_path.empty()) {
    nlohmann::ordered_json j = run_meta(groups.front()->run);
    j["method"] = method_name;
    j["base_seed"] = seed;
    j["sweep"] = sweep_to_json(entries);
    write_atomic(json_path, j.dump(2) + "\n");
  }
  return 0;
}

int cmd_transfer(const std::vector<std::string>& inputs,
                 const ConditionFilter& filter,
                 const std::string& modality_name,
                 const std::string& method_name, int size, int iters,
                 std::uint64_t seed, const std::string& summary_path,
                 const std::string& heatmap_path,
                 const std::string& outcomes_path) {
  const TransferModality modality =
      transfer_modality_from_string(modality_name);
  TransferOptions options;
  options.method = correction_method_from_string(method_name);
  options.size = size;
  options.n_iter = iters;
  options.base_seed = seed;

  RecordStore store = load_inputs(inputs);
  const auto groups = select_groups(store, filter);
  std::vector<RunConfig> configs;
  for (const auto* g : groups) configs.push_back(g->run);

  const auto pairs = enumerate_pairs(configs, modality);
  if (pairs.empty()) {
    throw Error("no valid " + modality_name + " pairs among " +
                std::to_string(configs.size()) + " condition(s)");
  }

  std::vector<TransferOutcome> outcomes;
  outcomes.reserve(pairs.size());
  for (const auto& pair : pairs) {
    const ConditionGroup* source = store.find(pair.source);
    const ConditionGroup* target = store.find(pair.target);
    outcomes.push_back(run_transfer(pair, *source, *target, options));
  }

  const auto summary = transfer_summary(outcomes);
  std::ostringstream os;
  write_transfer_summary_csv(os, summary);
  write_text_output(summary_path, os.str());

  if (!heatmap_path.empty()) {
    const auto heatmap = transfer_heatmap(configs, outcomes);
    std::ostringstream hs;
    write_heatmap_csv(hs, heatmap);
    write_atomic(heatmap_path, hs.str());
  }
  if (!outcomes_path.empty()) {
    write_atomic(outcomes_path,
                 transfer_outcomes_to_json(outcomes).dump(2) + "\n");
  }
  return 0;
}

int cmd_synth(int arity, int n_per_class, double margin, double noise,
              const std::vector<std::string>& bias_entries,
              std::uint64_t seed, const std::string& output,
              std::string meta_path, const std::string& model_id,
              const std::string& dataset_id, const std::string& family,
              const std::string& format_name) {
  SyntheticSpec spec;
  switch (arity) {
    case 2: spec.space = OptionSpace::for_question_type(QuestionType::two_choice); break;
    case 3: spec.space = OptionSpace::for_question_type(QuestionType::three_choice); break;
    case 4: spec.space = OptionSpace::for_question_type(QuestionType::four_choice); break;
    default: throw Error("--arity must be 2, 3, or 4");
  }
  spec.n_per_class = n_per_class;
  spec.signal_margin = margin;
  spec.noise_sigma = noise;
  spec.bias = parse_bias_flags(bias_entries);
  spec.seed = seed;
  spec.run.model_id = model_id;
  spec.run.dataset_id = dataset_id;
  spec.run.model_family = family;
  spec.run.prompt_format = prompt_format_from_string(format_name);

  const SyntheticGroup group = generate_synthetic(spec);
  RecordStore store;
  for (const auto& rec : group.records) store.add(rec);
  std::ostringstream os;
  save_records(store, os);
  write_atomic(output, os.str());
  if (meta_path.empty()) meta_path = output + ".meta.jsonl";
  save_synthetic_metadata(group, meta_path);
  std::cout << "wrote " << group.records.size() << " records to " << output
            << " (unbiased metadata: " << meta_path << ")\n";
  return 0;
}

int cmd_harvest(const std::string& items_path, const std::string& dataset,
                const std::string& format_name, const std::string& base_url,
                const std::string& model, const std::string& family,
                const std::string& output, const std::string& auth_env,
                double timeout, int concurrency, int top_logprobs,
                int retries, bool no_response_line) {
  PromptTemplate tpl =
      prompt_template(dataset, prompt_format_from_string(format_name));
  tpl.append_response_line = !no_response_line;

  EndpointConfig endpoint;
  endpoint.base_url = base_url;
  endpoint.model = model;
  endpoint.timeout_seconds = timeout;
  endpoint.max_concurrency = concurrency;
  endpoint.auth_env_var = auth_env;
  endpoint.top_logprobs = top_logprobs;
  endpoint.max_retries = retries;

  RunConfig run;
  run.model_id = model;
  run.dataset_id = tpl.dataset_id;
  run.prompt_format = tpl.format;
  run.model_family = family.empty() ? model : family;
  run.question_type = tpl.question_type;

  const auto items = load_harvest_items(items_path);
  const HarvestSummary summary =
      harvest_run(items, tpl, endpoint, output, run);

  std::cout << "fetched " << summary.fetched << ", skipped "
            << summary.skipped << ", failed " << summary.failed << '\n';
  for (const auto& f : summary.failed_items) {
    std::cerr << "failed: " << f << '\n';
  }
  for (const auto& f : summary.flagged_items) {
    std::cerr << "flagged (floor-substituted tokens): " << f << '\n';
  }
  return summary.fetched == 0 && summary.failed > 0 ? 1 : 0;
}

int cmd_report(const std::vector<std::string>& inputs,
               const ConditionFilter& filter, int size, int iters,
               std::uint64_t seed, const std::string& output_dir,
               const std::string& sweep_json_path,
               const std::string& transfer_json_path) {
  RecordStore store = load_inputs(inputs);
  const auto groups = select_groups(store, filter);
  std::filesystem::create_directories(output_dir);

  ReportBundle bundle;
  bundle.version = std::string(kVersion);
  bundle.generated_at = timestamp_utc();

  std::vector<MethodComparisonRow> rows;
  for (const auto* group : groups) {
    if (group->records.empty()) continue;
    ConditionReport cond;
    cond.run = group->run;
    cond.baseline = eval_all(group->records,
                             CorrectionTerm::identity_for(group->space()));

    MethodComparisonRow row;
    row.dataset = group->run.dataset_id;
    row.model = group->run.model_id;
    row.baseline_acc = cond.baseline.accuracy;
    row.baseline_tvd = cond.baseline.tvd;

    for (CorrectionMethod method :
         {CorrectionMethod::cc, CorrectionMethod::bc,
          CorrectionMethod::rbcorr}) {
      if (method == CorrectionMethod::cc && group->probes.empty()) {
        continue;  // rendered as NA
      }
      const BeforeAfterReport report =
          before_after_report(*group, method, size, iters, seed);
      MethodOutcomeSummary m;
      m.method = method;
      m.size = size;
      m.iterations = iters;
      m.base_seed = seed;
      m.delta_acc = report.delta_accuracy;
      m.delta_tvd = report.delta_tvd;
      m.median_corrected_accuracy = report.median_corrected_accuracy;
      m.median_corrected_tvd = report.median_corrected_tvd;
      cond.methods.push_back(m);
      switch (method) {
        case CorrectionMethod::cc:
          row.cc_dacc = m.delta_acc;
          row.cc_dtvd = m.delta_tvd;
          break;
        case CorrectionMethod::bc:
          row.bc_dacc = m.delta_acc;
          row.bc_dtvd = m.delta_tvd;
          break;
        case CorrectionMethod::rbcorr:
          row.rbcorr_dacc = m.delta_acc;
          row.rbcorr_dtvd = m.delta_tvd;
          break;
        default:
          break;
      }
    }
    bundle.conditions.push_back(std::move(cond));
    rows.push_back(std::move(row));
  }

  if (!sweep_json_path.empty()) {
    std::ifstream in(sweep_json_path);
    if (!in) throw Error("cannot open " + sweep_json_path);
    bundle.sweeps = nlohmann::ordered_json::parse(in);
  }
  if (!transfer_json_path.empty()) {
    std::ifstream in(transfer_json_path);
    if (!in) throw Error("cannot open " + transfer_json_path);
    bundle.transfers = nlohmann::ordered_json::parse(in);
  }

  const std::filesystem::path dir(output_dir);
  {
    std::ostringstream os;
    emit_label_distribution_csv(os, store);
    write_atomic(dir / "label_distribution.csv", os.str());
  }
  {
    std::ostringstream os;
    emit_method_comparison_csv(os, rows);
    write_atomic(dir / "method_comparison.csv", os.str());
  }
  write_atomic(dir / "report.json", bundle_to_json(bundle).dump(2) + "\n");
  std::cout << "report written to " << output_dir << '\n';
  return 0;
}

}  // namespace

int cli_dispatch(int argc, const char* const* argv) {
  CLI::App app{"Response-bias measurement and correction for fixed-response "
               "LM log-probability records"};
  app.set_version_flag("--version", std::string(kVersion));
  app.set_config("--config", "", "Flat key=value config file mirroring the "
                                 "flags; command-line flags take precedence");
  app.require_subcommand(1);

  // ingest
  auto* ingest_cmd =
      app.add_subcommand("ingest", "Validate record files and report "
                                   "per-condition counts and class balance");
  std::vector<std::string> ingest_inputs;
  ingest_cmd->add_option("--input", ingest_inputs, "JSON-lines record file")
      ->required();

  // eval
  auto* eval_cmd = app.add_subcommand(
      "eval", "Baseline (uncorrected) metrics per condition");
  std::vector<std::string> eval_inputs;
  std::string eval_output = "-";
  ConditionFilter eval_filter;
  eval_cmd->add_option("--input", eval_inputs, "JSON-lines record file")
      ->required();
  eval_cmd->add_option("--output", eval_output, "Output JSON path (- = stdout)");
  add_filter_flags(eval_cmd, eval_filter);

  // correct
  auto* correct_cmd = app.add_subcommand(
      "correct", "Before/after correction report for one method");
  std::vector<std::string> correct_inputs;
  std::string correct_method = "rbcorr";
  int correct_size = 100;
  int correct_iters = 100;
  std::uint64_t correct_seed = 0;
  std::string correct_output = "-";
  std::string correct_csv;
  std::string correct_term;
  ConditionFilter correct_filter;
  correct_cmd->add_option("--input", correct_inputs, "JSON-lines record file")
      ->required();
  correct_cmd->add_option("--method", correct_method,
                          "rbcorr | cc | bc | identity");
  correct_cmd->add_option("--size", correct_size, "Calibration set size");
  correct_cmd->add_option("--iters", correct_iters, "Correction iterations");
  correct_cmd->add_option("--seed", correct_seed, "Base seed");
  correct_cmd->add_option("--output", correct_output,
                          "Output JSON path (- = stdout)");
  correct_cmd->add_option("--csv", correct_csv, "Per-iteration CSV path");
  correct_cmd->add_option("--emit-term", correct_term,
                          "Write a full-group correction term JSON here");
  add_filter_flags(correct_cmd, correct_filter);

  // sweep
  auto* sweep_cmd = app.add_subcommand(
      "sweep", "Calibration-size sweep over correction iterations");
  std::vector<std::string> sweep_inputs;
  std::string sweep_method = "rbcorr";
  std::vector<int> sweep_sizes = {20, 50, 100, 500, 1000};
  int sweep_iters = 100;
  std::uint64_t sweep_seed = 0;
  std::string sweep_csv = "-";
  std::string sweep_json;
  ConditionFilter sweep_filter;
  sweep_cmd->add_option("--input", sweep_inputs, "JSON-lines record file")
      ->required();
  sweep_cmd->add_option("--method", sweep_method, "rbcorr | cc | bc");
  sweep_cmd->add_option("--sizes", sweep_sizes, "Calibration sizes")
      ->delimiter(',');
  sweep_cmd->add_option("--iters", sweep_iters, "Iterations per size");
  sweep_cmd->add_option("--seed", sweep_seed, "Base seed");
  sweep_cmd->add_option("--csv", sweep_csv, "CSV output path (- = stdout)");
  sweep_cmd->add_option("--json", sweep_json, "JSON output path");
  add_filter_flags(sweep_cmd, sweep_filter);

  // transfer
  auto* transfer_cmd = app.add_subcommand(
      "transfer", "Apply correction terms across conditions and score "
                  "transfer success");
  std::vector<std::string> transfer_inputs;
  std::string transfer_modality;
  std::string transfer_method = "rbcorr";
  int transfer_size = 500;
  int transfer_iters = 100;
  std::uint64_t transfer_seed = 0;
  std::string transfer_summary_path = "-";
  std::string transfer_heatmap_path;
  std::string transfer_outcomes_path;
  ConditionFilter transfer_filter;
  transfer_cmd->add_option("--input", transfer_inputs,
                           "JSON-lines record file")
      ->required();
  transfer_cmd
      ->add_option("--modality", transfer_modality,
                   "cross_dataset | cross_model | cross_prompt")
      ->required();
  transfer_cmd->add_option("--method", transfer_method, "Correction method");
  transfer_cmd->add_option("--size", transfer_size, "Calibration set size");
  transfer_cmd->add_option("--iters", transfer_iters, "Iterations per pair");
  transfer_cmd->add_option("--seed", transfer_seed, "Base seed");
  transfer_cmd->add_option("--summary-csv", transfer_summary_path,
                           "Summary CSV path (- = stdout)");
  transfer_cmd->add_option("--heatmap-csv", transfer_heatmap_path,
                           "Heatmap CSV path (requires a complete grid)");
  transfer_cmd->add_option("--outcomes-json", transfer_outcomes_path,
                           "Per-pair outcomes JSON path");
  add_filter_flags(transfer_cmd, transfer_filter);

  // synth
  auto* synth_cmd = app.add_subcommand(
      "synth", "Generate a synthetic record group with controlled bias");
  int synth_arity = 2;
  int synth_n = 100;
  double synth_margin = 1.0;
  double synth_noise = 0.0;
  std::vector<std::string> synth_bias;
  std::uint64_t synth_seed = 0;
  std::string synth_output;
  std::string synth_meta;
  std::string synth_model = "synthetic-model";
  std::string synth_dataset = "synthetic";
  std::string synth_family = "synthetic";
  std::string synth_format = "fewshot";
  synth_cmd->add_option("--arity", synth_arity, "2, 3, or 4");
  synth_cmd->add_option("--n-per-class", synth_n, "Items per gold class")
      ->required();
  synth_cmd->add_option("--margin", synth_margin, "Signal margin (> 0)");
  synth_cmd->add_option("--noise", synth_noise, "Noise sigma (>= 0)");
  synth_cmd->add_option("--bias", synth_bias,
                        "Injected bias, LABEL=VALUE (repeatable)");
  synth_cmd->add_option("--seed", synth_seed, "Generator seed");
  synth_cmd->add_option("--output", synth_output, "Records JSONL path")
      ->required();
  synth_cmd->add_option("--meta", synth_meta,
                        "Unbiased-logprobs sidecar path");
  synth_cmd->add_option("--model-id", synth_model, "RunConfig model_id");
  synth_cmd->add_option("--dataset-id", synth_dataset, "RunConfig dataset_id");
  synth_cmd->add_option("--family", synth_family, "RunConfig model_family");
  synth_cmd->add_option("--prompt-format", synth_format,
                        "RunConfig prompt_format");

  // harvest
  auto* harvest_cmd = app.add_subcommand(
      "harvest", "Collect option logprobs from an HTTP completions endpoint");
  std::string harvest_items;
  std::string harvest_dataset;
  std::string harvest_format = "fewshot";
  std::string harvest_endpoint;
  std::string harvest_model;
  std::string harvest_family;
  std::string harvest_output;
  std::string harvest_auth_env;
  double harvest_timeout = 30.0;
  int harvest_concurrency = 4;
  int harvest_topk = 20;
  int harvest_retries = 3;
  bool harvest_no_response_line = false;
  harvest_cmd->add_option("--items", harvest_items, "Items JSONL path")
      ->required();
  harvest_cmd
      ->add_option("--dataset", harvest_dataset,
                   "Template dataset (arith, babi, comps, ewok, snli, mnli, "
                   "mmlu)")
      ->required();
  harvest_cmd->add_option("--prompt-format", harvest_format,
                          "zeroshot | instruction_only | fewshot");
  harvest_cmd
      ->add_option("--endpoint", harvest_endpoint,
                   "Base URL, e.g. http://127.0.0.1:8080")
      ->required();
  harvest_cmd->add_option("--model-id", harvest_model, "Model identifier")
      ->required();
  harvest_cmd->add_option("--family", harvest_family,
                          "Model family tag (defaults to model id)");
  harvest_cmd->add_option("--output", harvest_output, "Records JSONL path")
      ->required();
  harvest_cmd->add_option("--auth-env", harvest_auth_env,
                          "Env var holding a bearer token");
  harvest_cmd->add_option("--timeout", harvest_timeout, "Request timeout (s)");
  harvest_cmd->add_option("--concurrency", harvest_concurrency,
                          "Max concurrent requests");
  harvest_cmd->add_option("--top-logprobs", harvest_topk,
                          "top_logprobs requested per position");
  harvest_cmd->add_option("--retries", harvest_retries,
                          "Max retries per request");
  harvest_cmd->add_flag("--no-response-line", harvest_no_response_line,
                        "Do not append the trailing response cue line");

  // report
  auto* report_cmd = app.add_subcommand(
      "report", "Emit label-distribution CSV, method-comparison CSV, and a "
                "JSON report bundle");
  std::vector<std::string> report_inputs;
  ConditionFilter report_filter;
  int report_size = 100;
  int report_iters = 100;
  std::uint64_t report_seed = 0;
  std::string report_dir;
  std::string report_sweep_json;
  std::string report_transfer_json;
  report_cmd->add_option("--input", report_inputs, "JSON-lines record file")
      ->required();
  report_cmd->add_option("--output-dir", report_dir, "Output directory")
      ->required();
  report_cmd->add_option("--size", report_size, "Calibration set size");
  report_cmd->add_option("--iters", report_iters, "Correction iterations");
  report_cmd->add_option("--seed", report_seed, "Base seed");
  report_cmd->add_option("--sweep-json", report_sweep_json,
                         "Merge a stored sweep JSON into the bundle");
  report_cmd->add_option("--transfer-json", report_transfer_json,
                         "Merge stored transfer outcomes into the bundle");
  add_filter_flags(report_cmd, report_filter);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*ingest_cmd) return cmd_ingest(ingest_inputs);
    if (*eval_cmd) return cmd_eval(eval_inputs, eval_filter, eval_output);
    if (*correct_cmd) {
      return cmd_correct(correct_inputs, correct_filter, correct_method,
                         correct_size, correct_iters, correct_seed,
                         correct_output, correct_csv, correct_term);
    }
    if (*sweep_cmd) {
      return cmd_sweep(sweep_inputs, sweep_filter, sweep_method, sweep_sizes,
                       sweep_iters, sweep_seed, sweep_csv, sweep_json);
    }
    if (*transfer_cmd) {
      return cmd_transfer(transfer_inputs, transfer_filter, transfer_modality,
                          transfer_method, transfer_size, transfer_iters,
                          transfer_seed, transfer_summary_path,
                          transfer_heatmap_path, transfer_outcomes_path);
    }
    if (*synth_cmd) {
      return cmd_synth(synth_arity, synth_n, synth_margin, synth_noise,
                       synth_bias, synth_seed, synth_output, synth_meta,
                       synth_model, synth_dataset, synth_family, synth_format);
    }
    if (*harvest_cmd) {
      return cmd_harvest(harvest_items, harvest_dataset, harvest_format,
                         harvest_endpoint, harvest_model, harvest_family,
                         harvest_output, harvest_auth_env, harvest_timeout,
                         harvest_concurrency, harvest_topk, harvest_retries,
                         harvest_no_response_line);
    }
    if (*report_cmd) {
      return cmd_report(report_inputs, report_filter, report_size,
                        report_iters, report_seed, report_dir,
                        report_sweep_json, report_transfer_json);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace rbcorr
