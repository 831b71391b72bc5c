#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "tsadbench/benchmark.hpp"
#include "tsadbench/data.hpp"
#include "tsadbench/engine.hpp"
#include "tsadbench/evaluation.hpp"
#include "tsadbench/primitives/builtin.hpp"

namespace fs = std::filesystem;
using namespace tsadbench;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidationFailed = 1;
constexpr int kExitUsage = 2;

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw BenchError(ErrorCode::ConfigError, "cannot open '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// Pipelines shipped with the repository, loaded from <root>/pipelines.
std::map<std::string, PipelineSpec> load_pipeline_dir(const PrimitiveRegistry& registry,
                                                      const fs::path& root, bool verified_only) {
  std::map<std::string, PipelineSpec> pipelines;
  for (const char* tier : {"verified", "sandbox"}) {
    if (verified_only && std::string(tier) != "verified") continue;
    const fs::path dir = root / "pipelines" / tier;
    if (!fs::exists(dir)) continue;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
      PipelineSpec spec = load_pipeline_spec(read_text_file(entry.path()), registry);
      pipelines[spec.name] = std::move(spec);
    }
  }
  return pipelines;
}

std::vector<AnomalyInterval> read_interval_csv(const fs::path& path) {
  const auto rows = csv::read_file(path.string());
  if (rows.empty() || rows[0] != std::vector<std::string>{"start", "end"})
    throw BenchError(ErrorCode::ParseError, path.string() + ": expected header 'start,end'");
  std::vector<AnomalyInterval> intervals;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const std::string where = path.string() + " line " + std::to_string(i + 1);
    if (rows[i].size() != 2) throw BenchError(ErrorCode::ParseError, where + ": expected 2 fields");
    const Timestamp start = csv::parse_int(rows[i][0], where);
    const Timestamp end = csv::parse_int(rows[i][1], where);
    if (start > end) throw BenchError(ErrorCode::ParseError, where + ": start exceeds end");
    intervals.emplace_back(start, end);
  }
  std::sort(intervals.begin(), intervals.end(),
            [](const AnomalyInterval& a, const AnomalyInterval& b) { return a.start < b.start; });
  return intervals;
}

std::string score_text(const std::optional<double>& v) {
  return v ? csv::format_double(*v) : std::string("undefined");
}

// ---------------------------------------------------------------------------

struct GlobalOptions {
  fs::path root = ".";
  std::string registry_file;  // defaults to <root>/datasets.json

  fs::path registry_path() const {
    return registry_file.empty() ? root / "datasets.json" : fs::path(registry_file);
  }
};

int cmd_run(const GlobalOptions& global, std::vector<std::string> pipelines,
            std::vector<std::string> datasets, const std::string& metrics, std::int64_t iterations,
            std::uint64_t seed, int workers, const std::string& output, const std::string& timings,
            bool reproducible) {
  const PrimitiveRegistry registry = builtin_registry();
  BenchmarkEnv env;
  env.registry = &registry;
  env.pipelines = load_pipeline_dir(registry, global.root, false);
  const DataRepository data = DataRepository::load(global.registry_path());
  env.data = &data;

  BenchmarkConfig config;
  if (pipelines.empty())
    for (const auto& [name, spec] : env.pipelines)
      if (spec.status == PipelineStatus::Verified) pipelines.push_back(name);
  if (datasets.empty()) datasets = data.dataset_names();
  config.pipelines = std::move(pipelines);
  config.datasets = std::move(datasets);
  config.method = parse_metric_method(metrics);
  config.iterations = iterations;
  config.seed = seed;
  config.workers = workers;
  config.reproducible = reproducible;

  const RunOutput out = run_benchmark(env, config);
  write_records_csv(output, out.records);
  write_timings_csv(timings, out.timings);

  std::size_t failures = 0;
  for (const auto& r : out.records)
    if (r.status == RunStatus::Error) ++failures;
  std::cout << out.records.size() << " experiments (" << failures << " failed), results in "
            << output << ", timings in " << timings << "\n";

  const RuntimeReport report = runtime_report(out.records, out.timings);
  for (const auto& row : report.buckets)
    std::cout << "  " << row.pipeline << " @ length<=" << row.bucket << ": mean "
              << csv::format_double(row.mean_elapsed, 3) << "s over " << row.experiments
              << " experiments\n";
  for (const auto& warning : report.warnings) std::cout << "  warning: " << warning << "\n";
  return kExitOk;
}

int cmd_summarize(const std::string& results, const std::string& metric, const std::string& baseline,
                  const std::string& out_file, const std::string& leaderboard_file) {
  if (metric != "f1" && metric != "precision" && metric != "recall")
    throw BenchError(ErrorCode::ConfigError, "metric must be f1, precision or recall");
  const auto records = read_records_csv(results);
  const SummaryTable table = summarize(records);
  if (!out_file.empty()) {
    write_summary_csv(out_file, table);
    std::cout << "summary written to " << out_file << "\n";
  }
  if (!leaderboard_file.empty()) {
    const auto rows = leaderboard(table, baseline);
    write_leaderboard_csv(leaderboard_file, rows);
    std::cout << "leaderboard (baseline " << baseline << ") written to " << leaderboard_file << "\n";
  }
  for (const auto& [pipeline, cells] : table.cells) {
    for (const auto& [dataset, cell] : cells) {
      const std::optional<double> value = metric == "f1"          ? cell.f1
                                          : metric == "precision" ? cell.precision
                                                                  : cell.recall;
      std::cout << pipeline << " on " << dataset << ": " << metric << " = "
                << (cell.failed ? std::string("failed") : score_text(value)) << "\n";
    }
  }
  return kExitOk;
}

int cmd_evaluate(const std::string& detected_file, const std::string& truth_file,
                 const std::string& method, const std::vector<std::int64_t>& domain,
                 std::int64_t step) {
  const auto detected = read_interval_csv(detected_file);
  const auto truth = read_interval_csv(truth_file);
  const Timestamp t0 = domain[0];
  const Timestamp t1 = domain[1];

  ConfusionCounts counts;
  if (parse_metric_method(method) == MetricMethod::Overlapping)
    counts = overlapping_segment_counts(detected, truth, t0, t1);
  else
    counts = weighted_segment_counts(detected, truth, t0, t1, step);
  const Scores scores = dataset_scores({counts});

  std::cout << "tp=" << counts.tp << " fp=" << counts.fp << " fn=" << counts.fn;
  if (counts.tn) std::cout << " tn=" << *counts.tn;
  std::cout << "\nprecision=" << score_text(scores.precision) << " recall=" << score_text(scores.recall)
            << " f1=" << score_text(scores.f1) << "\n";
  return kExitOk;
}

int cmd_history_add(const std::string& dir, const std::string& version, const std::string& results) {
  const auto records = read_records_csv(results);
  history_add(dir, version, summarize(records));
  std::cout << "release " << version << " recorded in " << dir << "\n";
  return kExitOk;
}

int cmd_history_shifts(const std::string& dir) {
  const ReleaseHistory history = load_release_history(dir);
  const auto reports = detect_shifts(history);
  for (const auto& r : reports) {
    std::cout << r.version_prev << " -> " << r.version_next << " " << r.pipeline
              << ": mu=" << csv::format_double(r.mu, 4) << " delta=" << csv::format_double(r.delta, 4)
              << " datasets=" << r.used;
    if (r.skipped > 0) std::cout << " skipped=" << r.skipped;
    std::cout << (r.flagged ? "  SHIFT" : "") << "\n";
  }
  return kExitOk;
}

int cmd_history_rho(const std::string& dir, const std::string& baseline) {
  const ReleaseHistory history = load_release_history(dir);
  if (history.size() < 2)
    throw BenchError(ErrorCode::ConfigError, "need at least two releases for rank correlation");
  const auto vectors = history_rank_vectors(history, baseline);

  std::vector<SemVer> versions;
  for (const auto& [version, ranks] : vectors) versions.push_back(version);
  double sum = 0.0;
  std::int64_t pairs = 0;
  for (std::size_t i = 0; i < versions.size(); ++i) {
    for (std::size_t j = i + 1; j < versions.size(); ++j) {
      const double rho = spearman_rho(vectors.at(versions[i]), vectors.at(versions[j]));
      std::cout << "rho(" << versions[i].str() << ", " << versions[j].str()
                << ") = " << csv::format_double(rho, 6) << "\n";
      sum += rho;
      ++pairs;
    }
  }
  std::cout << "mean rho = " << csv::format_double(sum / static_cast<double>(pairs), 6) << "\n";
  return kExitOk;
}

// Verification gate: schema, data-flow, an actual fit/detect round on a
// bundled synthetic signal, and a fixed-seed double-run determinism check.
int cmd_pipeline_validate(const GlobalOptions&, const std::string& path, std::uint64_t seed) {
  const PrimitiveRegistry registry = builtin_registry();

  bool all_passed = true;
  auto report = [&](const char* check, bool passed, const std::string& detail = "") {
    std::cout << check << ": " << (passed ? "PASS" : "FAIL");
    if (!detail.empty()) std::cout << " (" << detail << ")";
    std::cout << "\n";
    all_passed = all_passed && passed;
  };
  auto skip_rest = [&](std::initializer_list<const char*> checks) {
    for (const char* check : checks) std::cout << check << ": SKIP\n";
  };

  std::optional<PipelineSpec> spec;
  try {
    spec = load_pipeline_spec(read_text_file(path), registry);
    report("schema", true);
    report("data-flow", true);
  } catch (const BenchError& e) {
    if (e.code() == ErrorCode::DanglingInput) {
      report("schema", true);
      report("data-flow", false, e.what());
      skip_rest({"execution", "determinism"});
    } else {
      report("schema", false, e.what());
      skip_rest({"data-flow", "execution", "determinism"});
    }
    return kExitValidationFailed;
  }

  SyntheticConfig bundled;
  bundled.length = 1000;
  bundled.period = 80;
  bundled.noise_sigma = 0.02;
  bundled.seed = 424242;
  AnomalySpec spike;
  spike.kind = AnomalyKind::PointSpike;
  spike.position = 700;
  spike.magnitude = 5.0;
  bundled.anomalies = {spike};
  const SyntheticSignal signal = generate_synthetic(bundled);

  std::optional<DetectResult> first;
  try {
    const FittedPipeline fitted = fit(*spec, registry, signal.series, seed);
    first = detect(fitted, registry, signal.series);
    report("execution", true);
  } catch (const std::exception& e) {
    report("execution", false, e.what());
    skip_rest({"determinism"});
    return kExitValidationFailed;
  }

  try {
    const FittedPipeline fitted = fit(*spec, registry, signal.series, seed);
    const DetectResult second = detect(fitted, registry, signal.series);
    const bool same = second.intervals.size() == first->intervals.size() &&
                      std::equal(second.intervals.begin(), second.intervals.end(),
                                 first->intervals.begin(),
                                 [](const AnomalyInterval& a, const AnomalyInterval& b) {
                                   return a.start == b.start && a.end == b.end;
                                 });
    report("determinism", same, same ? "" : "fixed-seed reruns disagree");
  } catch (const std::exception& e) {
    report("determinism", false, e.what());
  }

  return all_passed ? kExitOk : kExitValidationFailed;
}

int cmd_data_fetch(const GlobalOptions& global, const std::string& dataset) {
  const DataRepository data = DataRepository::load(global.registry_path());
  data.fetch_dataset(dataset);
  std::cout << "dataset '" << dataset << "' available locally\n";
  return kExitOk;
}

int cmd_data_synth(const std::string& config_file, const std::string& out_dir) {
  const Json config = Json::parse(read_text_file(config_file), nullptr, false);
  if (config.is_discarded())
    throw BenchError(ErrorCode::ConfigError, config_file + " is not valid JSON");
  write_synthetic_dataset(config, out_dir);
  std::cout << "synthetic dataset written to " << out_dir << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"End-to-end benchmark for unsupervised time series anomaly detection"};
  app.require_subcommand(1);

  GlobalOptions global;
  app.add_option("--root", global.root, "repository root holding pipelines/ and datasets.json")
      ->capture_default_str();
  app.add_option("--registry", global.registry_file, "dataset registry JSON (default <root>/datasets.json)");

  int exit_code = kExitOk;

  // run
  auto* run = app.add_subcommand("run", "execute the benchmark over pipelines x datasets");
  run->fallthrough();
  auto run_pipelines = std::make_shared<std::vector<std::string>>();
  auto run_datasets = std::make_shared<std::vector<std::string>>();
  auto run_metrics = std::make_shared<std::string>("overlapping");
  auto run_iterations = std::make_shared<std::int64_t>(5);
  auto run_seed = std::make_shared<std::uint64_t>(42);
  auto run_workers = std::make_shared<int>(1);
  auto run_output = std::make_shared<std::string>("results.csv");
  auto run_timings = std::make_shared<std::string>("timings.csv");
  auto run_reproducible = std::make_shared<bool>(false);
  run->add_option("--pipelines", *run_pipelines, "pipeline names (default: all verified)");
  run->add_option("--datasets", *run_datasets, "dataset names (default: all registered)");
  run->add_option("--metrics", *run_metrics, "overlapping|weighted")->capture_default_str();
  run->add_option("--iterations", *run_iterations, "iterations per experiment")->capture_default_str();
  run->add_option("--seed", *run_seed, "global random seed")->capture_default_str();
  run->add_option("--workers", *run_workers, "parallel worker threads")->capture_default_str();
  run->add_option("--output", *run_output, "detailed sheet CSV path")->capture_default_str();
  run->add_option("--timings", *run_timings, "per-primitive timings CSV path")->capture_default_str();
  run->add_flag("--reproducible", *run_reproducible, "zero run_id and elapsed for byte-stable output");
  run->callback([&, run_pipelines, run_datasets, run_metrics, run_iterations, run_seed, run_workers,
                 run_output, run_timings, run_reproducible]() {
    exit_code = cmd_run(global, *run_pipelines, *run_datasets, *run_metrics, *run_iterations,
                        *run_seed, *run_workers, *run_output, *run_timings, *run_reproducible);
  });

  // summarize
  auto* summarize_cmd = app.add_subcommand("summarize", "aggregate a detailed sheet into summary and leaderboard");
  summarize_cmd->fallthrough();
  auto sum_results = std::make_shared<std::string>();
  auto sum_metric = std::make_shared<std::string>("f1");
  auto sum_baseline = std::make_shared<std::string>("arima_like");
  auto sum_out = std::make_shared<std::string>();
  auto sum_leaderboard = std::make_shared<std::string>();
  summarize_cmd->add_option("results", *sum_results, "detailed sheet CSV")->required();
  summarize_cmd->add_option("--metric", *sum_metric, "f1|precision|recall")->capture_default_str();
  summarize_cmd->add_option("--baseline", *sum_baseline, "baseline pipeline for the leaderboard")
      ->capture_default_str();
  summarize_cmd->add_option("--out", *sum_out, "summary CSV path");
  summarize_cmd->add_option("--leaderboard", *sum_leaderboard, "leaderboard CSV path");
  summarize_cmd->callback([&, sum_results, sum_metric, sum_baseline, sum_out, sum_leaderboard]() {
    exit_code = cmd_summarize(*sum_results, *sum_metric, *sum_baseline, *sum_out, *sum_leaderboard);
  });

  // evaluate
  auto* evaluate_cmd = app.add_subcommand("evaluate", "score a detected-interval file against ground truth");
  evaluate_cmd->fallthrough();
  auto eval_detected = std::make_shared<std::string>();
  auto eval_truth = std::make_shared<std::string>();
  auto eval_method = std::make_shared<std::string>("overlapping");
  auto eval_domain = std::make_shared<std::vector<std::int64_t>>();
  auto eval_step = std::make_shared<std::int64_t>(1);
  evaluate_cmd->add_option("--detected", *eval_detected, "detected intervals CSV (start,end)")->required();
  evaluate_cmd->add_option("--truth", *eval_truth, "ground-truth intervals CSV (start,end)")->required();
  evaluate_cmd->add_option("--method", *eval_method, "overlapping|weighted")->capture_default_str();
  evaluate_cmd->add_option("--domain", *eval_domain, "evaluation domain: t0 t1")
      ->expected(2)
      ->required();
  evaluate_cmd->add_option("--step", *eval_step, "sample step for the weighted method")
      ->capture_default_str();
  evaluate_cmd->callback([&, eval_detected, eval_truth, eval_method, eval_domain, eval_step]() {
    exit_code = cmd_evaluate(*eval_detected, *eval_truth, *eval_method, *eval_domain, *eval_step);
  });

  // history
  auto* history_cmd = app.add_subcommand("history", "manage per-release benchmark summaries");
  history_cmd->fallthrough();
  history_cmd->require_subcommand(1);
  auto hist_dir = std::make_shared<std::string>("releases");
  history_cmd->add_option("--dir", *hist_dir, "release directory")->capture_default_str();

  auto* hist_add = history_cmd->add_subcommand("add", "summarize a detailed sheet and record it as a release");
  hist_add->fallthrough();
  auto hist_version = std::make_shared<std::string>();
  auto hist_results = std::make_shared<std::string>();
  hist_add->add_option("--version", *hist_version, "semantic version, e.g. 0.5.2")->required();
  hist_add->add_option("--results", *hist_results, "detailed sheet CSV")->required();
  hist_add->callback([&, hist_dir, hist_version, hist_results]() {
    exit_code = cmd_history_add(*hist_dir, *hist_version, *hist_results);
  });

  auto* hist_shifts = history_cmd->add_subcommand("shifts", "flag F1 shifts between consecutive releases");
  hist_shifts->fallthrough();
  hist_shifts->callback([&, hist_dir]() { exit_code = cmd_history_shifts(*hist_dir); });

  auto* hist_rho = history_cmd->add_subcommand("rho", "pairwise rank correlation across releases");
  hist_rho->fallthrough();
  auto hist_baseline = std::make_shared<std::string>("arima_like");
  hist_rho->add_option("--baseline", *hist_baseline, "baseline pipeline for ranking")->capture_default_str();
  hist_rho->callback([&, hist_dir, hist_baseline]() {
    exit_code = cmd_history_rho(*hist_dir, *hist_baseline);
  });

  // pipeline validate
  auto* pipeline_cmd = app.add_subcommand("pipeline", "pipeline maintenance commands");
  pipeline_cmd->fallthrough();
  pipeline_cmd->require_subcommand(1);
  auto* validate_cmd = pipeline_cmd->add_subcommand(
      "validate", "run the verification gate on a pipeline document");
  validate_cmd->fallthrough();
  auto validate_path = std::make_shared<std::string>();
  auto validate_seed = std::make_shared<std::uint64_t>(7);
  validate_cmd->add_option("path", *validate_path, "pipeline JSON path")->required();
  validate_cmd->add_option("--seed", *validate_seed, "seed for the execution checks")->capture_default_str();
  validate_cmd->callback([&, validate_path, validate_seed]() {
    exit_code = cmd_pipeline_validate(global, *validate_path, *validate_seed);
  });

  // data
  auto* data_cmd = app.add_subcommand("data", "dataset management");
  data_cmd->fallthrough();
  data_cmd->require_subcommand(1);

  auto* fetch_cmd = data_cmd->add_subcommand("fetch", "download a dataset's signals into the cache");
  fetch_cmd->fallthrough();
  auto fetch_dataset = std::make_shared<std::string>();
  fetch_cmd->add_option("dataset", *fetch_dataset, "registered dataset name")->required();
  fetch_cmd->callback([&, fetch_dataset]() { exit_code = cmd_data_fetch(global, *fetch_dataset); });

  auto* synth_cmd = data_cmd->add_subcommand("synth", "generate a synthetic dataset from a config");
  synth_cmd->fallthrough();
  auto synth_config = std::make_shared<std::string>();
  auto synth_out = std::make_shared<std::string>();
  synth_cmd->add_option("--config", *synth_config, "synthetic config JSON")->required();
  synth_cmd->add_option("--out", *synth_out, "output directory")->required();
  synth_cmd->callback([&, synth_config, synth_out]() {
    exit_code = cmd_data_synth(*synth_config, *synth_out);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const BenchError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return exit_code;
}
