#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "tsadbench/benchmark.hpp"
#include "tsadbench/primitives/builtin.hpp"

using namespace tsadbench;
namespace fs = std::filesystem;

namespace {

const fs::path kRepoDir = TSADBENCH_REPO_DIR;

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("tsadbench_bench_" + std::to_string(std::random_device{}()));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

Json synth_config() {
  Json config;
  config["name"] = "synth";
  config["signals"] = Json::array();
  for (int i = 0; i < 3; ++i) {
    Json signal;
    signal["name"] = "s" + std::to_string(i);
    signal["length"] = 800;
    signal["period"] = 80;
    signal["noise_sigma"] = 0.02;
    signal["seed"] = 500 + i;
    signal["anomalies"] = Json::array(
        {Json{{"kind", "point_spike"}, {"position", 200 + 50 * i}, {"magnitude", 5.0}}});
    config["signals"].push_back(signal);
  }
  return config;
}

struct Fixture {
  TempDir tmp;
  PrimitiveRegistry registry = builtin_registry();
  DataRepository data;
  BenchmarkEnv env;

  Fixture() : data(make_data()) {
    env.registry = &registry;
    env.data = &data;
    for (const char* rel : {"pipelines/verified/arima_like.json", "pipelines/verified/mp.json"}) {
      const PipelineSpec spec = load_pipeline_spec(read_file(kRepoDir / rel), registry);
      env.pipelines[spec.name] = spec;
    }
    // a pipeline that always fails at fit: the model order exceeds any signal
    const std::string failing = R"({
      "schema": 1, "name": "failing", "status": "sandbox",
      "primitives": ["time_segments_aggregate", "mean_impute", "min_max_scale",
                      "ar_forecast", "regression_errors", "find_anomalies"],
      "init": {"ar_forecast": {"p": 1000000}}})";
    const PipelineSpec spec = load_pipeline_spec(failing, registry);
    env.pipelines[spec.name] = spec;
  }

  DataRepository make_data() {
    write_synthetic_dataset(synth_config(), tmp.path());
    return DataRepository::load(tmp.path() / "datasets.json");
  }
};

BenchmarkConfig base_config() {
  BenchmarkConfig config;
  config.pipelines = {"arima_like", "mp"};
  config.datasets = {"synth"};
  config.iterations = 2;
  config.seed = 7;
  config.workers = 1;
  config.reproducible = true;
  return config;
}

TEST(RunBenchmark, CartesianCardinalityHoldsRegardlessOfFailures) {
  Fixture fx;
  BenchmarkConfig config = base_config();
  config.pipelines = {"arima_like", "failing"};
  const RunOutput out = run_benchmark(fx.env, config);
  EXPECT_EQ(out.records.size(), 2u * 3u * 2u);  // pipelines x signals x iterations

  std::size_t errors = 0;
  for (const auto& r : out.records) {
    if (r.pipeline == "failing") {
      EXPECT_EQ(r.status, RunStatus::Error);
      EXPECT_FALSE(r.f1.has_value());
      EXPECT_FALSE(r.tp.has_value());
      ++errors;
    } else {
      EXPECT_EQ(r.status, RunStatus::Ok);
      EXPECT_TRUE(r.tp.has_value());
    }
  }
  EXPECT_EQ(errors, 6u);
}

TEST(RunBenchmark, UnknownNamesAreConfigErrors) {
  Fixture fx;
  BenchmarkConfig config = base_config();
  config.pipelines = {"nope"};
  try {
    run_benchmark(fx.env, config);
    FAIL() << "expected ConfigError";
  } catch (const BenchError& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigError);
  }
  config = base_config();
  config.datasets = {"missing_dataset"};
  try {
    run_benchmark(fx.env, config);
    FAIL() << "expected NotRegistered";
  } catch (const BenchError& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotRegistered);
  }
}

TEST(RunBenchmark, SameSeedIsIdenticalAcrossWorkerCounts) {
  Fixture fx;
  BenchmarkConfig config = base_config();
  const RunOutput serial = run_benchmark(fx.env, config);
  config.workers = 4;
  const RunOutput parallel = run_benchmark(fx.env, config);

  TempDir out;
  write_records_csv(out.path() / "serial.csv", serial.records);
  write_records_csv(out.path() / "parallel.csv", parallel.records);
  EXPECT_EQ(read_file(out.path() / "serial.csv"), read_file(out.path() / "parallel.csv"));
}

TEST(RunBenchmark, DetailedCsvRoundTrips) {
  Fixture fx;
  const RunOutput out = run_benchmark(fx.env, base_config());
  TempDir dir;
  write_records_csv(dir.path() / "results.csv", out.records);

  const std::string text = read_file(dir.path() / "results.csv");
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "dataset,pipeline,signal,iteration,f1,precision,recall,tn,fp,fn,tp,status,elapsed,run_id");

  const auto parsed = read_records_csv(dir.path() / "results.csv");
  ASSERT_EQ(parsed.size(), out.records.size());
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    EXPECT_EQ(parsed[i].pipeline, out.records[i].pipeline);
    EXPECT_EQ(parsed[i].signal, out.records[i].signal);
    EXPECT_EQ(parsed[i].tp.has_value(), out.records[i].tp.has_value());
  }
  // overlapping method leaves tn empty
  for (const auto& r : parsed) EXPECT_FALSE(r.tn.has_value());
}

TEST(Summarize, MedianOverIterationsAndFailureMarking) {
  std::vector<ExperimentRecord> records;
  std::vector<double> pooled;  // per-iteration pooled f1, computed directly
  const std::int64_t extras[5] = {200, 22, 86, 133, 50};  // fp+fn per iteration
  for (int i = 0; i < 5; ++i) {
    ExperimentRecord r;
    r.dataset = "d";
    r.pipeline = "p";
    r.signal = "s";
    r.iteration = i;
    const std::int64_t tp = 100;
    r.tp = tp;
    r.fp = extras[i];
    r.fn = 0;
    r.status = RunStatus::Ok;
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + extras[i]);
    pooled.push_back(2.0 * precision * 1.0 / (precision + 1.0));
    r.f1 = pooled.back();
    records.push_back(r);
  }
  auto median_of = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
  };
  const SummaryTable table = summarize(records);
  const SummaryCell* cell = table.find("p", "d");
  ASSERT_NE(cell, nullptr);
  ASSERT_TRUE(cell->f1.has_value());
  EXPECT_NEAR(*cell->f1, median_of(pooled), 1e-12);

  // single iteration is the identity
  const SummaryTable one = summarize({records[0]});
  EXPECT_NEAR(*one.find("p", "d")->f1, pooled[0], 1e-12);

  // even count averages the middle two
  const SummaryTable four = summarize({records[0], records[1], records[2], records[3]});
  EXPECT_NEAR(*four.find("p", "d")->f1,
              median_of({pooled[0], pooled[1], pooled[2], pooled[3]}), 1e-12);

  // an all-ERROR cell is marked failed
  ExperimentRecord bad;
  bad.dataset = "d2";
  bad.pipeline = "p";
  bad.signal = "s";
  bad.status = RunStatus::Error;
  const SummaryTable with_fail = summarize({records[0], bad});
  EXPECT_TRUE(with_fail.find("p", "d2")->failed);
  EXPECT_FALSE(with_fail.find("p", "d")->failed);
}

TEST(Summarize, PoolsCountsAcrossSignalsPerIteration) {
  std::vector<ExperimentRecord> records;
  auto add = [&](const std::string& signal, std::int64_t tp, std::int64_t fp, std::int64_t fn) {
    ExperimentRecord r;
    r.dataset = "d";
    r.pipeline = "p";
    r.signal = signal;
    r.iteration = 0;
    r.tp = tp;
    r.fp = fp;
    r.fn = fn;
    r.status = RunStatus::Ok;
    records.push_back(r);
  };
  add("a", 2, 1, 0);
  add("b", 1, 0, 2);
  const SummaryTable table = summarize(records);
  const SummaryCell* cell = table.find("p", "d");
  ASSERT_NE(cell, nullptr);
  EXPECT_NEAR(*cell->precision, 0.75, 1e-12);
  EXPECT_NEAR(*cell->recall, 0.6, 1e-12);
}

SummaryTable table_from(const std::map<std::string, std::map<std::string, double>>& f1s) {
  SummaryTable table;
  for (const auto& [pipeline, datasets] : f1s)
    for (const auto& [dataset, f1] : datasets) {
      SummaryCell cell;
      cell.f1 = f1;
      table.cells[pipeline][dataset] = cell;
    }
  return table;
}

TEST(Leaderboard, StrictWinsAndTieBreak) {
  const SummaryTable table = table_from({
      {"base", {{"d1", 0.5}, {"d2", 0.5}}},
      {"better", {{"d1", 0.6}, {"d2", 0.5}}},   // one strict win
      {"equal_a", {{"d1", 0.5}, {"d2", 0.6}}},  // one win, mean 0.55
      {"equal_b", {{"d1", 0.6}, {"d2", 0.4}}},  // one win, mean 0.50
  });
  const auto rows = leaderboard(table, "base");
  ASSERT_EQ(rows.size(), 4u);
  // wins: better/equal_a/equal_b all 1, base 0; ties break on mean f1
  EXPECT_EQ(rows[0].pipeline, "better");  // mean 0.55, name precedes equal_a? both 0.55 ->
  // better (0.55) vs equal_a (0.55): tie on wins and mean, name decides
  EXPECT_EQ(rows[1].pipeline, "equal_a");
  EXPECT_EQ(rows[2].pipeline, "equal_b");
  EXPECT_EQ(rows[3].pipeline, "base");
  EXPECT_EQ(rows[3].wins, 0);  // strict inequality: baseline never beats itself
  std::set<std::int64_t> ranks;
  for (const auto& r : rows) ranks.insert(r.rank);
  EXPECT_EQ(ranks, (std::set<std::int64_t>{1, 2, 3, 4}));
}

TEST(Leaderboard, MissingBaselineIsRejected) {
  const SummaryTable table = table_from({{"only", {{"d", 0.5}}}});
  try {
    leaderboard(table, "absent");
    FAIL() << "expected MissingBaseline";
  } catch (const BenchError& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingBaseline);
  }
}

TEST(Leaderboard, FailedCellsNeverWin) {
  SummaryTable table = table_from({{"base", {{"d1", 0.1}, {"d2", 0.1}}},
                                   {"flaky", {{"d1", 0.9}}}});
  SummaryCell failed;
  failed.failed = true;
  table.cells["flaky"]["d2"] = failed;
  const auto rows = leaderboard(table, "base");
  for (const auto& row : rows)
    if (row.pipeline == "flaky") EXPECT_EQ(row.wins, 1);
}

TEST(Spearman, KnownValues) {
  EXPECT_DOUBLE_EQ(spearman_rho({1, 2, 3}, {1, 2, 3}), 1.0);
  EXPECT_DOUBLE_EQ(spearman_rho({1, 2, 3}, {3, 2, 1}), -1.0);
  try {
    spearman_rho({1, 2}, {1, 2, 3});
    FAIL() << "expected LengthMismatch";
  } catch (const BenchError& e) {
    EXPECT_EQ(e.code(), ErrorCode::LengthMismatch);
  }
  try {
    spearman_rho({1, 2, 2}, {1, 2, 3});
    FAIL() << "expected NotPermutation";
  } catch (const BenchError& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotPermutation);
  }
}

TEST(Spearman, ElevenPipelineRankTable) {
  const std::vector<std::int64_t> run1 = {1, 3, 2, 6, 4, 7, 5, 8, 9, 10, 11};
  const std::vector<std::int64_t> run2 = {1, 2, 5, 7, 3, 4, 6, 8, 9, 10, 11};
  // sum of squared rank differences is 22, n = 11
  EXPECT_NEAR(spearman_rho(run1, run2), 1.0 - 6.0 * 22.0 / (11.0 * 120.0), 1e-12);
  EXPECT_NEAR(spearman_rho(run1, run2), 0.9, 1e-9);
}

ReleaseHistory two_release_history(double factor) {
  // factor scales every f1 from release one to release two
  ReleaseHistory history;
  SummaryTable old_table = table_from({{"p", {{"d1", 0.5}, {"d2", 0.8}, {"d3", 0.4}}}});
  SummaryTable new_table = table_from({{"p",
                                        {{"d1", 0.5 * factor},
                                         {"d2", 0.8 * factor},
                                         {"d3", 0.4 * factor}}}});
  history[SemVer::parse("0.1.0")] = old_table;
  history[SemVer::parse("0.2.0")] = new_table;
  return history;
}

TEST(Shifts, IdenticalReleasesAreUnflagged) {
  const auto reports = detect_shifts(two_release_history(1.0));
  ASSERT_EQ(reports.size(), 1u);
  EXPECT_DOUBLE_EQ(reports[0].mu, 0.0);
  EXPECT_DOUBLE_EQ(reports[0].delta, 0.0);
  EXPECT_FALSE(reports[0].flagged);
}

TEST(Shifts, UniformThreePercentDropIsFlagged) {
  const auto reports = detect_shifts(two_release_history(0.97));
  ASSERT_EQ(reports.size(), 1u);
  EXPECT_NEAR(reports[0].mu, -3.0, 1e-9);
  EXPECT_NEAR(reports[0].delta, 0.0, 1e-9);
  EXPECT_TRUE(reports[0].flagged);
}

TEST(Shifts, DispersionAloneCanFlag) {
  ReleaseHistory history;
  history[SemVer::parse("1.0.0")] =
      table_from({{"p", {{"d1", 1.0}, {"d2", 1.0}, {"d3", 1.0}}}});
  history[SemVer::parse("1.1.0")] =
      table_from({{"p", {{"d1", 1.01}, {"d2", 1.05}, {"d3", 0.96}}}});
  const auto reports = detect_shifts(history);
  ASSERT_EQ(reports.size(), 1u);
  // changes {+1, +5, -4}: mu = 2/3, population std ~ 3.68
  EXPECT_NEAR(reports[0].mu, 2.0 / 3.0, 1e-9);
  EXPECT_NEAR(reports[0].delta, std::sqrt((1 - 2.0 / 3) * (1 - 2.0 / 3) +
                                          (5 - 2.0 / 3) * (5 - 2.0 / 3) +
                                          (-4 - 2.0 / 3) * (-4 - 2.0 / 3)) /
                                    std::sqrt(3.0),
              1e-9);
  EXPECT_GE(reports[0].delta, 2.0);
  EXPECT_TRUE(reports[0].flagged);
  EXPECT_LT(std::abs(reports[0].mu), 1.0);  // flagged through delta only
}

TEST(Shifts, ZeroBaselineDatasetsAreSkipped) {
  ReleaseHistory history;
  history[SemVer::parse("1.0.0")] = table_from({{"p", {{"d1", 0.0}, {"d2", 0.5}}}});
  history[SemVer::parse("1.1.0")] = table_from({{"p", {{"d1", 0.4}, {"d2", 0.5}}}});
  const auto reports = detect_shifts(history);
  ASSERT_EQ(reports.size(), 1u);
  EXPECT_EQ(reports[0].skipped, 1);
  EXPECT_EQ(reports[0].used, 1);
  EXPECT_FALSE(reports[0].flagged);
}

TEST(Shifts, DisjointDatasetsAreRejected) {
  ReleaseHistory history;
  history[SemVer::parse("1.0.0")] = table_from({{"p", {{"d1", 0.5}}}});
  history[SemVer::parse("1.1.0")] = table_from({{"p", {{"other", 0.5}}}});
  try {
    detect_shifts(history);
    FAIL() << "expected NoCommonDatasets";
  } catch (const BenchError& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoCommonDatasets);
  }
}

TEST(History, AddLoadsBackAndRejectsDuplicates) {
  TempDir dir;
  const SummaryTable table = table_from({{"p", {{"d", 0.5}}}});
  history_add(dir.path(), "0.1.0", table);
  const ReleaseHistory history = load_release_history(dir.path());
  ASSERT_EQ(history.size(), 1u);
  EXPECT_NEAR(*history.begin()->second.find("p", "d")->f1, 0.5, 1e-12);

  try {
    history_add(dir.path(), "0.1.0", table);
    FAIL() << "expected DuplicateVersion";
  } catch (const BenchError& e) {
    EXPECT_EQ(e.code(), ErrorCode::DuplicateVersion);
  }
  try {
    history_add(dir.path(), "not-a-version", table);
    FAIL() << "expected BadVersionString";
  } catch (const BenchError& e) {
    EXPECT_EQ(e.code(), ErrorCode::BadVersionString);
  }
}

TEST(History, SemanticVersionOrdering) {
  TempDir dir;
  const SummaryTable table = table_from({{"p", {{"d", 0.5}}}});
  history_add(dir.path(), "0.2.0", table);
  history_add(dir.path(), "0.10.0", table);
  const ReleaseHistory history = load_release_history(dir.path());
  ASSERT_EQ(history.size(), 2u);
  EXPECT_EQ(history.rbegin()->first.str(), "0.10.0");  // numeric, not lexical
}

TEST(History, RankVectorsRestrictToCommonPipelines) {
  ReleaseHistory history;
  history[SemVer::parse("1.0.0")] = table_from(
      {{"base", {{"d", 0.1}}}, {"a", {{"d", 0.9}}}, {"b", {{"d", 0.5}}}});
  history[SemVer::parse("1.1.0")] = table_from(
      {{"base", {{"d", 0.1}}}, {"a", {{"d", 0.5}}}, {"b", {{"d", 0.9}}}, {"new", {{"d", 1.0}}}});
  std::vector<std::string> order;
  const auto vectors = history_rank_vectors(history, "base", &order);
  ASSERT_EQ(vectors.size(), 2u);
  ASSERT_EQ(order.size(), 3u);  // "new" is not in every release
  for (const auto& [version, ranks] : vectors) EXPECT_EQ(ranks.size(), 3u);
}

TEST(RuntimeReport, BucketsByLengthDecadeAndWarnsOnBadTimings) {
  std::vector<ExperimentRecord> records(2);
  records[0].pipeline = "p";
  records[0].dataset = "d";
  records[0].signal = "short";
  records[0].signal_length = 100;
  records[0].elapsed = 2.0;
  records[1].pipeline = "p";
  records[1].dataset = "d";
  records[1].signal = "long";
  records[1].signal_length = 10000;
  records[1].elapsed = 4.0;

  std::vector<TimingRow> timings = {{"d", "p", "short", 0, "stage_a", 1.5},
                                    {"d", "p", "short", 0, "stage_b", 1.0}};  // sums over elapsed
  const RuntimeReport report = runtime_report(records, timings);
  ASSERT_EQ(report.buckets.size(), 2u);
  EXPECT_EQ(report.buckets[0].bucket, 100);
  EXPECT_EQ(report.buckets[1].bucket, 10000);
  EXPECT_DOUBLE_EQ(report.buckets[0].mean_elapsed, 2.0);
  ASSERT_EQ(report.warnings.size(), 1u);

  // single record reports its own elapsed
  const RuntimeReport single = runtime_report({records[0]}, {});
  ASSERT_EQ(single.buckets.size(), 1u);
  EXPECT_DOUBLE_EQ(single.buckets[0].mean_elapsed, 2.0);
  EXPECT_TRUE(single.warnings.empty());
}

}  // namespace

namespace {

TEST(RunBenchmark, PreSplitDatasetsTrainAndDetectOnSeparateFiles) {
  TempDir tmp;
  // train: clean carrier; test: carrier with one spike
  SyntheticConfig clean;
  clean.length = 900;
  clean.period = 60;
  clean.noise_sigma = 0.02;
  clean.seed = 41;
  const auto train = generate_synthetic(clean);
  SyntheticConfig spiked = clean;
  spiked.seed = 42;
  AnomalySpec burst;
  burst.kind = AnomalyKind::NoiseBurst;
  burst.position = 440;
  burst.width = 30;
  burst.magnitude = 0.8;
  spiked.anomalies = {burst};
  const auto test = generate_synthetic(spiked);

  namespace dd = tsadbench::data_detail;
  dd::write_signal_csv(tmp.path() / "corpus" / "train" / "sig.csv", train.series);
  dd::write_signal_csv(tmp.path() / "corpus" / "test" / "sig.csv", test.series);
  {
    std::ofstream truth(tmp.path() / "corpus" / "truth.csv");
    truth << "signal,start,end\nsig,440,469\n";
    std::ofstream reg(tmp.path() / "datasets.json");
    reg << R"({"schema": 1, "datasets": [{"name": "split", "source": "local:corpus",
               "truth_file": "corpus/truth.csv", "train_test_split": "pre_split",
               "signals": ["sig"]}]})";
  }

  PrimitiveRegistry registry = builtin_registry();
  DataRepository data = DataRepository::load(tmp.path() / "datasets.json");
  BenchmarkEnv env;
  env.registry = &registry;
  env.data = &data;
  env.pipelines["arima_like"] =
      load_pipeline_spec(read_file(kRepoDir / "pipelines/verified/arima_like.json"), registry);

  BenchmarkConfig config;
  config.pipelines = {"arima_like"};
  config.datasets = {"split"};
  config.iterations = 1;
  config.seed = 3;
  const RunOutput out = run_benchmark(env, config);
  ASSERT_EQ(out.records.size(), 1u);
  EXPECT_EQ(out.records[0].status, RunStatus::Ok);
  EXPECT_EQ(out.records[0].tp.value_or(0), 1);
  EXPECT_EQ(out.records[0].fn.value_or(-1), 0);
}

}  // namespace
