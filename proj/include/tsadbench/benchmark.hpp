#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "tsadbench/csv.hpp"
#include "tsadbench/data.hpp"
#include "tsadbench/engine.hpp"
#include "tsadbench/errors.hpp"
#include "tsadbench/evaluation.hpp"
#include "tsadbench/registry.hpp"

namespace tsadbench {

enum class RunStatus { Ok, Error };

// One row of the detailed result sheet: a single pipeline evaluated on a
// single signal for one iteration. Score fields stay empty when the
// experiment failed. `signal_length` and `error_message` are in-memory
// companions that never reach the CSV.
struct ExperimentRecord {
  std::string dataset;
  std::string pipeline;
  std::string signal;
  std::int64_t iteration = 0;
  std::optional<double> f1;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<std::int64_t> tn;
  std::optional<std::int64_t> fp;
  std::optional<std::int64_t> fn;
  std::optional<std::int64_t> tp;
  RunStatus status = RunStatus::Ok;
  double elapsed = 0.0;
  std::string run_id;

  std::int64_t signal_length = 0;
  std::string error_message;
};

struct TimingRow {
  std::string dataset;
  std::string pipeline;
  std::string signal;
  std::int64_t iteration = 0;
  std::string primitive;
  double seconds = 0.0;
};

struct BenchmarkEnv {
  const PrimitiveRegistry* registry = nullptr;
  std::map<std::string, PipelineSpec> pipelines;
  const DataRepository* data = nullptr;
};

struct BenchmarkConfig {
  std::vector<std::string> pipelines;
  std::vector<std::string> datasets;
  MetricMethod method = MetricMethod::Overlapping;
  std::int64_t iterations = 5;
  std::uint64_t seed = 0;
  int workers = 1;
  bool reproducible = false;
};

struct RunOutput {
  std::vector<ExperimentRecord> records;
  std::vector<TimingRow> timings;
};

inline std::string uuid4() {
  std::random_device device;
  std::uint64_t hi = (static_cast<std::uint64_t>(device()) << 32) | device();
  std::uint64_t lo = (static_cast<std::uint64_t>(device()) << 32) | device();
  hi = (hi & 0xffffffffffff0fffULL) | 0x0000000000004000ULL;  // version 4
  lo = (lo & 0x3fffffffffffffffULL) | 0x8000000000000000ULL;  // variant 1
  char buffer[37];
  std::snprintf(buffer, sizeof(buffer), "%08x-%04x-%04x-%04x-%012llx",
                static_cast<unsigned>(hi >> 32), static_cast<unsigned>((hi >> 16) & 0xffff),
                static_cast<unsigned>(hi & 0xffff), static_cast<unsigned>(lo >> 48),
                static_cast<unsigned long long>(lo & 0xffffffffffffULL));
  return buffer;
}

inline constexpr const char* kNilUuid = "00000000-0000-0000-0000-000000000000";

namespace bench_detail {

struct Task {
  std::string pipeline;
  std::string dataset;
  std::string signal;
  std::int64_t iteration;
};

inline std::vector<AnomalyInterval> clip_to_domain(const std::vector<AnomalyInterval>& intervals,
                                                   Timestamp lo, Timestamp hi) {
  std::vector<AnomalyInterval> out;
  for (auto iv : intervals) {
    iv.start = std::max(iv.start, lo);
    iv.end = std::min(iv.end, hi);
    if (iv.start <= iv.end) out.push_back(iv);
  }
  return out;
}

inline void run_single(const BenchmarkEnv& env, const BenchmarkConfig& config, const Task& task,
                       const std::vector<AnomalyInterval>& truth, ExperimentRecord& record,
                       std::vector<TimingRow>& timings) {
  record.dataset = task.dataset;
  record.pipeline = task.pipeline;
  record.signal = task.signal;
  record.iteration = task.iteration;
  record.run_id = config.reproducible ? kNilUuid : uuid4();

  const PipelineSpec& pipeline = env.pipelines.at(task.pipeline);
  const DatasetDescriptor& dataset = env.data->dataset(task.dataset);
  const bool pre_split = dataset.split == TrainTestSplit::PreSplit;

  auto started = std::chrono::steady_clock::now();
  try {
    const TimeSeries train = env.data->load_signal(
        task.dataset, task.signal, pre_split ? SignalRole::Train : SignalRole::Full);
    const TimeSeries test = pre_split
                                ? env.data->load_signal(task.dataset, task.signal, SignalRole::Test)
                                : train;
    record.signal_length = test.length();

    const std::uint64_t seed = mix_seed(config.seed, task.pipeline, task.dataset, task.signal,
                                        static_cast<std::uint64_t>(task.iteration));

    // elapsed covers training plus inference, not file loading
    started = std::chrono::steady_clock::now();
    std::vector<PrimitiveTiming> fit_timings;
    const FittedPipeline fitted = fit(pipeline, *env.registry, train, seed, &fit_timings);
    const DetectResult detection = detect(fitted, *env.registry, test);
    record.elapsed = engine_detail::seconds_since(started);

    std::map<std::string, double> per_primitive;
    for (const auto& t : fit_timings) per_primitive[t.primitive] += t.seconds;
    for (const auto& t : detection.timings) per_primitive[t.primitive] += t.seconds;
    for (const std::string& name : pipeline.primitives) {
      auto it = per_primitive.find(name);
      if (it == per_primitive.end()) continue;
      timings.push_back({task.dataset, task.pipeline, task.signal, task.iteration, name, it->second});
      per_primitive.erase(it);
    }

    const Timestamp lo = test.first_timestamp();
    const Timestamp hi = test.last_timestamp();
    const auto truth_clipped = clip_to_domain(truth, lo, hi);
    ConfusionCounts counts;
    if (config.method == MetricMethod::Overlapping)
      counts = overlapping_segment_counts(detection.intervals, truth_clipped, lo, hi);
    else
      counts = weighted_segment_counts(detection.intervals, truth_clipped, lo, hi, test.step());

    record.tp = counts.tp;
    record.fp = counts.fp;
    record.fn = counts.fn;
    record.tn = counts.tn;
    const Scores scores = dataset_scores({counts});
    record.f1 = scores.f1;
    record.precision = scores.precision;
    record.recall = scores.recall;
    record.status = RunStatus::Ok;
  } catch (const std::exception& e) {
    record.status = RunStatus::Error;
    record.error_message = e.what();
    record.elapsed = engine_detail::seconds_since(started);
    record.f1.reset();
    record.precision.reset();
    record.recall.reset();
    record.tp.reset();
    record.fp.reset();
    record.fn.reset();
    record.tn.reset();
  }
  if (config.reproducible) {
    record.elapsed = 0.0;
    for (auto& t : timings) t.seconds = 0.0;
  }
}

}  // namespace bench_detail

// Runs the full cartesian product of pipelines x signals x iterations.
// Experiment failures become status=ERROR rows instead of aborting the run;
// only unknown pipeline or dataset names are configuration errors. Output
// order and content (minus elapsed/run_id) depend only on (specs, data,
// seed), never on the worker count.
inline RunOutput run_benchmark(const BenchmarkEnv& env, const BenchmarkConfig& config) {
  if (config.iterations < 1) throw BenchError(ErrorCode::ConfigError, "iterations must be >= 1");
  if (config.workers < 1) throw BenchError(ErrorCode::ConfigError, "workers must be >= 1");
  if (!env.registry || !env.data) throw BenchError(ErrorCode::ConfigError, "benchmark env incomplete");

  for (const std::string& name : config.pipelines)
    if (!env.pipelines.count(name))
      throw BenchError(ErrorCode::ConfigError, "unknown pipeline '" + name + "'");

  std::map<std::string, GroundTruth> truths;
  for (const std::string& name : config.datasets) {
    env.data->dataset(name);  // NotRegistered propagates as-is
    truths[name] = env.data->load_ground_truth(name);
  }

  std::vector<bench_detail::Task> tasks;
  for (const std::string& pipeline : config.pipelines)
    for (const std::string& dataset : config.datasets)
      for (const std::string& signal : env.data->dataset(dataset).signals)
        for (std::int64_t iteration = 0; iteration < config.iterations; ++iteration)
          tasks.push_back({pipeline, dataset, signal, iteration});

  std::vector<ExperimentRecord> records(tasks.size());
  std::vector<std::vector<TimingRow>> timing_slots(tasks.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const auto& task = tasks[i];
      const auto& truth = truths.at(task.dataset).at(task.signal);
      bench_detail::run_single(env, config, task, truth, records[i], timing_slots[i]);
    }
  };

  const auto thread_count = std::min<std::size_t>(static_cast<std::size_t>(config.workers), tasks.size());
  if (thread_count <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < thread_count; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  RunOutput out;
  out.records = std::move(records);
  std::sort(out.records.begin(), out.records.end(),
            [](const ExperimentRecord& a, const ExperimentRecord& b) {
              return std::tie(a.pipeline, a.dataset, a.signal, a.iteration) <
                     std::tie(b.pipeline, b.dataset, b.signal, b.iteration);
            });
  std::sort(timing_slots.begin(), timing_slots.end(),
            [](const std::vector<TimingRow>& a, const std::vector<TimingRow>& b) {
              if (a.empty() || b.empty()) return b.empty() < a.empty();
              return std::tie(a[0].pipeline, a[0].dataset, a[0].signal, a[0].iteration) <
                     std::tie(b[0].pipeline, b[0].dataset, b[0].signal, b[0].iteration);
            });
  for (auto& slot : timing_slots)
    out.timings.insert(out.timings.end(), slot.begin(), slot.end());
  return out;
}

// ---------------------------------------------------------------------------
// Detailed sheet CSV

inline constexpr const char* kRecordHeader =
    "dataset,pipeline,signal,iteration,f1,precision,recall,tn,fp,fn,tp,status,elapsed,run_id";

namespace bench_detail {

inline std::string opt_double(const std::optional<double>& v) {
  return v ? csv::format_double(*v) : std::string();
}

inline std::string opt_int(const std::optional<std::int64_t>& v) {
  return v ? std::to_string(*v) : std::string();
}

}  // namespace bench_detail

inline void write_records_csv(const std::filesystem::path& path,
                              const std::vector<ExperimentRecord>& records) {
  std::ofstream out(path);
  if (!out) throw BenchError(ErrorCode::ConfigError, "cannot write '" + path.string() + "'");
  out << kRecordHeader << "\n";
  for (const auto& r : records) {
    out << r.dataset << ',' << r.pipeline << ',' << r.signal << ',' << r.iteration << ','
        << bench_detail::opt_double(r.f1) << ',' << bench_detail::opt_double(r.precision) << ','
        << bench_detail::opt_double(r.recall) << ',' << bench_detail::opt_int(r.tn) << ','
        << bench_detail::opt_int(r.fp) << ',' << bench_detail::opt_int(r.fn) << ','
        << bench_detail::opt_int(r.tp) << ',' << (r.status == RunStatus::Ok ? "OK" : "ERROR") << ','
        << csv::format_double(r.elapsed) << ',' << r.run_id << "\n";
  }
}

inline std::vector<ExperimentRecord> read_records_csv(const std::filesystem::path& path) {
  const auto rows = csv::read_file(path.string());
  if (rows.empty() || rows[0] != csv::split_line(kRecordHeader))
    throw BenchError(ErrorCode::ParseError,
                     path.string() + ": header does not match the detailed sheet schema");
  std::vector<ExperimentRecord> records;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    const std::string where = path.string() + " line " + std::to_string(i + 1);
    if (row.size() != 14) throw BenchError(ErrorCode::ParseError, where + ": expected 14 fields");
    ExperimentRecord r;
    r.dataset = row[0];
    r.pipeline = row[1];
    r.signal = row[2];
    r.iteration = csv::parse_int(row[3], where);
    auto opt_d = [&](const std::string& f) -> std::optional<double> {
      if (f.empty()) return std::nullopt;
      return csv::parse_double(f, where);
    };
    auto opt_i = [&](const std::string& f) -> std::optional<std::int64_t> {
      if (f.empty()) return std::nullopt;
      return csv::parse_int(f, where);
    };
    r.f1 = opt_d(row[4]);
    r.precision = opt_d(row[5]);
    r.recall = opt_d(row[6]);
    r.tn = opt_i(row[7]);
    r.fp = opt_i(row[8]);
    r.fn = opt_i(row[9]);
    r.tp = opt_i(row[10]);
    if (row[11] == "OK")
      r.status = RunStatus::Ok;
    else if (row[11] == "ERROR")
      r.status = RunStatus::Error;
    else
      throw BenchError(ErrorCode::ParseError, where + ": status must be OK or ERROR");
    r.elapsed = row[12].empty() ? 0.0 : csv::parse_double(row[12], where);
    r.run_id = row[13];
    records.push_back(std::move(r));
  }
  return records;
}

inline void write_timings_csv(const std::filesystem::path& path, const std::vector<TimingRow>& rows) {
  std::ofstream out(path);
  if (!out) throw BenchError(ErrorCode::ConfigError, "cannot write '" + path.string() + "'");
  out << "dataset,pipeline,signal,iteration,primitive,seconds\n";
  for (const auto& r : rows)
    out << r.dataset << ',' << r.pipeline << ',' << r.signal << ',' << r.iteration << ','
        << r.primitive << ',' << csv::format_double(r.seconds) << "\n";
}

// ---------------------------------------------------------------------------
// Summaries

struct SummaryCell {
  std::optional<double> f1;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> elapsed;
  bool failed = false;  // every record of the cell errored
};

// (pipeline, dataset) -> median-over-iterations pooled scores.
struct SummaryTable {
  std::map<std::string, std::map<std::string, SummaryCell>> cells;

  const SummaryCell* find(const std::string& pipeline, const std::string& dataset) const {
    auto p = cells.find(pipeline);
    if (p == cells.end()) return nullptr;
    auto d = p->second.find(dataset);
    return d == p->second.end() ? nullptr : &d->second;
  }
};

inline std::optional<double> median(std::vector<double> values) {
  if (values.empty()) return std::nullopt;
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return 0.5 * (values[mid - 1] + values[mid]);
}

// Per iteration, confusion counts are pooled over a dataset's signals and
// scored; the cell then keeps the median of each score across iterations.
// ERROR records are left out of pooling; a cell whose records all failed is
// marked failed explicitly.
inline SummaryTable summarize(const std::vector<ExperimentRecord>& records) {
  if (records.empty()) throw BenchError(ErrorCode::ConfigError, "no records to summarize");

  struct CellData {
    std::map<std::int64_t, std::vector<ConfusionCounts>> per_iteration;
    std::vector<double> elapsed;
    bool any_ok = false;
  };
  std::map<std::pair<std::string, std::string>, CellData> grouped;
  for (const auto& r : records) {
    CellData& cell = grouped[{r.pipeline, r.dataset}];
    if (r.status != RunStatus::Ok) continue;
    cell.any_ok = true;
    ConfusionCounts counts;
    counts.tp = r.tp.value_or(0);
    counts.fp = r.fp.value_or(0);
    counts.fn = r.fn.value_or(0);
    counts.tn = r.tn;
    cell.per_iteration[r.iteration].push_back(counts);
    cell.elapsed.push_back(r.elapsed);
  }

  SummaryTable table;
  for (const auto& [key, cell] : grouped) {
    SummaryCell summary;
    if (!cell.any_ok) {
      summary.failed = true;
    } else {
      std::vector<double> f1s;
      std::vector<double> precisions;
      std::vector<double> recalls;
      for (const auto& [iteration, counts] : cell.per_iteration) {
        const Scores scores = dataset_scores(counts);
        if (scores.f1) f1s.push_back(*scores.f1);
        if (scores.precision) precisions.push_back(*scores.precision);
        if (scores.recall) recalls.push_back(*scores.recall);
      }
      summary.f1 = median(std::move(f1s));
      summary.precision = median(std::move(precisions));
      summary.recall = median(std::move(recalls));
      summary.elapsed = median(cell.elapsed);
    }
    table.cells[key.first][key.second] = summary;
  }
  return table;
}

// ---------------------------------------------------------------------------
// Leaderboard

struct LeaderboardRow {
  std::string pipeline;
  std::int64_t wins = 0;
  double mean_f1 = 0.0;
  std::int64_t rank = 0;
};

// Wins are datasets where a pipeline's F1 strictly beats the baseline's.
// Failed or undefined cells on either side never count as a win. Ties break
// on the mean F1 over the pipeline's defined cells, then on the name.
inline std::vector<LeaderboardRow> leaderboard(const SummaryTable& summary,
                                               const std::string& baseline) {
  auto base_it = summary.cells.find(baseline);
  if (base_it == summary.cells.end())
    throw BenchError(ErrorCode::MissingBaseline, "baseline pipeline '" + baseline + "' not in summary");

  std::vector<LeaderboardRow> rows;
  for (const auto& [pipeline, datasets] : summary.cells) {
    LeaderboardRow row;
    row.pipeline = pipeline;
    double f1_sum = 0.0;
    std::int64_t f1_count = 0;
    for (const auto& [dataset, cell] : datasets) {
      if (cell.f1) {
        f1_sum += *cell.f1;
        ++f1_count;
      }
      auto base_cell = base_it->second.find(dataset);
      if (base_cell == base_it->second.end()) continue;
      if (cell.f1 && base_cell->second.f1 && *cell.f1 > *base_cell->second.f1) ++row.wins;
    }
    row.mean_f1 = f1_count > 0 ? f1_sum / static_cast<double>(f1_count) : 0.0;
    rows.push_back(std::move(row));
  }

  std::sort(rows.begin(), rows.end(), [](const LeaderboardRow& a, const LeaderboardRow& b) {
    if (a.wins != b.wins) return a.wins > b.wins;
    if (a.mean_f1 != b.mean_f1) return a.mean_f1 > b.mean_f1;
    return a.pipeline < b.pipeline;
  });
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].rank = static_cast<std::int64_t>(i) + 1;
  return rows;
}

inline void write_leaderboard_csv(const std::filesystem::path& path,
                                  const std::vector<LeaderboardRow>& rows) {
  std::ofstream out(path);
  if (!out) throw BenchError(ErrorCode::ConfigError, "cannot write '" + path.string() + "'");
  out << "pipeline,wins,rank\n";
  for (const auto& r : rows) out << r.pipeline << ',' << r.wins << ',' << r.rank << "\n";
}

// ---------------------------------------------------------------------------
// Rank stability

inline double spearman_rho(const std::vector<std::int64_t>& ranks_a,
                           const std::vector<std::int64_t>& ranks_b) {
  if (ranks_a.size() != ranks_b.size())
    throw BenchError(ErrorCode::LengthMismatch, "rank vectors differ in length");
  const auto n = static_cast<std::int64_t>(ranks_a.size());
  if (n < 2) throw BenchError(ErrorCode::LengthMismatch, "need at least two ranks");
  for (const auto* ranks : {&ranks_a, &ranks_b}) {
    std::set<std::int64_t> seen(ranks->begin(), ranks->end());
    if (static_cast<std::int64_t>(seen.size()) != n || *seen.begin() != 1 || *seen.rbegin() != n)
      throw BenchError(ErrorCode::NotPermutation, "ranks must be a permutation of 1..n");
  }
  double d2 = 0.0;
  for (std::size_t i = 0; i < ranks_a.size(); ++i) {
    const double d = static_cast<double>(ranks_a[i] - ranks_b[i]);
    d2 += d * d;
  }
  const double nn = static_cast<double>(n);
  return 1.0 - 6.0 * d2 / (nn * (nn * nn - 1.0));
}

// ---------------------------------------------------------------------------
// Release history and shift detection

struct SemVer {
  std::int64_t major = 0;
  std::int64_t minor = 0;
  std::int64_t patch = 0;

  static SemVer parse(const std::string& text) {
    const auto bad = [&]() -> BenchError {
      return BenchError(ErrorCode::BadVersionString, "'" + text + "' is not MAJOR.MINOR.PATCH");
    };
    std::vector<std::string> parts;
    std::string part;
    for (char c : text) {
      if (c == '.') {
        parts.push_back(part);
        part.clear();
      } else {
        part += c;
      }
    }
    parts.push_back(part);
    if (parts.size() != 3) throw bad();
    SemVer v;
    std::int64_t* fields[3] = {&v.major, &v.minor, &v.patch};
    for (int i = 0; i < 3; ++i) {
      if (parts[i].empty() ||
          !std::all_of(parts[i].begin(), parts[i].end(), [](char c) { return c >= '0' && c <= '9'; }))
        throw bad();
      *fields[i] = std::stoll(parts[i]);
    }
    return v;
  }

  std::string str() const {
    return std::to_string(major) + "." + std::to_string(minor) + "." + std::to_string(patch);
  }

  friend bool operator<(const SemVer& a, const SemVer& b) {
    return std::tie(a.major, a.minor, a.patch) < std::tie(b.major, b.minor, b.patch);
  }
  friend bool operator==(const SemVer& a, const SemVer& b) {
    return std::tie(a.major, a.minor, a.patch) == std::tie(b.major, b.minor, b.patch);
  }
};

using ReleaseHistory = std::map<SemVer, SummaryTable>;

inline void write_summary_csv(const std::filesystem::path& path, const SummaryTable& summary) {
  std::ofstream out(path);
  if (!out) throw BenchError(ErrorCode::ConfigError, "cannot write '" + path.string() + "'");
  out << "pipeline,dataset,metric,value\n";
  for (const auto& [pipeline, datasets] : summary.cells) {
    for (const auto& [dataset, cell] : datasets) {
      auto emit = [&](const char* metric, const std::optional<double>& value) {
        out << pipeline << ',' << dataset << ',' << metric << ','
            << (value ? csv::format_double(*value) : std::string()) << "\n";
      };
      emit("f1", cell.f1);
      emit("precision", cell.precision);
      emit("recall", cell.recall);
      emit("elapsed", cell.elapsed);
      out << pipeline << ',' << dataset << ",status," << (cell.failed ? "failed" : "ok") << "\n";
    }
  }
}

inline SummaryTable read_summary_csv(const std::filesystem::path& path) {
  const auto rows = csv::read_file(path.string());
  if (rows.empty() || rows[0] != std::vector<std::string>{"pipeline", "dataset", "metric", "value"})
    throw BenchError(ErrorCode::ParseError, path.string() + ": not a summary CSV");
  SummaryTable table;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    const std::string where = path.string() + " line " + std::to_string(i + 1);
    if (row.size() != 4) throw BenchError(ErrorCode::ParseError, where + ": expected 4 fields");
    SummaryCell& cell = table.cells[row[0]][row[1]];
    const std::string& metric = row[2];
    const std::string& value = row[3];
    if (metric == "status") {
      cell.failed = (value == "failed");
    } else {
      std::optional<double> parsed;
      if (!value.empty()) parsed = csv::parse_double(value, where);
      if (metric == "f1")
        cell.f1 = parsed;
      else if (metric == "precision")
        cell.precision = parsed;
      else if (metric == "recall")
        cell.recall = parsed;
      else if (metric == "elapsed")
        cell.elapsed = parsed;
      else
        throw BenchError(ErrorCode::ParseError, where + ": unknown metric '" + metric + "'");
    }
  }
  return table;
}

inline ReleaseHistory load_release_history(const std::filesystem::path& dir) {
  ReleaseHistory history;
  if (!std::filesystem::exists(dir)) return history;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
    const SemVer version = SemVer::parse(entry.path().stem().string());
    history[version] = read_summary_csv(entry.path());
  }
  return history;
}

inline void history_add(const std::filesystem::path& dir, const std::string& version_text,
                        const SummaryTable& summary) {
  const SemVer version = SemVer::parse(version_text);
  std::filesystem::create_directories(dir);
  const std::filesystem::path path = dir / (version.str() + ".csv");
  if (std::filesystem::exists(path))
    throw BenchError(ErrorCode::DuplicateVersion, "release " + version.str() + " already recorded");
  write_summary_csv(path, summary);
}

struct ShiftReport {
  std::string version_prev;
  std::string version_next;
  std::string pipeline;
  double mu = 0.0;     // mean % F1 change across datasets
  double delta = 0.0;  // population std of the % changes
  bool flagged = false;
  std::int64_t used = 0;
  std::int64_t skipped = 0;  // datasets with F1 = 0 in the older release
};

// Compares each consecutive release pair per pipeline. Percentage changes
// are taken over datasets scored in both releases; a dataset whose old F1 is
// zero cannot yield a percentage and is counted as skipped. A shift is
// flagged when |mu| >= 1 or delta >= 2.
inline std::vector<ShiftReport> detect_shifts(const ReleaseHistory& history) {
  if (history.size() < 2)
    throw BenchError(ErrorCode::ConfigError, "need at least two releases to detect shifts");

  std::vector<ShiftReport> reports;
  auto prev = history.begin();
  for (auto next = std::next(prev); next != history.end(); ++prev, ++next) {
    bool any_common_dataset = false;
    for (const auto& [pipeline, old_datasets] : prev->second.cells) {
      auto new_it = next->second.cells.find(pipeline);
      if (new_it == next->second.cells.end()) continue;

      ShiftReport report;
      report.version_prev = prev->first.str();
      report.version_next = next->first.str();
      report.pipeline = pipeline;

      std::vector<double> changes;
      for (const auto& [dataset, old_cell] : old_datasets) {
        auto new_cell = new_it->second.find(dataset);
        if (new_cell == new_it->second.end()) continue;
        if (!old_cell.f1 || !new_cell->second.f1) continue;
        any_common_dataset = true;
        if (*old_cell.f1 == 0.0) {
          ++report.skipped;
          continue;
        }
        changes.push_back(100.0 * (*new_cell->second.f1 - *old_cell.f1) / *old_cell.f1);
      }
      report.used = static_cast<std::int64_t>(changes.size());
      if (!changes.empty()) {
        double sum = 0.0;
        for (double p : changes) sum += p;
        report.mu = sum / static_cast<double>(changes.size());
        double var = 0.0;
        for (double p : changes) var += (p - report.mu) * (p - report.mu);
        report.delta = std::sqrt(var / static_cast<double>(changes.size()));
        report.flagged = std::abs(report.mu) >= 1.0 || report.delta >= 2.0;
      }
      reports.push_back(std::move(report));
    }
    if (!any_common_dataset)
      throw BenchError(ErrorCode::NoCommonDatasets, "releases " + prev->first.str() + " and " +
                                                        next->first.str() + " share no scored datasets");
  }
  return reports;
}

// Leaderboard-derived rank vectors for the releases in a history, restricted
// to pipelines present in every release so the vectors stay comparable.
inline std::map<SemVer, std::vector<std::int64_t>> history_rank_vectors(
    const ReleaseHistory& history, const std::string& baseline,
    std::vector<std::string>* pipeline_order = nullptr) {
  if (history.empty()) throw BenchError(ErrorCode::ConfigError, "empty release history");

  std::set<std::string> common;
  bool first = true;
  for (const auto& [version, summary] : history) {
    std::set<std::string> names;
    for (const auto& [pipeline, cells] : summary.cells) names.insert(pipeline);
    if (first) {
      common = std::move(names);
      first = false;
    } else {
      std::set<std::string> merged;
      std::set_intersection(common.begin(), common.end(), names.begin(), names.end(),
                            std::inserter(merged, merged.begin()));
      common = std::move(merged);
    }
  }
  if (!common.count(baseline))
    throw BenchError(ErrorCode::MissingBaseline, "baseline '" + baseline + "' missing from a release");

  const std::vector<std::string> order(common.begin(), common.end());
  if (pipeline_order) *pipeline_order = order;

  std::map<SemVer, std::vector<std::int64_t>> out;
  for (const auto& [version, summary] : history) {
    SummaryTable restricted;
    for (const std::string& name : order) restricted.cells[name] = summary.cells.at(name);
    const auto rows = leaderboard(restricted, baseline);
    std::map<std::string, std::int64_t> rank_of;
    for (const auto& row : rows) rank_of[row.pipeline] = row.rank;
    std::vector<std::int64_t> ranks;
    ranks.reserve(order.size());
    for (const std::string& name : order) ranks.push_back(rank_of.at(name));
    out[version] = std::move(ranks);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Runtime report

struct RuntimeBucketRow {
  std::string pipeline;
  std::int64_t bucket = 0;  // smallest power of ten >= signal length
  std::int64_t experiments = 0;
  double mean_elapsed = 0.0;
};

struct RuntimePrimitiveRow {
  std::string pipeline;
  std::string primitive;
  double mean_seconds = 0.0;
};

struct RuntimeReport {
  std::vector<RuntimeBucketRow> buckets;
  std::vector<RuntimePrimitiveRow> primitives;
  std::vector<std::string> warnings;
};

inline std::int64_t length_bucket(std::int64_t length) {
  std::int64_t bucket = 1;
  while (bucket < length) bucket *= 10;
  return bucket;
}

inline RuntimeReport runtime_report(const std::vector<ExperimentRecord>& records,
                                    const std::vector<TimingRow>& timings) {
  if (records.empty()) throw BenchError(ErrorCode::ConfigError, "no records to report on");

  RuntimeReport report;
  std::map<std::pair<std::string, std::int64_t>, std::pair<double, std::int64_t>> buckets;
  for (const auto& r : records) {
    auto& slot = buckets[{r.pipeline, length_bucket(r.signal_length)}];
    slot.first += r.elapsed;
    slot.second += 1;
  }
  for (const auto& [key, slot] : buckets)
    report.buckets.push_back(
        {key.first, key.second, slot.second, slot.first / static_cast<double>(slot.second)});

  std::map<std::pair<std::string, std::string>, std::pair<double, std::int64_t>> primitives;
  std::map<std::tuple<std::string, std::string, std::string, std::int64_t>, double> per_experiment;
  for (const auto& t : timings) {
    auto& slot = primitives[{t.pipeline, t.primitive}];
    slot.first += t.seconds;
    slot.second += 1;
    per_experiment[{t.pipeline, t.dataset, t.signal, t.iteration}] += t.seconds;
  }
  for (const auto& [key, slot] : primitives)
    report.primitives.push_back({key.first, key.second, slot.first / static_cast<double>(slot.second)});

  for (const auto& r : records) {
    auto it = per_experiment.find({r.pipeline, r.dataset, r.signal, r.iteration});
    if (it == per_experiment.end()) continue;
    if (it->second > r.elapsed + 1e-9)
      report.warnings.push_back("primitive timings exceed recorded elapsed for " + r.pipeline + "/" +
                                r.dataset + "/" + r.signal + " iteration " +
                                std::to_string(r.iteration));
  }
  return report;
}

}  // namespace tsadbench
