#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "tsadbench/http.hpp"
#include <json.hpp>

#include "tsadbench/csv.hpp"
#include "tsadbench/errors.hpp"
#include "tsadbench/hyperparameters.hpp"
#include "tsadbench/primitives/remote.hpp"
#include "tsadbench/rng.hpp"
#include "tsadbench/time_series.hpp"

namespace tsadbench {

enum class TrainTestSplit { PreSplit, SameSignal };

// One registered dataset: where its signal files live (remote URL prefix or
// local path), which signals it holds and where the labels are. Pre-split
// datasets keep their files under train/ and test/ subpaths.
struct DatasetDescriptor {
  std::string name;
  std::vector<std::string> signals;
  std::string source;  // "local:<path>" or "http(s)://<prefix>"
  std::string truth_file;
  TrainTestSplit split = TrainTestSplit::SameSignal;

  bool is_remote() const { return source.rfind("http", 0) == 0; }
  std::string local_root() const {
    constexpr const char* prefix = "local:";
    if (source.rfind(prefix, 0) == 0) return source.substr(6);
    return source;
  }
};

using GroundTruth = std::map<std::string, std::vector<AnomalyInterval>>;

enum class SignalRole { Full, Train, Test };

namespace data_detail {

inline std::string role_relative_path(const DatasetDescriptor& dataset, const std::string& signal,
                                      SignalRole role) {
  if (dataset.split == TrainTestSplit::PreSplit) {
    switch (role) {
      case SignalRole::Train: return "train/" + signal + ".csv";
      case SignalRole::Test: return "test/" + signal + ".csv";
      case SignalRole::Full: break;
    }
    throw BenchError(ErrorCode::ConfigError,
                     "pre-split dataset '" + dataset.name + "' has no combined signal file");
  }
  return signal + ".csv";
}

inline TimeSeries parse_signal_csv(const std::string& path) {
  const auto rows = csv::read_file(path);
  if (rows.empty()) throw BenchError(ErrorCode::ParseError, path + ": empty signal file");
  if (rows[0].empty() || rows[0][0] != "timestamp")
    throw BenchError(ErrorCode::ParseError, path + ": header must start with 'timestamp'");
  const std::size_t channels = rows[0].size() - 1;
  if (channels < 1) throw BenchError(ErrorCode::ParseError, path + ": header declares no channels");

  std::vector<Timestamp> timestamps;
  Matrix values(static_cast<Eigen::Index>(rows.size() - 1), static_cast<Eigen::Index>(channels));
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::string where = path + " line " + std::to_string(r + 1);
    if (row.size() != channels + 1)
      throw BenchError(ErrorCode::ParseError, where + ": expected " + std::to_string(channels + 1) +
                                                  " fields, got " + std::to_string(row.size()));
    const Timestamp ts = csv::parse_int(row[0], where);
    if (!timestamps.empty() && ts <= timestamps.back())
      throw BenchError(ErrorCode::ParseError, where + ": timestamps must be strictly increasing");
    timestamps.push_back(ts);
    for (std::size_t c = 0; c < channels; ++c)
      values(static_cast<Eigen::Index>(r - 1), static_cast<Eigen::Index>(c)) =
          row[c + 1].empty() ? std::numeric_limits<double>::quiet_NaN()
                             : csv::parse_double(row[c + 1], where);
  }
  return TimeSeries(std::move(timestamps), std::move(values));
}

// Serialize for the write side of the cache and the synthetic generator.
inline void write_signal_csv(const std::filesystem::path& path, const TimeSeries& series) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  out << "timestamp";
  if (series.channels() == 1)
    out << ",value";
  else
    for (Eigen::Index c = 0; c < series.channels(); ++c) out << ",value_" << c;
  out << "\n";
  for (Eigen::Index r = 0; r < series.length(); ++r) {
    out << series.timestamps()[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < series.channels(); ++c) {
      out << ',';
      const double v = series.values()(r, c);
      if (!std::isnan(v)) out << csv::format_double(v, 12);
    }
    out << "\n";
  }
}

inline void write_truth_csv(const std::filesystem::path& path, const GroundTruth& truth) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  out << "signal,start,end\n";
  for (const auto& [signal, intervals] : truth)
    for (const auto& iv : intervals) out << signal << ',' << iv.start << ',' << iv.end << "\n";
}

}  // namespace data_detail

// Loads signals and labels for registered datasets. Remote files are fetched
// once into the cache directory and reused afterwards; concurrent fetches of
// the same file serialize on a per-file mutex and land via atomic rename.
class DataRepository {
 public:
  static std::filesystem::path default_cache_root() {
    if (const char* env = std::getenv("TSADBENCH_CACHE")) return env;
    return std::filesystem::path(".cache") / "signals";
  }

  static DataRepository load(const std::filesystem::path& registry_path,
                             std::filesystem::path cache_root = default_cache_root()) {
    std::ifstream in(registry_path);
    if (!in)
      throw BenchError(ErrorCode::ConfigError, "cannot open registry '" + registry_path.string() + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return from_json(buffer.str(), registry_path.parent_path(), std::move(cache_root));
  }

  static DataRepository from_json(const std::string& text, const std::filesystem::path& base_dir,
                                  std::filesystem::path cache_root = default_cache_root()) {
    const Json doc = Json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || doc.value("schema", 0) != 1 ||
        !doc.contains("datasets") || !doc.at("datasets").is_array())
      throw BenchError(ErrorCode::ConfigError, "registry must be {\"schema\": 1, \"datasets\": [...]}");

    DataRepository repo;
    repo.base_dir_ = base_dir;
    repo.cache_root_ = std::move(cache_root);
    for (const Json& entry : doc.at("datasets")) {
      DatasetDescriptor d;
      d.name = entry.at("name").get<std::string>();
      d.source = entry.at("source").get<std::string>();
      d.truth_file = entry.at("truth_file").get<std::string>();
      for (const Json& s : entry.at("signals")) d.signals.push_back(s.get<std::string>());
      const std::string split = entry.value("train_test_split", "same_signal");
      if (split == "pre_split")
        d.split = TrainTestSplit::PreSplit;
      else if (split == "same_signal")
        d.split = TrainTestSplit::SameSignal;
      else
        throw BenchError(ErrorCode::ConfigError, "unknown train_test_split '" + split + "'");
      if (repo.datasets_.count(d.name))
        throw BenchError(ErrorCode::ConfigError, "dataset '" + d.name + "' registered twice");
      repo.datasets_[d.name] = std::move(d);
    }
    return repo;
  }

  const DatasetDescriptor& dataset(const std::string& name) const {
    auto it = datasets_.find(name);
    if (it == datasets_.end())
      throw BenchError(ErrorCode::NotRegistered, "dataset '" + name + "' is not registered");
    return it->second;
  }

  std::vector<std::string> dataset_names() const {
    std::vector<std::string> names;
    for (const auto& [name, d] : datasets_) names.push_back(name);
    return names;
  }

  // "dataset/signal" form used by the CLI and logs.
  TimeSeries load_signal(const std::string& qualified_name, SignalRole role = SignalRole::Full) const {
    const auto slash = qualified_name.find('/');
    if (slash == std::string::npos)
      throw BenchError(ErrorCode::NotRegistered,
                       "signal names are '<dataset>/<signal>', got '" + qualified_name + "'");
    return load_signal(qualified_name.substr(0, slash), qualified_name.substr(slash + 1), role);
  }

  TimeSeries load_signal(const std::string& dataset_name, const std::string& signal,
                         SignalRole role) const {
    const DatasetDescriptor& d = dataset(dataset_name);
    if (std::find(d.signals.begin(), d.signals.end(), signal) == d.signals.end())
      throw BenchError(ErrorCode::NotRegistered,
                       "signal '" + signal + "' is not registered in dataset '" + dataset_name + "'");
    const std::string relative = data_detail::role_relative_path(d, signal, role);
    return data_detail::parse_signal_csv(materialize(d, relative).string());
  }

  GroundTruth load_ground_truth(const std::string& dataset_name) const {
    const DatasetDescriptor& d = dataset(dataset_name);
    const std::filesystem::path path = resolve_path(d.truth_file);
    if (!std::filesystem::exists(path))
      throw BenchError(ErrorCode::ConfigError, "truth file '" + path.string() + "' does not exist");

    GroundTruth truth;
    for (const std::string& signal : d.signals) truth[signal] = {};
    const auto rows = csv::read_file(path.string());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto& row = rows[r];
      if (r == 0 && !row.empty() && row[0] == "signal") continue;  // header optional
      const std::string where = path.string() + " line " + std::to_string(r + 1);
      if (row.size() != 3)
        throw BenchError(ErrorCode::ParseError, where + ": expected signal,start,end");
      const Timestamp start = csv::parse_int(row[1], where);
      const Timestamp end = csv::parse_int(row[2], where);
      if (start > end) throw BenchError(ErrorCode::ParseError, where + ": start exceeds end");
      truth[row[0]].emplace_back(start, end);
    }
    for (auto& [signal, intervals] : truth) {
      std::sort(intervals.begin(), intervals.end(),
                [](const AnomalyInterval& a, const AnomalyInterval& b) { return a.start < b.start; });
      for (std::size_t i = 1; i < intervals.size(); ++i)
        if (intervals[i].start <= intervals[i - 1].end)
          throw BenchError(ErrorCode::OverlapError,
                           "overlapping truth intervals for signal '" + signal + "'");
    }
    return truth;
  }

  // Fetch every signal file of a dataset into the cache (no-op for local
  // sources and for files already cached).
  void fetch_dataset(const std::string& dataset_name) const {
    const DatasetDescriptor& d = dataset(dataset_name);
    if (!d.is_remote()) return;
    for (const std::string& signal : d.signals) {
      if (d.split == TrainTestSplit::PreSplit) {
        materialize(d, data_detail::role_relative_path(d, signal, SignalRole::Train));
        materialize(d, data_detail::role_relative_path(d, signal, SignalRole::Test));
      } else {
        materialize(d, data_detail::role_relative_path(d, signal, SignalRole::Full));
      }
    }
  }

  const std::filesystem::path& cache_root() const { return cache_root_; }

 private:
  std::filesystem::path resolve_path(const std::string& p) const {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir_ / path;
  }

  // Returns a readable local path for the file, downloading it first when the
  // dataset lives behind a URL and the cache has no copy yet.
  std::filesystem::path materialize(const DatasetDescriptor& d, const std::string& relative) const {
    if (!d.is_remote()) {
      const std::filesystem::path local = resolve_path(d.local_root()) / relative;
      if (!std::filesystem::exists(local))
        throw BenchError(ErrorCode::FetchFailed, "signal file '" + local.string() + "' does not exist");
      return local;
    }

    const std::filesystem::path cached = cache_root_ / d.name / relative;
    if (std::filesystem::exists(cached)) return cached;

    std::unique_lock<std::mutex> table_lock(*fetch_table_mutex_);
    std::shared_ptr<std::mutex> file_mutex = fetch_locks_[cached.string()];
    if (!file_mutex) {
      file_mutex = std::make_shared<std::mutex>();
      fetch_locks_[cached.string()] = file_mutex;
    }
    table_lock.unlock();

    std::lock_guard<std::mutex> file_lock(*file_mutex);
    if (std::filesystem::exists(cached)) return cached;  // a racer won

    const std::string url = d.source + "/" + relative;
    const auto split = remote_detail::split_url(url);
    httplib::Client client(split.host_port);
    client.set_follow_location(true);
    auto response = client.Get(split.path);
    if (!response)
      throw BenchError(ErrorCode::FetchFailed,
                       url + ": " + httplib::to_string(response.error()));
    if (response->status != 200)
      throw BenchError(ErrorCode::FetchFailed, url + ": status " + std::to_string(response->status));

    std::filesystem::create_directories(cached.parent_path());
    const std::filesystem::path tmp = cached.string() + ".part";
    {
      std::ofstream out(tmp, std::ios::binary);
      out << response->body;
    }
    std::filesystem::rename(tmp, cached);
    return cached;
  }

  std::filesystem::path base_dir_;
  std::filesystem::path cache_root_;
  std::map<std::string, DatasetDescriptor> datasets_;
  // held behind a pointer so the repository stays movable
  std::shared_ptr<std::mutex> fetch_table_mutex_ = std::make_shared<std::mutex>();
  mutable std::map<std::string, std::shared_ptr<std::mutex>> fetch_locks_;
};

// ---------------------------------------------------------------------------
// Synthetic signals

enum class AnomalyKind { PointSpike, LevelShift, NoiseBurst };

inline AnomalyKind parse_anomaly_kind(const std::string& name) {
  if (name == "point_spike") return AnomalyKind::PointSpike;
  if (name == "level_shift") return AnomalyKind::LevelShift;
  if (name == "noise_burst") return AnomalyKind::NoiseBurst;
  throw BenchError(ErrorCode::ConfigError, "unknown anomaly kind '" + name + "'");
}

struct AnomalySpec {
  AnomalyKind kind = AnomalyKind::PointSpike;
  std::int64_t position = 0;
  double magnitude = 1.0;
  std::int64_t width = 1;
};

struct SyntheticConfig {
  std::int64_t length = 2000;
  double period = 100.0;
  double noise_sigma = 0.0;
  std::vector<AnomalySpec> anomalies;
  std::uint64_t seed = 0;
};

struct SyntheticSignal {
  TimeSeries series;
  std::vector<AnomalyInterval> truth;
};

// Sine carrier plus Gaussian noise plus injected anomalies at unit spacing.
// The returned truth intervals cover exactly the injected samples; overlapping
// injections are rejected rather than silently merged.
inline SyntheticSignal generate_synthetic(const SyntheticConfig& config) {
  if (config.length < 2) throw BenchError(ErrorCode::ConfigError, "length must be >= 2");
  if (!(config.period > 0)) throw BenchError(ErrorCode::ConfigError, "period must be positive");
  if (config.noise_sigma < 0) throw BenchError(ErrorCode::ConfigError, "noise_sigma must be >= 0");

  Rng rng(mix_seed(config.seed, "synthetic"));
  std::vector<Timestamp> timestamps(static_cast<std::size_t>(config.length));
  std::vector<double> values(static_cast<std::size_t>(config.length));
  for (std::int64_t t = 0; t < config.length; ++t) {
    timestamps[static_cast<std::size_t>(t)] = t;
    values[static_cast<std::size_t>(t)] =
        std::sin(2.0 * M_PI * static_cast<double>(t) / config.period) +
        (config.noise_sigma > 0 ? rng.normal(0.0, config.noise_sigma) : 0.0);
  }

  std::vector<AnomalyInterval> truth;
  for (const AnomalySpec& a : config.anomalies) {
    const std::int64_t width = a.kind == AnomalyKind::PointSpike ? 1 : a.width;
    if (width < 1) throw BenchError(ErrorCode::ConfigError, "anomaly width must be >= 1");
    if (a.position < 0 || a.position + width > config.length)
      throw BenchError(ErrorCode::ConfigError, "anomaly does not fit inside the signal");
    const AnomalyInterval interval(a.position, a.position + width - 1);
    for (const auto& existing : truth)
      if (existing.overlaps(interval))
        throw BenchError(ErrorCode::ConfigError, "injected anomalies overlap");

    switch (a.kind) {
      case AnomalyKind::PointSpike:
        values[static_cast<std::size_t>(a.position)] += a.magnitude;
        break;
      case AnomalyKind::LevelShift:
        for (std::int64_t t = 0; t < width; ++t)
          values[static_cast<std::size_t>(a.position + t)] += a.magnitude;
        break;
      case AnomalyKind::NoiseBurst:
        for (std::int64_t t = 0; t < width; ++t)
          values[static_cast<std::size_t>(a.position + t)] += rng.normal(0.0, a.magnitude);
        break;
    }
    truth.push_back(interval);
  }
  std::sort(truth.begin(), truth.end(),
            [](const AnomalyInterval& a, const AnomalyInterval& b) { return a.start < b.start; });

  SyntheticSignal out;
  out.series = TimeSeries::univariate(std::move(timestamps), values);
  out.truth = std::move(truth);
  return out;
}

inline SyntheticConfig parse_synthetic_config(const Json& entry) {
  SyntheticConfig config;
  config.length = entry.value("length", config.length);
  config.period = entry.value("period", config.period);
  config.noise_sigma = entry.value("noise_sigma", config.noise_sigma);
  config.seed = entry.value("seed", config.seed);
  if (entry.contains("anomalies")) {
    for (const Json& a : entry.at("anomalies")) {
      AnomalySpec spec;
      spec.kind = parse_anomaly_kind(a.at("kind").get<std::string>());
      spec.position = a.at("position").get<std::int64_t>();
      spec.magnitude = a.value("magnitude", 1.0);
      spec.width = a.value("width", 1);
      config.anomalies.push_back(spec);
    }
  }
  return config;
}

// Materialize a synthetic dataset on disk: one CSV per signal, a shared
// truth.csv and a ready-to-use registry next to them.
inline void write_synthetic_dataset(const Json& config, const std::filesystem::path& out_dir) {
  if (!config.is_object() || !config.contains("signals") || !config.at("signals").is_array())
    throw BenchError(ErrorCode::ConfigError, "synthetic config must hold a 'signals' array");
  const std::string dataset_name = config.value("name", std::string("synthetic"));

  GroundTruth truth;
  std::vector<std::string> signal_names;
  for (const Json& entry : config.at("signals")) {
    const std::string name = entry.at("name").get<std::string>();
    const SyntheticSignal sig = generate_synthetic(parse_synthetic_config(entry));
    data_detail::write_signal_csv(out_dir / (name + ".csv"), sig.series);
    truth[name] = sig.truth;
    signal_names.push_back(name);
  }
  data_detail::write_truth_csv(out_dir / "truth.csv", truth);

  Json registry;
  registry["schema"] = 1;
  registry["datasets"] = Json::array();
  Json d;
  d["name"] = dataset_name;
  d["source"] = "local:.";
  d["truth_file"] = "truth.csv";
  d["train_test_split"] = "same_signal";
  d["signals"] = signal_names;
  registry["datasets"].push_back(d);
  std::ofstream out(out_dir / "datasets.json");
  out << registry.dump(2) << "\n";
}

}  // namespace tsadbench
