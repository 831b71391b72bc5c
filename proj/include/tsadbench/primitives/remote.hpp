#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tsadbench/http.hpp"
#include <json.hpp>

#include "tsadbench/errors.hpp"
#include "tsadbench/time_series.hpp"

namespace tsadbench {

// Generic HTTP detector: the series is POSTed as JSON and the service
// answers with a list of intervals. Stands in for hosted black-box
// detectors that cannot run locally.
struct RemoteDetectorConfig {
  std::string endpoint;  // e.g. http://host:port/detect
  double timeout_seconds = 10.0;
  std::int64_t retries = 3;
  std::string auth_token;

  void validate() const {
    if (endpoint.empty()) throw BenchError(ErrorCode::ConfigError, "remote detector endpoint is empty");
    if (!(timeout_seconds > 0.0)) throw BenchError(ErrorCode::ConfigError, "timeout must be positive");
    if (retries < 0 || retries > 5)
      throw BenchError(ErrorCode::ConfigError, "retries must lie in [0, 5]");
  }
};

namespace remote_detail {

struct SplitUrl {
  std::string host_port;  // scheme://host[:port]
  std::string path;
};

inline SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos)
    throw BenchError(ErrorCode::ConfigError, "endpoint must include a scheme: '" + url + "'");
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

inline std::vector<AnomalyInterval> parse_intervals(const std::string& body) {
  const nlohmann::json doc = nlohmann::json::parse(body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("intervals") ||
      !doc.at("intervals").is_array())
    throw BenchError(ErrorCode::BadResponse, "response is not {\"intervals\": [...]}");

  std::vector<AnomalyInterval> intervals;
  for (const auto& item : doc.at("intervals")) {
    if (!item.is_object() || !item.contains("start") || !item.contains("end") ||
        !item.at("start").is_number_integer() || !item.at("end").is_number_integer())
      throw BenchError(ErrorCode::BadResponse, "interval entries need integer start/end");
    const auto start = item.at("start").get<Timestamp>();
    const auto end = item.at("end").get<Timestamp>();
    if (start > end) throw BenchError(ErrorCode::BadResponse, "interval start exceeds end");
    AnomalyInterval interval(start, end);
    if (item.contains("severity")) {
      if (!item.at("severity").is_number())
        throw BenchError(ErrorCode::BadResponse, "severity must be numeric");
      interval.severity = item.at("severity").get<double>();
    }
    intervals.push_back(interval);
  }
  std::sort(intervals.begin(), intervals.end(),
            [](const AnomalyInterval& a, const AnomalyInterval& b) { return a.start < b.start; });
  validate_intervals(intervals);
  return intervals;
}

}  // namespace remote_detail

inline std::vector<AnomalyInterval> remote_detect(const RemoteDetectorConfig& config,
                                                  const TimeSeries& series) {
  config.validate();
  if (series.empty()) throw BenchError(ErrorCode::SeriesTooShort, "cannot send an empty series");
  if (series.channels() != 1)
    throw BenchError(ErrorCode::ShapeMismatch, "remote detector accepts univariate series only");

  nlohmann::json payload;
  payload["timestamps"] = series.timestamps();
  payload["values"] = series.channel(0);
  const std::string body = payload.dump();

  const auto url = remote_detail::split_url(config.endpoint);
  httplib::Client client(url.host_port);
  const auto timeout_us = static_cast<time_t>(config.timeout_seconds * 1e6);
  client.set_connection_timeout(0, timeout_us);
  client.set_read_timeout(0, timeout_us);
  client.set_write_timeout(0, timeout_us);

  httplib::Headers headers;
  if (!config.auth_token.empty()) headers.emplace("Authorization", "Bearer " + config.auth_token);

  std::string last_error;
  for (std::int64_t attempt = 0; attempt <= config.retries; ++attempt) {
    auto response = client.Post(url.path, headers, body, "application/json");
    if (!response) {
      last_error = httplib::to_string(response.error());
      continue;  // transport failure: retry
    }
    if (response->status != 200)
      throw BenchError(ErrorCode::HttpStatus,
                       "endpoint returned status " + std::to_string(response->status));
    return remote_detail::parse_intervals(response->body);
  }
  throw BenchError(ErrorCode::Timeout, "no response after " + std::to_string(config.retries + 1) +
                                           " attempts (" + last_error + ")");
}

}  // namespace tsadbench
