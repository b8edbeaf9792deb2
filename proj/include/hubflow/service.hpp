#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "hubflow/bundle.hpp"
#include "hubflow/od.hpp"
#include "hubflow/stats/regression.hpp"
#include "hubflow/transit.hpp"
#include "hubflow/zones.hpp"

namespace hubflow {

struct Response {
  int status = 200;
  nlohmann::json body;
};

using QueryParams = std::map<std::string, std::string>;

// Read-only view of a bundle. Every artifact listed in the manifest is checked
// against its digest on load; a mismatch means the bundle is stale and it is
// refused. Artifacts absent from the manifest make their endpoints answer 404.
class Service {
 public:
  // Throws FormatError when the workspace holds no readable manifest and
  // Error when an artifact does not match the manifest.
  explicit Service(const std::string& workspace);

  const std::string& config_hash() const { return config_hash_; }

  // Safe to call concurrently.
  Response handle(const std::string& path, const QueryParams& params) const;

 private:
  Response zones(const QueryParams& q) const;
  Response od(const QueryParams& q) const;
  Response flows(const QueryParams& q) const;
  Response forecast(const QueryParams& q) const;
  Response forecast_report(const QueryParams& q) const;
  Response validation(const QueryParams& q) const;
  Response accessibility(const QueryParams& q) const;
  Response reliability(const QueryParams& q) const;
  Response congestion(const QueryParams& q) const;
  Response transfer(const QueryParams& q) const;
  Response service_extent(const QueryParams& q) const;

  struct Direction {
    std::optional<FlowSeries> series;
    std::optional<nlohmann::json> report;  // fit report as stored
    std::optional<stats::RegressionFit> fit;
    std::optional<std::string> fit_error;
  };

  std::string config_hash_;
  nlohmann::json manifest_;
  PeriodScheme scheme_;
  LonLat hub_;
  CongestionThresholds congestion_;
  double default_budget_min_ = 30.0;
  std::size_t default_min_samples_ = 5;
  double default_threshold_ = 0.5;
  double default_q_ = 0.8;
  bool include_degenerate_ = false;
  std::optional<TimeWindow> default_window_;

  std::optional<ZoneSet> zones_;
  std::optional<BusNetwork> network_;
  std::optional<std::vector<Trip>> trips_;            // countable trips
  std::optional<std::vector<Trip>> departing_trips_;  // countable, from the hub
  std::optional<std::vector<SpeedCell>> speeds_;
  std::map<FlowDirection, Direction> directions_;
};

// HTTP front end over a Service. GET only; every response is JSON with a
// permissive CORS header for the dashboard.
class HttpFrontend {
 public:
  explicit HttpFrontend(const Service& service);
  ~HttpFrontend();
  HttpFrontend(const HttpFrontend&) = delete;
  HttpFrontend& operator=(const HttpFrontend&) = delete;

  // Returns the bound port, or -1. Port 0 picks a free one.
  int bind(const std::string& host, int port);
  // Blocks until stop() is called from another thread.
  bool listen();
  void stop();
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Splits "host:port" (port defaults to 8080). Throws ArgumentError.
std::pair<std::string, int> parse_bind_address(const std::string& text);

// Blocks serving on the address. Returns false when it cannot be bound.
bool serve(const Service& service, const std::string& bind_address);

}  // namespace hubflow
