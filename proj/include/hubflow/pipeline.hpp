#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hubflow/geo.hpp"
#include "hubflow/od.hpp"
#include "hubflow/time.hpp"

namespace hubflow {

// Declarative run configuration (JSON). Relative paths resolve against the
// config file's directory.
struct PipelineConfig {
  std::string probes;
  std::string zones;
  std::string network;
  std::string workspace;

  LonLat hub;
  Geofence fence = Circle{};

  int periods_per_day = 12;
  int tz_offset_min = 480;
  // Empty train_dates means every data date that is not held out.
  std::vector<Date> train_dates;
  std::vector<Date> holdout_dates;

  double alpha = 0.05;
  std::size_t min_samples = 5;
  double accessibility_budget_min = 30.0;
  double reliability_threshold = 0.5;
  CongestionThresholds congestion;
  bool include_degenerate = false;
  double service_extent_q = 0.8;

  PeriodScheme scheme() const;
  // Analysis settings only; input files enter the hash by content.
  nlohmann::json settings_json() const;
};

// Throws IoError for an unreadable file and ConfigError for bad content.
PipelineConfig load_pipeline_config(const std::string& path);
PipelineConfig pipeline_config_from_json(const nlohmann::json& j,
                                         const std::string& base_dir);

struct PipelineSummary {
  std::string config_hash;
  bool reused = false;  // workspace already held an up-to-date bundle
  std::size_t records = 0;
  std::size_t rejects = 0;
  std::size_t tracks = 0;
  std::size_t trips = 0;
  std::size_t hub_events = 0;
  std::vector<std::string> errors;    // analyses that could not be produced
  std::vector<std::string> warnings;

  nlohmann::json to_json() const;
};

// Computes every analysis and writes the bundle into config.workspace,
// manifest last. Missing or invalid inputs throw before anything is written;
// analyses that fail (e.g. a rank-deficient fit) become error entries.
PipelineSummary pipeline_run(const PipelineConfig& config);

inline constexpr const char* kBundleFormat = "hubflow-bundle/1";

}  // namespace hubflow
