#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "hubflow/geo.hpp"
#include "hubflow/od.hpp"
#include "hubflow/time.hpp"
#include "hubflow/transit.hpp"
#include "hubflow/zones.hpp"

namespace hubflow::synth {

enum class NoiseModel { none, poisson };

struct EventDay {
  Date date;
  double multiplier = 1.0;
};

struct ScenarioConfig {
  std::uint64_t seed = 1;
  Date first_date;
  Date last_date;
  std::vector<Date> missing_dates;
  std::vector<Date> holdout_dates;  // handed to the generated run config
  int periods_per_day = 12;
  int tz_offset_min = 480;
  // Mean vehicles per period, one entry per period.
  std::vector<double> inbound_means;
  std::vector<double> outbound_means;
  NoiseModel noise = NoiseModel::poisson;
  std::vector<EventDay> event_days;
  // zone_id -> share of trips; empty means decaying with hub distance.
  std::map<int, double> zone_weights;
  LonLat hub;
  double geofence_radius_m = 300.0;
  BBox zone_box;
  int zone_cols = 19;
  int zone_rows = 12;
  int bus_routes = 40;

  // Futian-like defaults: 228 zones around the hub, Aug-Oct 2011 and period
  // means shaped like a reference outbound model.
  static ScenarioConfig defaults();

  // Throws ValidationError listing every problem.
  void validate() const;
};

ScenarioConfig scenario_from_json(const nlohmann::json& j);
ScenarioConfig load_scenario(const std::string& path);
nlohmann::json scenario_to_json(const ScenarioConfig& config);

struct FlowTruth {
  Date date;
  int period = 1;
  FlowDirection direction = FlowDirection::inbound;
  double expected = 0.0;
  std::int64_t count = 0;
};

struct ScenarioOutput {
  std::string probe_csv;
  ZoneSet zones;
  BusNetwork network;
  std::vector<Date> generated_dates;
  std::vector<FlowTruth> flow_truth;
  // (pickup zone, dropoff zone) -> trips, for trips with both ends located.
  std::map<std::pair<int, int>, std::int64_t> od_truth;
  std::int64_t unlocated_trips = 0;
  std::size_t record_count = 0;
};

// Deterministic in the seed: same config, same bytes.
ScenarioOutput generate(const ScenarioConfig& config);

// The zone fixture and bus network alone, without probe records.
ZoneSet scenario_zones(const ScenarioConfig& config);
BusNetwork synthetic_network(const ScenarioConfig& config, const ZoneSet& zones);

// Writes probes.csv, zones.geojson, network.json, truth_flows.csv,
// truth_od.csv and run.json (a pipeline config over those files).
void write_scenario(const ScenarioConfig& config, const ScenarioOutput& out,
                    const std::string& directory);

}  // namespace hubflow::synth
