#include "hubflow/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "hubflow/error.hpp"
#include "hubflow/probe.hpp"

namespace hubflow::synth {

using nlohmann::json;

namespace {

// Intercept plus dummy coefficient of a reference outbound model, one per
// period, used as default mean flows in both directions.
const std::vector<double> kDefaultMeans = {
    25.64002, 7.84612,  32.23072,  56.461535, 90.1923,   119.80769,
    123.15384, 136.65384, 152.46154, 143.6923, 106.34615, 54.07692};

struct SpeedBand {
  double lo;
  double hi;
};

constexpr SpeedBand kCongestedBand{8.0, 15.0};
constexpr SpeedBand kSlowBand{15.0, 30.0};
constexpr SpeedBand kFreeBand{30.0, 60.0};
constexpr SpeedBand kHubBand{0.0, 10.0};

double round6(double v) { return std::round(v * 1e6) / 1e6; }

LonLat round6(LonLat p) { return {round6(p.lon), round6(p.lat)}; }

double bearing_deg(const Projection& proj, LonLat from, LonLat to) {
  const PlanePoint a = proj.to_plane(from);
  const PlanePoint b = proj.to_plane(to);
  double deg = std::atan2(b.x - a.x, b.y - a.y) * 180.0 / std::numbers::pi;
  if (deg < 0.0) deg += 360.0;
  deg = std::round(deg * 10.0) / 10.0;
  return deg >= 360.0 ? 0.0 : deg;
}

std::vector<Date> parse_dates(const json& j, const char* key) {
  std::vector<Date> out;
  if (!j.contains(key)) return out;
  for (const auto& d : j.at(key)) out.push_back(parse_date(d.get<std::string>()));
  return out;
}

json dates_json(const std::vector<Date>& dates) {
  json out = json::array();
  for (const auto& d : dates) out.push_back(format_date(d));
  return out;
}

class Generator {
 public:
  explicit Generator(const ScenarioConfig& config)
      : config_(config),
        rng_(config.seed),
        zones_(scenario_zones(config)),
        index_(build_index(zones_)),
        proj_(config.hub),
        fence_(Circle{config.hub, config.geofence_radius_m}),
        scheme_(PeriodScheme::uniform(config.periods_per_day, config.tz_offset_min)) {
    build_zone_tables();
  }

  ScenarioOutput run() {
    ScenarioOutput out;
    out.zones = zones_;
    out.network = synthetic_network(config_, zones_);

    const std::set<Date> missing(config_.missing_dates.begin(),
                                 config_.missing_dates.end());
    for (Date day : date_range(config_.first_date, config_.last_date)) {
      if (missing.count(day)) continue;
      out.generated_dates.push_back(day);
      double multiplier = 1.0;
      for (const auto& e : config_.event_days) {
        if (e.date == day) multiplier *= e.multiplier;
      }
      for (FlowDirection dir : {FlowDirection::inbound, FlowDirection::outbound}) {
        const auto& means = dir == FlowDirection::inbound ? config_.inbound_means
                                                          : config_.outbound_means;
        for (int p = 1; p <= config_.periods_per_day; ++p) {
          const double expected = means[static_cast<std::size_t>(p - 1)] * multiplier;
          const std::int64_t count = draw_count(expected);
          out.flow_truth.push_back({day, p, dir, expected, count});
          const EpochSeconds start = scheme_.period_start(day, p);
          const EpochSeconds end = scheme_.period_end(day, p);
          for (std::int64_t v = 0; v < count; ++v) {
            std::uniform_int_distribution<EpochSeconds> when(start, end - 1);
            const EpochSeconds t = when(rng_);
            if (dir == FlowDirection::inbound) {
              arrival(t, out);
            } else {
              departure(t, out);
            }
          }
        }
      }
    }

    std::stable_sort(records_.begin(), records_.end(),
                     [](const ProbeRecord& a, const ProbeRecord& b) {
                       return a.timestamp < b.timestamp;
                     });
    std::string csv(kProbeCsvHeader);
    csv += '\n';
    for (const auto& r : records_) {
      csv += format_probe_line(r);
      csv += '\n';
    }
    out.probe_csv = std::move(csv);
    out.record_count = records_.size();
    return out;
  }

 private:
  void build_zone_tables() {
    for (const auto& z : zones_.zones()) {
      zone_ids_.push_back(z.zone_id);
      double w = 0.0;
      if (config_.zone_weights.empty()) {
        const double d = proj_.distance_km(config_.hub, zones_.centroid(z.zone_id));
        w = std::exp(-d / 4.0);
      } else if (auto it = config_.zone_weights.find(z.zone_id);
                 it != config_.zone_weights.end()) {
        w = it->second;
      }
      weights_.push_back(w);
    }
    pick_zone_ = std::discrete_distribution<std::size_t>(weights_.begin(),
                                                         weights_.end());
  }

  SpeedBand band_at(LonLat p) const {
    if (geofence_contains(fence_, p)) return kHubBand;
    auto zone = index_.locate(p);
    if (!zone) return kFreeBand;
    const double d = proj_.distance_km(config_.hub, zones_.centroid(*zone));
    if (d < 3.0) return kCongestedBand;
    if (d < 7.0) return kSlowBand;
    return kFreeBand;
  }

  double draw_speed(LonLat p) {
    const SpeedBand b = band_at(p);
    std::uniform_real_distribution<double> u(b.lo, b.hi);
    return std::round(u(rng_) * 10.0) / 10.0;
  }

  std::int64_t draw_count(double expected) {
    if (expected <= 0.0) return 0;
    if (config_.noise == NoiseModel::none) return std::llround(expected);
    std::poisson_distribution<std::int64_t> poisson(expected);
    return poisson(rng_);
  }

  // A rounded point in `zone` outside the geofence that locates back to it.
  LonLat point_in_zone(int zone_id) {
    const TrafficZone* z = zones_.find(zone_id);
    const BBox box = bbox_of(z->ring);
    std::uniform_real_distribution<double> ux(box.min_lon, box.max_lon);
    std::uniform_real_distribution<double> uy(box.min_lat, box.max_lat);
    for (int attempt = 0; attempt < 10000; ++attempt) {
      const LonLat p = round6(LonLat{ux(rng_), uy(rng_)});
      if (index_.locate(p) == zone_id && !geofence_contains(fence_, p)) return p;
    }
    throw Error("cannot place a point in zone " + std::to_string(zone_id) +
                " outside the hub geofence");
  }

  // A rounded point inside the geofence, within half its radius of the hub.
  LonLat point_at_hub() {
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    std::uniform_real_distribution<double> radius(0.0, 0.5 * config_.geofence_radius_m);
    while (true) {
      const double a = angle(rng_);
      const double r = radius(rng_) / 1000.0;
      const LonLat p = round6(proj_.to_lonlat({r * std::sin(a), r * std::cos(a)}));
      if (geofence_contains(fence_, p)) return p;
    }
  }

  std::string next_vehicle() {
    char buf[24];
    std::snprintf(buf, sizeof buf, "B%06llu",
                  static_cast<unsigned long long>(++vehicle_counter_));
    return buf;
  }

  void emit(const std::string& vehicle, EpochSeconds t, LonLat p, double heading,
            bool occupied) {
    records_.push_back({vehicle, t, p, draw_speed(p), heading, occupied,
                        VehicleState::in_service});
  }

  EpochSeconds travel_seconds(LonLat a, LonLat b, LonLat speed_at) {
    const SpeedBand band = band_at(speed_at);
    std::uniform_real_distribution<double> u(band.lo, band.hi);
    const double kmh = std::max(5.0, u(rng_));
    const double km = 1.3 * proj_.distance_km(a, b);
    return std::max<EpochSeconds>(180, std::llround(km / kmh * 3600.0));
  }

  void record_od(LonLat pickup, LonLat dropoff, ScenarioOutput& out) {
    const auto o = index_.locate(pickup);
    const auto d = index_.locate(dropoff);
    if (o && d) {
      ++out.od_truth[{*o, *d}];
    } else {
      ++out.unlocated_trips;
    }
  }

  // Passenger carried from a zone to the hub; the enter event happens at t.
  void arrival(EpochSeconds t, ScenarioOutput& out) {
    const std::string v = next_vehicle();
    const int zone = zone_ids_[pick_zone_(rng_)];
    const LonLat pickup = point_in_zone(zone);
    const LonLat at_hub = point_at_hub();
    const LonLat parked = point_at_hub();
    const EpochSeconds travel = travel_seconds(pickup, at_hub, pickup);
    std::uniform_int_distribution<EpochSeconds> wait(30, 150);
    const double heading = bearing_deg(proj_, pickup, at_hub);

    const EpochSeconds board = t - travel;
    emit(v, board - wait(rng_), pickup, heading, false);
    emit(v, board, pickup, heading, true);
    for (int k = 1; k <= 2; ++k) {
      const double f = k / 3.0;
      const LonLat p = round6(LonLat{pickup.lon + (at_hub.lon - pickup.lon) * f,
                                     pickup.lat + (at_hub.lat - pickup.lat) * f});
      if (geofence_contains(fence_, p)) continue;
      emit(v, board + static_cast<EpochSeconds>(std::llround(travel * f)), p,
           heading, true);
    }
    emit(v, t, at_hub, heading, true);
    emit(v, t + wait(rng_), parked, heading, false);
    record_od(pickup, at_hub, out);
  }

  // Passenger picked up at the hub and carried to a zone; the exit event
  // happens at t.
  void departure(EpochSeconds t, ScenarioOutput& out) {
    const std::string v = next_vehicle();
    const int zone = zone_ids_[pick_zone_(rng_)];
    const LonLat dropoff = point_in_zone(zone);
    const LonLat queued = point_at_hub();
    const LonLat boarded = point_at_hub();

    // Leave the fence along the hub -> dropoff ray.
    const PlanePoint dir = proj_.to_plane(dropoff);
    const double len = std::hypot(dir.x, dir.y);
    std::uniform_real_distribution<double> margin(30.0, 150.0);
    LonLat gate;
    do {
      const double r = (config_.geofence_radius_m + margin(rng_)) / 1000.0;
      gate = round6(proj_.to_lonlat({dir.x / len * r, dir.y / len * r}));
    } while (geofence_contains(fence_, gate));

    const EpochSeconds travel = travel_seconds(gate, dropoff, dropoff);
    std::uniform_int_distribution<EpochSeconds> wait(30, 150);
    const double heading = bearing_deg(proj_, config_.hub, dropoff);

    emit(v, t - 60 - wait(rng_), queued, heading, false);
    emit(v, t - 60, boarded, heading, true);
    emit(v, t, gate, heading, true);
    for (int k = 1; k <= 2; ++k) {
      const double f = k / 3.0;
      const LonLat p = round6(LonLat{gate.lon + (dropoff.lon - gate.lon) * f,
                                     gate.lat + (dropoff.lat - gate.lat) * f});
      if (geofence_contains(fence_, p)) continue;
      emit(v, t + static_cast<EpochSeconds>(std::llround(travel * f)), p,
           heading, true);
    }
    emit(v, t + travel, dropoff, heading, true);
    emit(v, t + travel + wait(rng_), dropoff, heading, false);
    record_od(boarded, dropoff, out);
  }

  const ScenarioConfig& config_;
  std::mt19937_64 rng_;
  ZoneSet zones_;
  ZoneIndex index_;
  Projection proj_;
  Geofence fence_;
  PeriodScheme scheme_;
  std::vector<int> zone_ids_;
  std::vector<double> weights_;
  std::discrete_distribution<std::size_t> pick_zone_;
  std::vector<ProbeRecord> records_;
  std::uint64_t vehicle_counter_ = 0;
};

}  // namespace

ScenarioConfig ScenarioConfig::defaults() {
  ScenarioConfig c;
  c.seed = 20110812;
  c.first_date = parse_date("2011-08-01");
  c.last_date = parse_date("2011-10-31");
  c.inbound_means = kDefaultMeans;
  c.outbound_means = kDefaultMeans;
  c.noise = NoiseModel::poisson;
  c.hub = {114.0275, 22.5370};
  c.zone_box = {113.80, 22.44, 114.40, 22.79};
  return c;
}

void ScenarioConfig::validate() const {
  std::vector<std::string> issues;
  if (last_date < first_date) issues.push_back("last_date precedes first_date");
  if (periods_per_day < 1 || 1440 % periods_per_day != 0) {
    issues.push_back("periods_per_day must divide the day evenly");
  }
  auto check_means = [&](const std::vector<double>& means, const char* name) {
    if (means.size() != static_cast<std::size_t>(periods_per_day)) {
      issues.push_back(std::string(name) + " needs one mean per period");
    }
    for (double m : means) {
      if (!(m >= 0.0) || !std::isfinite(m)) {
        issues.push_back(std::string(name) + " must be finite and non-negative");
        break;
      }
    }
  };
  check_means(inbound_means, "inbound_means");
  check_means(outbound_means, "outbound_means");
  for (const auto& e : event_days) {
    if (!(e.multiplier > 0.0) || !std::isfinite(e.multiplier)) {
      issues.push_back("event day " + format_date(e.date) +
                       " needs a positive multiplier");
    }
  }
  if (!zone_weights.empty()) {
    double sum = 0.0;
    bool negative = false;
    for (const auto& [zone, w] : zone_weights) {
      sum += w;
      negative = negative || !(w >= 0.0);
    }
    if (negative) issues.push_back("zone weights must be non-negative");
    if (std::fabs(sum - 1.0) > 1e-6) issues.push_back("zone weights must sum to 1");
  }
  if (!(geofence_radius_m > 0.0)) issues.push_back("geofence radius must be positive");
  if (zone_cols < 1 || zone_rows < 1) issues.push_back("zone grid needs cells");
  if (!(zone_box.max_lon > zone_box.min_lon) || !(zone_box.max_lat > zone_box.min_lat)) {
    issues.push_back("zone box is empty");
  } else if (!zone_box.contains(hub)) {
    issues.push_back("hub lies outside the zone box");
  }
  if (bus_routes < 0) issues.push_back("bus_routes must be non-negative");
  if (!issues.empty()) throw ValidationError(std::move(issues));
}

ScenarioConfig scenario_from_json(const json& j) {
  ScenarioConfig c = ScenarioConfig::defaults();
  try {
    c.seed = j.value("seed", c.seed);
    if (j.contains("first_date")) c.first_date = parse_date(j.at("first_date").get<std::string>());
    if (j.contains("last_date")) c.last_date = parse_date(j.at("last_date").get<std::string>());
    c.missing_dates = parse_dates(j, "missing_dates");
    c.holdout_dates = parse_dates(j, "holdout_dates");
    c.periods_per_day = j.value("periods_per_day", c.periods_per_day);
    c.tz_offset_min = j.value("tz_offset_min", c.tz_offset_min);
    if (j.contains("inbound_means")) c.inbound_means = j.at("inbound_means").get<std::vector<double>>();
    if (j.contains("outbound_means")) c.outbound_means = j.at("outbound_means").get<std::vector<double>>();
    if (j.contains("noise")) {
      const auto noise = j.at("noise").get<std::string>();
      if (noise == "none") {
        c.noise = NoiseModel::none;
      } else if (noise == "poisson") {
        c.noise = NoiseModel::poisson;
      } else {
        throw ValidationError({"unknown noise model '" + noise + "'"});
      }
    }
    if (j.contains("event_days")) {
      for (const auto& e : j.at("event_days")) {
        c.event_days.push_back({parse_date(e.at("date").get<std::string>()),
                                e.at("multiplier").get<double>()});
      }
    }
    if (j.contains("zone_weights")) {
      for (const auto& [key, w] : j.at("zone_weights").items()) {
        c.zone_weights[std::stoi(key)] = w.get<double>();
      }
    }
    if (j.contains("hub")) {
      c.hub = {j.at("hub").at("lon").get<double>(), j.at("hub").at("lat").get<double>()};
      c.geofence_radius_m = j.at("hub").value("radius_m", c.geofence_radius_m);
    }
    if (j.contains("zone_box")) {
      const auto b = j.at("zone_box").get<std::vector<double>>();
      if (b.size() != 4) throw ValidationError({"zone_box needs [min_lon, min_lat, max_lon, max_lat]"});
      c.zone_box = {b[0], b[1], b[2], b[3]};
    }
    c.zone_cols = j.value("zone_cols", c.zone_cols);
    c.zone_rows = j.value("zone_rows", c.zone_rows);
    c.bus_routes = j.value("bus_routes", c.bus_routes);
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed scenario: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw FormatError("malformed scenario: zone_weights keys must be zone ids");
  }
  c.validate();
  return c;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario file '" + path + "'");
  try {
    return scenario_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw FormatError("scenario file '" + path + "' is not valid JSON: " + e.what());
  }
}

json scenario_to_json(const ScenarioConfig& c) {
  json events = json::array();
  for (const auto& e : c.event_days) {
    events.push_back({{"date", format_date(e.date)}, {"multiplier", e.multiplier}});
  }
  json weights = json::object();
  for (const auto& [zone, w] : c.zone_weights) weights[std::to_string(zone)] = w;
  return {
      {"seed", c.seed},
      {"first_date", format_date(c.first_date)},
      {"last_date", format_date(c.last_date)},
      {"missing_dates", dates_json(c.missing_dates)},
      {"holdout_dates", dates_json(c.holdout_dates)},
      {"periods_per_day", c.periods_per_day},
      {"tz_offset_min", c.tz_offset_min},
      {"inbound_means", c.inbound_means},
      {"outbound_means", c.outbound_means},
      {"noise", c.noise == NoiseModel::none ? "none" : "poisson"},
      {"event_days", events},
      {"zone_weights", weights},
      {"hub", {{"lon", c.hub.lon}, {"lat", c.hub.lat}, {"radius_m", c.geofence_radius_m}}},
      {"zone_box", {c.zone_box.min_lon, c.zone_box.min_lat, c.zone_box.max_lon, c.zone_box.max_lat}},
      {"zone_cols", c.zone_cols},
      {"zone_rows", c.zone_rows},
      {"bus_routes", c.bus_routes},
  };
}

ZoneSet scenario_zones(const ScenarioConfig& config) {
  return make_grid_zones(config.zone_box, config.zone_cols, config.zone_rows);
}

BusNetwork synthetic_network(const ScenarioConfig& config, const ZoneSet& zones) {
  // One station per zone centroid plus the hub; routes wander between
  // neighbouring grid cells, every fourth one starting at the hub.
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<Station> stations;
  stations.push_back({"HUB", "Futian Hub", config.hub});
  for (const auto& z : zones.zones()) {
    char id[16];
    std::snprintf(id, sizeof id, "S%03d", z.zone_id);
    stations.push_back({id, z.name + " stop", zones.centroid(z.zone_id)});
  }
  const int cols = config.zone_cols;
  const int rows = config.zone_rows;
  auto station_of = [&](int c, int r) {
    return stations[static_cast<std::size_t>(r * cols + c + 1)].id;
  };
  const Projection proj(config.hub);
  const auto hub_zone = locate_brute_force(zones, config.hub);

  std::vector<BusRoute> routes;
  std::uniform_int_distribution<int> pick_col(0, cols - 1);
  std::uniform_int_distribution<int> pick_row(0, rows - 1);
  std::uniform_int_distribution<int> pick_len(5, 14);
  std::uniform_int_distribution<int> pick_step(0, 3);
  for (int k = 0; k < config.bus_routes; ++k) {
    BusRoute route;
    char id[16];
    std::snprintf(id, sizeof id, "L%02d", k + 1);
    route.id = id;
    int c = pick_col(rng), r = pick_row(rng);
    if (k % 4 == 0) {
      route.stops.push_back("HUB");
      if (hub_zone) {
        c = (*hub_zone - 1) % cols;
        r = (*hub_zone - 1) / cols;
      }
    }
    std::set<std::string> seen(route.stops.begin(), route.stops.end());
    const int len = pick_len(rng);
    for (int s = 0; s < len; ++s) {
      const std::string id_here = station_of(c, r);
      if (seen.insert(id_here).second) route.stops.push_back(id_here);
      static constexpr int dc[] = {1, -1, 0, 0};
      static constexpr int dr[] = {0, 0, 1, -1};
      const int step = pick_step(rng);
      c = std::clamp(c + dc[step], 0, cols - 1);
      r = std::clamp(r + dr[step], 0, rows - 1);
    }
    if (route.stops.size() < 2) continue;
    routes.push_back(std::move(route));
  }
  return BusNetwork(std::move(stations), std::move(routes));
}

ScenarioOutput generate(const ScenarioConfig& config) {
  config.validate();
  return Generator(config).run();
}

void write_scenario(const ScenarioConfig& config, const ScenarioOutput& out,
                    const std::string& directory) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  auto open = [&](const std::string& name) {
    std::ofstream f(fs::path(directory) / name, std::ios::binary);
    if (!f) throw IoError("cannot write '" + (fs::path(directory) / name).string() + "'");
    return f;
  };
  {
    auto f = open("probes.csv");
    f << out.probe_csv;
  }
  {
    auto f = open("zones.geojson");
    f << zones_to_geojson(out.zones) << '\n';
  }
  {
    auto f = open("network.json");
    f << network_to_json(out.network).dump(1) << '\n';
  }
  {
    auto f = open("truth_flows.csv");
    f << "date,period,direction,expected,count\n";
    for (const auto& t : out.flow_truth) {
      char expected[32];
      std::snprintf(expected, sizeof expected, "%.6f", t.expected);
      f << format_date(t.date) << ',' << t.period << ',' << to_string(t.direction)
        << ',' << expected << ',' << t.count << '\n';
    }
  }
  {
    auto f = open("truth_od.csv");
    f << "origin_zone,dest_zone,count\n";
    for (const auto& [pair, count] : out.od_truth) {
      f << pair.first << ',' << pair.second << ',' << count << '\n';
    }
  }
  {
    const std::set<Date> holdout(config.holdout_dates.begin(), config.holdout_dates.end());
    std::set<Date> events;
    for (const auto& e : config.event_days) events.insert(e.date);
    std::vector<Date> train;
    for (Date d : out.generated_dates) {
      if (!holdout.count(d) && !events.count(d)) train.push_back(d);
    }
    json run = {
        {"probes", "probes.csv"},
        {"zones", "zones.geojson"},
        {"network", "network.json"},
        {"workspace", "workspace"},
        {"hub", {{"lon", config.hub.lon}, {"lat", config.hub.lat}, {"radius_m", config.geofence_radius_m}}},
        {"periods_per_day", config.periods_per_day},
        {"tz_offset_min", config.tz_offset_min},
        {"train_dates", dates_json(train)},
        {"holdout_dates", dates_json(config.holdout_dates)},
    };
    auto f = open("run.json");
    f << run.dump(2) << '\n';
  }
}

}  // namespace hubflow::synth
