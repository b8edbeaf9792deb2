#include "hubflow/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "hubflow/bundle.hpp"
#include "hubflow/error.hpp"
#include "hubflow/probe.hpp"
#include "hubflow/stats/anova.hpp"
#include "hubflow/stats/regression.hpp"
#include "hubflow/stats/report.hpp"
#include "hubflow/transit.hpp"
#include "hubflow/zones.hpp"

namespace hubflow {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(std::string("cannot open ") + what + " '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError(std::string("failed reading ") + what + " '" + path + "'");
  return buf.str();
}

std::vector<Date> dates_from(const json& j, const char* key) {
  std::vector<Date> out;
  if (!j.contains(key)) return out;
  for (const auto& d : j.at(key)) {
    auto parsed = try_parse_date(d.get<std::string>());
    if (!parsed) throw ConfigError(std::string("bad date in ") + key);
    out.push_back(*parsed);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

json dates_json(const std::vector<Date>& dates) {
  json out = json::array();
  for (const auto& d : dates) out.push_back(format_date(d));
  return out;
}

std::string resolve(const std::string& base_dir, const std::string& p) {
  if (p.empty()) return p;
  fs::path path(p);
  if (path.is_absolute() || base_dir.empty()) return path.lexically_normal().string();
  return (fs::path(base_dir) / path).lexically_normal().string();
}

template <typename Fn>
std::string render(Fn&& fn) {
  std::ostringstream out;
  fn(out);
  return out.str();
}

bool bundle_is_current(const fs::path& workspace, const std::string& hash) {
  std::ifstream in(workspace / "manifest.json");
  if (!in) return false;
  try {
    const json manifest = json::parse(in);
    if (manifest.value("config_hash", "") != hash) return false;
    for (const auto& [name, digest] : manifest.at("artifacts").items()) {
      std::ifstream f(workspace / name, std::ios::binary);
      if (!f) return false;
      std::ostringstream buf;
      buf << f.rdbuf();
      if (fnv1a_hex(buf.str()) != digest.get<std::string>()) return false;
    }
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

PeriodScheme PipelineConfig::scheme() const {
  return PeriodScheme::uniform(periods_per_day, tz_offset_min);
}

json PipelineConfig::settings_json() const {
  json fence_json;
  if (const auto* c = std::get_if<Circle>(&fence)) {
    fence_json = {{"radius_m", c->radius_m}};
  } else {
    json ring = json::array();
    for (const auto& p : std::get<Ring>(fence)) ring.push_back({p.lon, p.lat});
    fence_json = {{"polygon", ring}};
  }
  fence_json["lon"] = hub.lon;
  fence_json["lat"] = hub.lat;
  return {
      {"hub", fence_json},
      {"periods_per_day", periods_per_day},
      {"tz_offset_min", tz_offset_min},
      {"train_dates", dates_json(train_dates)},
      {"holdout_dates", dates_json(holdout_dates)},
      {"alpha", alpha},
      {"min_samples", min_samples},
      {"accessibility_budget_min", accessibility_budget_min},
      {"reliability_threshold", reliability_threshold},
      {"congestion", {{"free_kmh", congestion.free_kmh}, {"slow_kmh", congestion.slow_kmh}}},
      {"include_degenerate", include_degenerate},
      {"service_extent_q", service_extent_q},
  };
}

PipelineConfig pipeline_config_from_json(const json& j, const std::string& base_dir) {
  PipelineConfig c;
  try {
    for (const char* key : {"probes", "zones", "network", "hub"}) {
      if (!j.contains(key)) throw ConfigError(std::string("config is missing '") + key + "'");
    }
    c.probes = resolve(base_dir, j.at("probes").get<std::string>());
    c.zones = resolve(base_dir, j.at("zones").get<std::string>());
    c.network = resolve(base_dir, j.at("network").get<std::string>());
    c.workspace = resolve(base_dir, j.value("workspace", std::string("workspace")));

    const auto& hub = j.at("hub");
    c.hub = {hub.at("lon").get<double>(), hub.at("lat").get<double>()};
    if (hub.contains("polygon")) {
      Ring ring;
      for (const auto& p : hub.at("polygon")) {
        ring.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
      }
      c.fence = ring;
    } else {
      c.fence = Circle{c.hub, hub.value("radius_m", 300.0)};
    }
    validate_geofence(c.fence);

    c.periods_per_day = j.value("periods_per_day", c.periods_per_day);
    c.tz_offset_min = j.value("tz_offset_min", c.tz_offset_min);
    c.scheme().validate();
    c.train_dates = dates_from(j, "train_dates");
    c.holdout_dates = dates_from(j, "holdout_dates");
    c.alpha = j.value("alpha", c.alpha);
    c.min_samples = j.value("min_samples", c.min_samples);
    c.accessibility_budget_min = j.value("accessibility_budget_min", c.accessibility_budget_min);
    c.reliability_threshold = j.value("reliability_threshold", c.reliability_threshold);
    if (j.contains("congestion")) {
      c.congestion.free_kmh = j.at("congestion").value("free_kmh", c.congestion.free_kmh);
      c.congestion.slow_kmh = j.at("congestion").value("slow_kmh", c.congestion.slow_kmh);
    }
    c.include_degenerate = j.value("include_degenerate", c.include_degenerate);
    c.service_extent_q = j.value("service_extent_q", c.service_extent_q);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  } catch (const ArgumentError& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (!(c.accessibility_budget_min > 0.0)) throw ConfigError("accessibility budget must be positive");
  if (!(c.service_extent_q > 0.0 && c.service_extent_q <= 1.0)) {
    throw ConfigError("service_extent_q must lie in (0, 1]");
  }
  if (!(c.congestion.slow_kmh <= c.congestion.free_kmh)) {
    throw ConfigError("congestion thresholds must satisfy slow_kmh <= free_kmh");
  }
  return c;
}

PipelineConfig load_pipeline_config(const std::string& path) {
  const std::string text = read_file(path, "config file");
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return pipeline_config_from_json(j, fs::path(path).parent_path().string());
}

json PipelineSummary::to_json() const {
  return {{"config_hash", config_hash}, {"records", records},   {"rejects", rejects},
          {"tracks", tracks},           {"trips", trips},       {"hub_events", hub_events},
          {"errors", errors},           {"warnings", warnings}};
}

PipelineSummary pipeline_run(const PipelineConfig& config) {
  const std::string probes_text = read_file(config.probes, "probe file");
  const std::string zones_text = read_file(config.zones, "zone file");
  const std::string network_text = read_file(config.network, "network file");

  PipelineSummary summary;
  const json inputs = {{"probes", fnv1a_hex(probes_text)},
                       {"zones", fnv1a_hex(zones_text)},
                       {"network", fnv1a_hex(network_text)}};
  const json settings = config.settings_json();
  summary.config_hash = fnv1a_hex(settings.dump() + "\n" + inputs.dump());

  const fs::path workspace(config.workspace);
  if (bundle_is_current(workspace, summary.config_hash)) {
    std::ifstream in(workspace / "manifest.json");
    const json manifest = json::parse(in);
    const auto& s = manifest.at("summary");
    summary.records = s.at("records");
    summary.rejects = s.at("rejects");
    summary.tracks = s.at("tracks");
    summary.trips = s.at("trips");
    summary.hub_events = s.at("hub_events");
    summary.errors = s.at("errors").get<std::vector<std::string>>();
    summary.warnings = s.at("warnings").get<std::vector<std::string>>();
    summary.reused = true;
    return summary;
  }

  auto with_file = [](const std::string& path, auto&& fn) {
    try {
      return fn();
    } catch (const ValidationError& e) {
      auto issues = e.issues();
      issues.insert(issues.begin(), "in '" + path + "'");
      throw ValidationError(std::move(issues));
    } catch (const FormatError& e) {
      throw FormatError("'" + path + "': " + e.what());
    }
  };
  const ZoneSet zones = with_file(config.zones, [&] { return parse_zones_geojson(zones_text); });
  const BusNetwork network =
      with_file(config.network, [&] { return parse_network_json(network_text); });
  ParsedProbes parsed = with_file(config.probes, [&] {
    std::istringstream in(probes_text);
    return parse_probe_csv(in);
  });
  summary.warnings = zones.warnings();
  summary.records = parsed.records.size();
  summary.rejects = parsed.rejects.size();

  const PeriodScheme scheme = config.scheme();
  const ZoneIndex index = build_index(zones);

  std::vector<SpeedCell> speeds = accumulate_speeds(parsed.records, index, scheme);
  std::set<Date> data_dates;
  for (const auto& r : parsed.records) {
    data_dates.insert(local_date(r.timestamp, config.tz_offset_min));
  }

  const auto tracks = build_tracks(std::move(parsed.records));
  summary.tracks = tracks.size();
  std::vector<Trip> trips;
  std::vector<HubEvent> events;
  for (const auto& track : tracks) {
    auto t = extract_trips(track);
    trips.insert(trips.end(), std::make_move_iterator(t.begin()),
                 std::make_move_iterator(t.end()));
    auto e = detect_hub_events(track, config.fence);
    events.insert(events.end(), e.begin(), e.end());
  }
  trips = assign_trip_zones(std::move(trips), index);
  summary.trips = trips.size();
  summary.hub_events = events.size();

  std::vector<BundleTrip> bundle_trips;
  bundle_trips.reserve(trips.size());
  for (auto& t : trips) {
    const HubRole role = hub_role_of(t, config.fence);
    bundle_trips.push_back({std::move(t), role});
  }
  std::vector<Trip> countable;
  for (const auto& bt : bundle_trips) {
    if (config.include_degenerate || !bt.trip.degenerate()) countable.push_back(bt.trip);
  }

  // Series dates: the data span plus whatever the config names explicitly.
  std::set<Date> series_dates;
  if (!data_dates.empty()) {
    for (Date d : date_range(*data_dates.begin(), *data_dates.rbegin())) series_dates.insert(d);
  }
  series_dates.insert(config.train_dates.begin(), config.train_dates.end());
  series_dates.insert(config.holdout_dates.begin(), config.holdout_dates.end());
  const std::vector<Date> all_dates(series_dates.begin(), series_dates.end());
  std::vector<Date> train = config.train_dates;
  if (train.empty()) {
    const std::set<Date> holdout(config.holdout_dates.begin(), config.holdout_dates.end());
    for (Date d : data_dates) {
      if (!holdout.count(d)) train.push_back(d);
    }
  }

  std::map<std::string, std::string> artifacts;
  artifacts["zones.geojson"] = zones_text;
  artifacts["network.json"] = network_text;
  artifacts["rejects.csv"] = render([&](std::ostream& o) { write_rejects_csv(o, parsed.rejects); });
  artifacts["trips.csv"] = render([&](std::ostream& o) { write_trips_csv(o, bundle_trips); });
  artifacts["hub_events.csv"] = render([&](std::ostream& o) { write_hub_events_csv(o, events); });
  artifacts["speeds.csv"] = render([&](std::ostream& o) { write_speeds_csv(o, speeds); });

  for (FlowDirection dir : {FlowDirection::inbound, FlowDirection::outbound}) {
    const std::string name(to_string(dir));
    const FlowSeries series = hub_flow_series(events, scheme, all_dates, dir);
    artifacts["flows_" + name + ".csv"] =
        render([&](std::ostream& o) { write_flow_csv(o, series); });

    const FlowSeries train_series = series.restricted_to(train);
    json anova_doc = {{"config_hash", summary.config_hash}, {"direction", name}};
    try {
      const auto grid = stats::FlowGrid::from_series(train_series, train);
      anova_doc["result"] = stats::anova_to_json(stats::two_way_anova(grid, config.alpha));
    } catch (const Error& e) {
      anova_doc["error"] = e.what();
      summary.errors.push_back(name + " anova: " + e.what());
    }
    artifacts["anova_" + name + ".json"] = anova_doc.dump(1) + "\n";

    json fit_doc = {{"config_hash", summary.config_hash}, {"direction", name}};
    try {
      const auto fit = stats::fit_dummy_regression(train_series, scheme);
      std::optional<stats::ValidationReport> validation;
      if (!config.holdout_dates.empty()) {
        try {
          validation = stats::validate_mape(fit, series.restricted_to(config.holdout_dates));
        } catch (const Error& e) {
          summary.errors.push_back(name + " validation: " + e.what());
        }
      }
      fit_doc["report"] = stats::fit_report_to_json(fit, validation);
    } catch (const Error& e) {
      fit_doc["error"] = e.what();
      summary.errors.push_back(name + " fit: " + e.what());
    }
    artifacts["fit_" + name + ".json"] = fit_doc.dump(1) + "\n";
  }

  TimeWindow span{0, 1};
  if (!data_dates.empty()) {
    span = {scheme.period_start(*data_dates.begin(), 1),
            scheme.period_end(*data_dates.rbegin(), scheme.periods_per_day)};
  }
  const ODMatrix od = build_od_matrix(countable, zones, span);
  artifacts["od.csv"] = render([&](std::ostream& o) { write_od_csv(o, od); });

  json extent = nullptr;
  try {
    const auto e = compute_service_extent(od, zones, config.hub, config.service_extent_q);
    extent = {{"q", config.service_extent_q},
              {"radius_km", e.radius_km},
              {"covered_volume", e.covered_volume},
              {"total_volume", e.total_volume}};
  } catch (const Error& e) {
    summary.warnings.push_back(std::string("service extent: ") + e.what());
  }

  json artifact_digests = json::object();
  for (const auto& [name, content] : artifacts) artifact_digests[name] = fnv1a_hex(content);
  const json manifest = {
      {"format", kBundleFormat},
      {"config_hash", summary.config_hash},
      {"settings", settings},
      {"inputs", inputs},
      {"artifacts", artifact_digests},
      {"dates",
       {{"data", dates_json(std::vector<Date>(data_dates.begin(), data_dates.end()))},
        {"train", dates_json(train)},
        {"holdout", dates_json(config.holdout_dates)}}},
      {"od_window", {{"start", format_iso8601(span.start)}, {"end", format_iso8601(span.end)}}},
      {"service_extent", extent},
      {"summary", summary.to_json()},
  };

  fs::create_directories(workspace);
  fs::remove(workspace / "manifest.json");
  for (const auto& [name, content] : artifacts) {
    std::ofstream out(workspace / name, std::ios::binary);
    out << content;
    if (!out) throw IoError("cannot write '" + (workspace / name).string() + "'");
  }
  std::ofstream out(workspace / "manifest.json", std::ios::binary);
  out << manifest.dump(1) << '\n';
  if (!out) throw IoError("cannot write manifest in '" + workspace.string() + "'");
  return summary;
}

}  // namespace hubflow
