#include "hubflow/service.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <httplib.h>

#include "hubflow/error.hpp"
#include "hubflow/pipeline.hpp"
#include "hubflow/stats/report.hpp"

namespace hubflow {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Raised by parameter parsing; turned into a 400 or 404 by handle().
struct RequestError {
  int status;
  std::string code;
  std::string message;
};

[[noreturn]] void bad_request(std::string code, std::string message) {
  throw RequestError{400, std::move(code), std::move(message)};
}

[[noreturn]] void not_found(std::string code, std::string message) {
  throw RequestError{404, std::move(code), std::move(message)};
}

std::optional<std::string> param(const QueryParams& q, const std::string& key) {
  auto it = q.find(key);
  if (it == q.end()) return std::nullopt;
  return it->second;
}

std::string required(const QueryParams& q, const std::string& key) {
  auto v = param(q, key);
  if (!v) bad_request("missing_parameter", "parameter '" + key + "' is required");
  return *v;
}

long long parse_int(const QueryParams& q, const std::string& key, const std::string& text) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    bad_request("invalid_parameter", "parameter '" + key + "' must be an integer");
  }
  return v;
}

double parse_double(const std::string& key, const std::string& text) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
    bad_request("invalid_parameter", "parameter '" + key + "' must be a number");
  }
  return v;
}

FlowDirection direction_param(const QueryParams& q) {
  const std::string text = required(q, "direction");
  auto d = parse_flow_direction(text);
  if (!d) bad_request("invalid_parameter", "direction must be inbound or outbound");
  return *d;
}

Date date_param(const std::string& key, const std::string& text) {
  auto d = try_parse_date(text);
  if (!d) bad_request("invalid_parameter", "parameter '" + key + "' must be YYYY-MM-DD");
  return *d;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot open '" + p.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json optional_number(const std::optional<double>& v) {
  return v ? number_or_null(*v) : json(nullptr);
}

json window_json(const TimeWindow& w) {
  return {{"start", format_iso8601(w.start)}, {"end", format_iso8601(w.end)}};
}

}  // namespace

Service::Service(const std::string& workspace) {
  const fs::path root(workspace);
  const fs::path manifest_path = root / "manifest.json";
  if (!fs::exists(manifest_path)) {
    throw FormatError("workspace '" + workspace + "' holds no bundle manifest");
  }
  try {
    manifest_ = json::parse(read_text(manifest_path));
    if (manifest_.value("format", "") != kBundleFormat) {
      throw FormatError("unsupported bundle format in '" + manifest_path.string() + "'");
    }
    config_hash_ = manifest_.at("config_hash").get<std::string>();
  } catch (const json::exception& e) {
    throw FormatError("malformed manifest '" + manifest_path.string() + "': " + e.what());
  }

  std::map<std::string, std::string> content;
  for (const auto& [name, digest] : manifest_.at("artifacts").items()) {
    std::string text = read_text(root / name);
    if (fnv1a_hex(text) != digest.get<std::string>()) {
      throw Error("artifact '" + name + "' does not match the manifest; rerun the pipeline");
    }
    content[name] = std::move(text);
  }
  auto has = [&](const std::string& name) { return content.count(name) > 0; };

  const json settings = manifest_.value("settings", json::object());
  const int periods = settings.value("periods_per_day", 12);
  scheme_ = PeriodScheme::uniform(periods, settings.value("tz_offset_min", 480));
  if (settings.contains("hub")) {
    hub_ = {settings["hub"].value("lon", 0.0), settings["hub"].value("lat", 0.0)};
  }
  if (settings.contains("congestion")) {
    congestion_.free_kmh = settings["congestion"].value("free_kmh", congestion_.free_kmh);
    congestion_.slow_kmh = settings["congestion"].value("slow_kmh", congestion_.slow_kmh);
  }
  default_budget_min_ = settings.value("accessibility_budget_min", default_budget_min_);
  default_min_samples_ = settings.value("min_samples", default_min_samples_);
  default_threshold_ = settings.value("reliability_threshold", default_threshold_);
  default_q_ = settings.value("service_extent_q", default_q_);
  include_degenerate_ = settings.value("include_degenerate", false);
  if (manifest_.contains("od_window")) {
    auto s = parse_iso8601(manifest_["od_window"].value("start", ""));
    auto e = parse_iso8601(manifest_["od_window"].value("end", ""));
    if (s && e && *e > *s) default_window_ = TimeWindow{*s, *e};
  }

  if (has("zones.geojson")) zones_ = parse_zones_geojson(content["zones.geojson"]);
  if (has("network.json")) network_ = parse_network_json(content["network.json"]);
  if (has("trips.csv")) {
    std::istringstream in(content["trips.csv"]);
    trips_.emplace();
    departing_trips_.emplace();
    for (auto& bt : read_trips_csv(in)) {
      if (!include_degenerate_ && bt.trip.degenerate()) continue;
      if (bt.role == HubRole::departing) departing_trips_->push_back(bt.trip);
      trips_->push_back(std::move(bt.trip));
    }
  }
  if (has("speeds.csv")) {
    std::istringstream in(content["speeds.csv"]);
    speeds_ = read_speeds_csv(in);
  }

  for (FlowDirection dir : {FlowDirection::inbound, FlowDirection::outbound}) {
    const std::string name(to_string(dir));
    Direction& d = directions_[dir];
    if (has("flows_" + name + ".csv")) {
      std::istringstream in(content["flows_" + name + ".csv"]);
      d.series = read_flow_csv(in, dir, periods);
    }
    const std::string fit_name = "fit_" + name + ".json";
    if (has(fit_name)) {
      const json doc = json::parse(content[fit_name]);
      if (doc.value("config_hash", "") != config_hash_) {
        throw Error("artifact '" + fit_name + "' was computed under another configuration");
      }
      if (doc.contains("report")) {
        d.report = doc["report"];
        d.fit = stats::fit_from_report_json(doc["report"]);
      } else {
        d.fit_error = doc.value("error", "fit unavailable");
      }
    }
  }
}

Response Service::handle(const std::string& path, const QueryParams& params) const {
  Response r;
  try {
    if (path == "/zones") r = zones(params);
    else if (path == "/od") r = od(params);
    else if (path == "/flows") r = flows(params);
    else if (path == "/forecast") r = forecast(params);
    else if (path == "/forecast/report") r = forecast_report(params);
    else if (path == "/validation") r = validation(params);
    else if (path == "/accessibility") r = accessibility(params);
    else if (path == "/reliability") r = reliability(params);
    else if (path == "/congestion") r = congestion(params);
    else if (path == "/transfer") r = transfer(params);
    else if (path == "/service-extent") r = service_extent(params);
    else not_found("unknown_endpoint", "no endpoint at '" + path + "'");
  } catch (const RequestError& e) {
    r.status = e.status;
    r.body = {{"error", {{"code", e.code}, {"message", e.message}}}};
  }
  r.body["config_hash"] = config_hash_;
  return r;
}

Response Service::zones(const QueryParams&) const {
  if (!zones_) not_found("artifact_missing", "bundle has no zones");
  json out = json::array();
  for (const auto& z : zones_->zones()) {
    const LonLat c = zones_->centroid(z.zone_id);
    json ring = json::array();
    for (const auto& p : z.ring) ring.push_back({p.lon, p.lat});
    out.push_back({{"zone_id", z.zone_id},
                   {"name", z.name},
                   {"district", z.district},
                   {"centroid", {c.lon, c.lat}},
                   {"ring", ring}});
  }
  return {200, {{"hub", {hub_.lon, hub_.lat}}, {"zones", out}}};
}

Response Service::od(const QueryParams& q) const {
  if (auto mode = param(q, "mode"); mode && *mode != "taxi") {
    bad_request("invalid_parameter", "mode must be taxi");
  }
  if (!trips_ || !zones_) not_found("artifact_missing", "bundle has no trips");
  TimeWindow window;
  if (auto text = param(q, "window")) {
    try {
      window = parse_window(*text, scheme_.tz_offset_min);
    } catch (const ArgumentError& e) {
      bad_request("invalid_parameter", e.what());
    }
  } else if (default_window_) {
    window = *default_window_;
  } else {
    bad_request("missing_parameter", "parameter 'window' is required");
  }
  const ODMatrix od = build_od_matrix(*trips_, *zones_, window);
  json flows = json::array();
  for (const auto& [pair, count] : od.counts) {
    flows.push_back({{"origin", pair.first}, {"dest", pair.second}, {"count", count}});
  }
  const std::int64_t sum = od.sum_counts();
  return {200,
          {{"window", window_json(window)},
           {"mode", "taxi"},
           {"flows", flows},
           {"unassigned", od.unassigned},
           {"trips_in_window", od.trips_in_window},
           {"conservation",
            {{"sum_counts", sum},
             {"unassigned", od.unassigned},
             {"trips_in_window", od.trips_in_window},
             {"holds", sum + od.unassigned == od.trips_in_window}}}}};
}

Response Service::flows(const QueryParams& q) const {
  const FlowDirection dir = direction_param(q);
  std::optional<Date> from, to;
  if (auto t = param(q, "from")) from = date_param("from", *t);
  if (auto t = param(q, "to")) to = date_param("to", *t);
  if (from && to && *to < *from) bad_request("invalid_parameter", "from must not follow to");
  const auto& d = directions_.at(dir);
  if (!d.series) not_found("artifact_missing", "bundle has no flow series");
  json entries = json::array();
  std::int64_t total = 0;
  for (const auto& e : d.series->entries) {
    if ((from && e.date < *from) || (to && e.date > *to)) continue;
    entries.push_back({{"date", format_date(e.date)}, {"period", e.period}, {"count", e.count}});
    total += e.count;
  }
  return {200,
          {{"direction", to_string(dir)},
           {"periods_per_day", d.series->periods_per_day},
           {"total", total},
           {"entries", entries}}};
}

Response Service::forecast(const QueryParams& q) const {
  const FlowDirection dir = direction_param(q);
  const long long period = parse_int(q, "period", required(q, "period"));
  const auto& d = directions_.at(dir);
  if (!d.fit) {
    not_found("fit_unavailable", d.fit_error.value_or("bundle has no fit for this direction"));
  }
  if (period < 1 || period > d.fit->periods) {
    bad_request("invalid_parameter",
                "period must lie in 1.." + std::to_string(d.fit->periods));
  }
  return {200,
          {{"direction", to_string(dir)},
           {"period", period},
           {"predicted", stats::predict(*d.fit, static_cast<int>(period))}}};
}

Response Service::forecast_report(const QueryParams& q) const {
  json reports = json::object();
  std::vector<FlowDirection> dirs = {FlowDirection::inbound, FlowDirection::outbound};
  if (param(q, "direction")) dirs = {direction_param(q)};
  for (FlowDirection dir : dirs) {
    const auto& d = directions_.at(dir);
    const std::string name(to_string(dir));
    if (d.report) {
      json report = *d.report;
      report.erase("validation");
      reports[name] = report;
    } else {
      reports[name] = {{"error", d.fit_error.value_or("fit unavailable")}};
    }
  }
  return {200, {{"reports", reports}}};
}

Response Service::validation(const QueryParams& q) const {
  json out = json::object();
  std::vector<FlowDirection> dirs = {FlowDirection::inbound, FlowDirection::outbound};
  if (param(q, "direction")) dirs = {direction_param(q)};
  for (FlowDirection dir : dirs) {
    const auto& d = directions_.at(dir);
    json v = d.report ? d.report->value("validation", json(nullptr)) : json(nullptr);
    out[std::string(to_string(dir))] = v;
  }
  return {200, {{"validation", out}}};
}

Response Service::accessibility(const QueryParams& q) const {
  double budget = default_budget_min_;
  if (auto t = param(q, "budget_min")) budget = parse_double("budget_min", *t);
  if (!(budget > 0.0)) bad_request("invalid_parameter", "budget_min must be positive");
  std::size_t min_samples = default_min_samples_;
  if (auto t = param(q, "min_samples")) {
    const long long v = parse_int(q, "min_samples", *t);
    if (v < 1) bad_request("invalid_parameter", "min_samples must be at least 1");
    min_samples = static_cast<std::size_t>(v);
  }
  if (!departing_trips_ || !zones_) not_found("artifact_missing", "bundle has no trips");
  const auto result = hubflow::accessibility(*departing_trips_, *zones_, budget, min_samples);
  json zones = json::array();
  std::size_t reachable = 0;
  for (const auto& z : result.zones) {
    zones.push_back({{"zone_id", z.zone_id},
                     {"samples", z.samples},
                     {"mean_minutes", optional_number(z.mean_minutes)},
                     {"reachable", z.reachable}});
    reachable += z.reachable ? 1 : 0;
  }
  return {200,
          {{"budget_min", budget},
           {"min_samples", min_samples},
           {"reachable_count", reachable},
           {"zones", zones}}};
}

Response Service::reliability(const QueryParams& q) const {
  std::size_t min_samples = default_min_samples_;
  if (auto t = param(q, "min_samples")) {
    const long long v = parse_int(q, "min_samples", *t);
    if (v < 1) bad_request("invalid_parameter", "min_samples must be at least 1");
    min_samples = static_cast<std::size_t>(v);
  }
  double threshold = default_threshold_;
  if (auto t = param(q, "threshold")) threshold = parse_double("threshold", *t);
  if (threshold < 0.0) bad_request("invalid_parameter", "threshold must not be negative");
  if (!departing_trips_ || !zones_) not_found("artifact_missing", "bundle has no trips");
  const auto result = hubflow::reliability(*departing_trips_, *zones_, min_samples, threshold);
  json zones = json::array();
  for (const auto& z : result.zones) {
    zones.push_back({{"zone_id", z.zone_id},
                     {"samples", z.samples},
                     {"p10_min", optional_number(z.p10_min)},
                     {"median_min", optional_number(z.median_min)},
                     {"p90_min", optional_number(z.p90_min)},
                     {"spread_index", optional_number(z.spread_index)},
                     {"classification", to_string(z.classification)}});
  }
  return {200, {{"min_samples", min_samples}, {"threshold", threshold}, {"zones", zones}}};
}

Response Service::congestion(const QueryParams& q) const {
  const Date date = date_param("date", required(q, "date"));
  std::optional<int> period;
  if (auto t = param(q, "period")) {
    const long long v = parse_int(q, "period", *t);
    if (v < 1 || v > scheme_.periods_per_day) {
      bad_request("invalid_parameter",
                  "period must lie in 1.." + std::to_string(scheme_.periods_per_day));
    }
    period = static_cast<int>(v);
  }
  if (!speeds_ || !zones_) not_found("artifact_missing", "bundle has no speed table");
  const auto grid = road_condition(*speeds_, *zones_, scheme_, date, congestion_);
  json cells = json::array();
  for (const auto& c : grid.cells) {
    if (period && c.period != *period) continue;
    cells.push_back({{"zone_id", c.zone_id},
                     {"period", c.period},
                     {"samples", c.samples},
                     {"mean_kmh", optional_number(c.mean_kmh)},
                     {"level", to_string(c.level)}});
  }
  json body = {{"date", format_date(date)}, {"cells", cells}};
  body["period"] = period ? json(*period) : json(nullptr);
  return {200, body};
}

Response Service::transfer(const QueryParams& q) const {
  const std::string from = required(q, "from");
  const std::string to = required(q, "to");
  int max_transfers = 2;
  if (auto t = param(q, "max_transfers")) {
    const long long v = parse_int(q, "max_transfers", *t);
    if (v < 0 || v > 5) bad_request("invalid_parameter", "max_transfers must lie in 0..5");
    max_transfers = static_cast<int>(v);
  }
  std::size_t limit = 10;
  if (auto t = param(q, "limit")) {
    const long long v = parse_int(q, "limit", *t);
    if (v < 1 || v > 100) bad_request("invalid_parameter", "limit must lie in 1..100");
    limit = static_cast<std::size_t>(v);
  }
  if (from == to) bad_request("invalid_parameter", "origin and destination are the same station");
  if (!network_) not_found("artifact_missing", "bundle has no bus network");
  std::vector<TransferPlan> plans;
  try {
    plans = find_plans(*network_, from, to, max_transfers, limit);
  } catch (const UnknownStationError& e) {
    not_found("unknown_station", e.what());
  } catch (const ArgumentError& e) {
    bad_request("invalid_parameter", e.what());
  }
  json out = json::array();
  for (const auto& p : plans) {
    json legs = json::array();
    for (const auto& l : p.legs) {
      legs.push_back({{"route", l.route_id},
                      {"board", l.board_station},
                      {"alight", l.alight_station},
                      {"stops", l.stops}});
    }
    out.push_back(
        {{"transfers", p.num_transfers()}, {"total_stops", p.total_stops()}, {"legs", legs}});
  }
  return {200, {{"from", from}, {"to", to}, {"max_transfers", max_transfers}, {"plans", out}}};
}

Response Service::service_extent(const QueryParams& q) const {
  double quantile = default_q_;
  if (auto t = param(q, "q")) quantile = parse_double("q", *t);
  if (!(quantile > 0.0 && quantile <= 1.0)) bad_request("invalid_parameter", "q must lie in (0, 1]");
  if (!trips_ || !zones_) not_found("artifact_missing", "bundle has no trips");
  TimeWindow window;
  if (auto text = param(q, "window")) {
    try {
      window = parse_window(*text, scheme_.tz_offset_min);
    } catch (const ArgumentError& e) {
      bad_request("invalid_parameter", e.what());
    }
  } else if (default_window_) {
    window = *default_window_;
  } else {
    bad_request("missing_parameter", "parameter 'window' is required");
  }
  const ODMatrix od = build_od_matrix(*trips_, *zones_, window);
  json body = {{"q", quantile}, {"window", window_json(window)}};
  try {
    const auto e = compute_service_extent(od, *zones_, hub_, quantile);
    body["radius_km"] = e.radius_km;
    body["covered_volume"] = e.covered_volume;
    body["total_volume"] = e.total_volume;
    body["zones_within"] = e.zones_within;
  } catch (const ArgumentError& e) {
    bad_request("invalid_parameter", e.what());
  } catch (const Error&) {
    body["radius_km"] = nullptr;
    body["covered_volume"] = 0;
    body["total_volume"] = 0;
    body["zones_within"] = 0;
  }
  return {200, body};
}

struct HttpFrontend::Impl {
  httplib::Server server;
};

HttpFrontend::HttpFrontend(const Service& service) : impl_(std::make_unique<Impl>()) {
  impl_->server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
  impl_->server.Get(R"(/.*)", [&service](const httplib::Request& req, httplib::Response& res) {
    QueryParams params;
    for (const auto& [k, v] : req.params) params.emplace(k, v);
    const Response r = service.handle(req.path, params);
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  });
}

HttpFrontend::~HttpFrontend() = default;

int HttpFrontend::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpFrontend::listen() { return impl_->server.listen_after_bind(); }

void HttpFrontend::stop() { impl_->server.stop(); }

bool HttpFrontend::running() const { return impl_->server.is_running(); }

std::pair<std::string, int> parse_bind_address(const std::string& text) {
  std::string host = text;
  int port = 8080;
  if (auto colon = text.rfind(':'); colon != std::string::npos) {
    host = text.substr(0, colon);
    const std::string digits = text.substr(colon + 1);
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), port);
    if (ec != std::errc() || ptr != digits.data() + digits.size() || port < 0 || port > 65535) {
      throw ArgumentError("bad port in bind address '" + text + "'");
    }
  }
  if (host.empty()) host = "127.0.0.1";
  return {host, port};
}

bool serve(const Service& service, const std::string& bind_address) {
  const auto [host, port] = parse_bind_address(bind_address);
  HttpFrontend frontend(service);
  if (frontend.bind(host, port) < 0) return false;
  return frontend.listen();
}

}  // namespace hubflow
