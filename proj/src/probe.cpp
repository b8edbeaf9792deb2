#include "hubflow/probe.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>

#include "hubflow/error.hpp"

namespace hubflow {

std::string_view to_string(VehicleState s) {
  switch (s) {
    case VehicleState::out_of_service: return "out_of_service";
    case VehicleState::in_service: return "in_service";
    case VehicleState::unknown: return "unknown";
  }
  return "unknown";
}

std::string_view to_string(TravelMode) { return "taxi"; }

std::string_view to_string(HubDirection d) {
  return d == HubDirection::enter ? "enter" : "exit";
}

namespace {

bool parse_double(std::string_view field, double& out) {
  if (field.empty()) return false;
  // from_chars rejects a leading '+', which some exporters emit.
  if (field.front() == '+') field.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
  return ec == std::errc{} && ptr == field.data() + field.size() &&
         std::isfinite(out);
}

bool parse_small_int(std::string_view field, int& out) {
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
  return !field.empty() && ec == std::errc{} &&
         ptr == field.data() + field.size();
}

}  // namespace

std::optional<ProbeRecord> parse_probe_line(std::string_view line,
                                            std::string& reason) {
  if (line.empty()) {
    reason = "empty line";
    return std::nullopt;
  }
  std::string_view fields[8];
  std::size_t count = 0;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (count == 8) {
      reason = "wrong field count";
      return std::nullopt;
    }
    fields[count++] = line.substr(start, comma - start);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (count != 8) {
    reason = "wrong field count";
    return std::nullopt;
  }

  ProbeRecord r;
  if (fields[0].empty()) {
    reason = "empty vehicle_id";
    return std::nullopt;
  }
  r.vehicle_id = std::string(fields[0]);

  auto ts = parse_iso8601(fields[1]);
  if (!ts) {
    reason = "bad timestamp";
    return std::nullopt;
  }
  r.timestamp = *ts;

  if (!parse_double(fields[2], r.position.lon)) {
    reason = "bad lon";
    return std::nullopt;
  }
  if (!parse_double(fields[3], r.position.lat)) {
    reason = "bad lat";
    return std::nullopt;
  }
  if (r.position.lon < -180.0 || r.position.lon > 180.0) {
    reason = "lon out of range";
    return std::nullopt;
  }
  if (r.position.lat < -90.0 || r.position.lat > 90.0) {
    reason = "lat out of range";
    return std::nullopt;
  }
  if (!parse_double(fields[4], r.speed_kmh)) {
    reason = "bad speed";
    return std::nullopt;
  }
  if (r.speed_kmh < 0.0) {
    reason = "speed out of range";
    return std::nullopt;
  }
  if (!parse_double(fields[5], r.heading_deg)) {
    reason = "bad heading";
    return std::nullopt;
  }
  if (r.heading_deg < 0.0 || r.heading_deg >= 360.0) {
    reason = "heading out of range";
    return std::nullopt;
  }
  int state = 0;
  if (!parse_small_int(fields[6], state) || state < 0 || state > 2) {
    reason = "bad state";
    return std::nullopt;
  }
  r.state = static_cast<VehicleState>(state);
  int occupied = 0;
  if (!parse_small_int(fields[7], occupied) || occupied < 0 || occupied > 1) {
    reason = "bad occupied";
    return std::nullopt;
  }
  r.occupied = occupied == 1;
  return r;
}

ParsedProbes parse_probe_csv(std::istream& in) {
  if (!in) throw IoError("probe stream is not readable");
  ParsedProbes out;
  std::string line;
  if (!std::getline(in, line)) {
    if (in.bad()) throw IoError("failed reading probe stream");
    throw FormatError("probe CSV is empty; expected header '" +
                      std::string(kProbeCsvHeader) + "'");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
    line.erase(0, 3);
  }
  if (line != kProbeCsvHeader) {
    throw FormatError("probe CSV header mismatch: got '" + line + "'");
  }

  std::size_t line_number = 1;
  std::string reason;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (auto record = parse_probe_line(line, reason)) {
      out.records.push_back(std::move(*record));
    } else {
      out.rejects.push_back({line_number, reason, line});
    }
  }
  if (in.bad()) throw IoError("failed reading probe stream");
  return out;
}

ParsedProbes parse_probe_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open probe file '" + path + "'");
  return parse_probe_csv(in);
}

std::string format_probe_line(const ProbeRecord& r) {
  std::string out = r.vehicle_id;
  out += ',';
  out += format_iso8601(r.timestamp);
  char buf[48];
  auto put = [&](double v, int precision) {
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, precision);
    out += ',';
    out.append(buf, res.ptr);
  };
  put(r.position.lon, 6);
  put(r.position.lat, 6);
  put(r.speed_kmh, 1);
  put(r.heading_deg, 1);
  out += ',';
  out += static_cast<char>('0' + static_cast<int>(r.state));
  out += r.occupied ? ",1" : ",0";
  return out;
}

std::vector<Track> build_tracks(std::vector<ProbeRecord> records) {
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     const auto& ra = records[a];
                     const auto& rb = records[b];
                     if (ra.vehicle_id != rb.vehicle_id) {
                       return ra.vehicle_id < rb.vehicle_id;
                     }
                     return ra.timestamp < rb.timestamp;
                   });

  std::vector<Track> tracks;
  for (std::size_t idx : order) {
    ProbeRecord& r = records[idx];
    if (tracks.empty() || tracks.back().vehicle_id != r.vehicle_id) {
      tracks.push_back({r.vehicle_id, {}});
    }
    auto& kept = tracks.back().records;
    if (!kept.empty() && kept.back().timestamp == r.timestamp) continue;
    kept.push_back(std::move(r));
  }
  return tracks;
}

std::vector<Trip> extract_trips(const Track& track) {
  std::vector<Trip> trips;
  const auto& recs = track.records;
  std::size_t i = 0;
  while (i < recs.size()) {
    if (!recs[i].occupied) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < recs.size() && recs[j + 1].occupied) ++j;
    Trip trip;
    trip.vehicle_id = track.vehicle_id;
    trip.pickup_time = recs[i].timestamp;
    trip.dropoff_time = recs[j].timestamp;
    trip.pickup_point = recs[i].position;
    trip.dropoff_point = recs[j].position;
    trip.truncated_start = i == 0;
    trip.truncated_end = j + 1 == recs.size();
    trips.push_back(std::move(trip));
    i = j + 1;
  }
  return trips;
}

std::vector<Trip> countable_trips(std::vector<Trip> trips,
                                  bool include_degenerate) {
  if (include_degenerate) return trips;
  std::erase_if(trips, [](const Trip& t) { return t.degenerate(); });
  return trips;
}

std::vector<HubEvent> detect_hub_events(const Track& track,
                                        const Geofence& fence) {
  validate_geofence(fence);
  std::vector<HubEvent> events;
  bool have_side = false;
  bool inside = false;
  for (const auto& r : track.records) {
    const bool now_inside = geofence_contains(fence, r.position);
    if (have_side && now_inside != inside) {
      events.push_back({track.vehicle_id, r.timestamp,
                        now_inside ? HubDirection::enter : HubDirection::exit});
    }
    inside = now_inside;
    have_side = true;
  }
  return events;
}

}  // namespace hubflow
