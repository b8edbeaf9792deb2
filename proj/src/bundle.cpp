#include "hubflow/bundle.hpp"

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "hubflow/error.hpp"

namespace hubflow {

namespace {

constexpr std::string_view kTripsHeader =
    "vehicle_id,pickup_time,dropoff_time,pickup_lon,pickup_lat,dropoff_lon,"
    "dropoff_lat,pickup_zone,dropoff_zone,truncated_start,truncated_end,mode,"
    "hub_role";
constexpr std::string_view kSpeedsHeader = "date,zone_id,period,mean_kmh,samples";

std::string exact(double v) {
  // Shortest form that reads back to the same double.
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
T number(const std::string& field, std::size_t line_no) {
  T value{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw FormatError("bundle CSV line " + std::to_string(line_no) +
                      ": bad number '" + field + "'");
  }
  return value;
}

std::optional<int> optional_zone(const std::string& field, std::size_t line_no) {
  if (field.empty()) return std::nullopt;
  return number<int>(field, line_no);
}

void expect_header(std::istream& in, std::string_view header) {
  std::string line;
  if (!std::getline(in, line) || line != header) {
    throw FormatError("bundle CSV header mismatch, expected '" + std::string(header) + "'");
  }
}

}  // namespace

std::string_view to_string(HubRole r) {
  switch (r) {
    case HubRole::none: return "none";
    case HubRole::departing: return "departing";
    case HubRole::arriving: return "arriving";
    case HubRole::internal: return "internal";
  }
  return "none";
}

HubRole hub_role_of(const Trip& trip, const Geofence& fence) {
  const bool from_hub = geofence_contains(fence, trip.pickup_point);
  const bool to_hub = geofence_contains(fence, trip.dropoff_point);
  if (from_hub && to_hub) return HubRole::internal;
  if (from_hub) return HubRole::departing;
  if (to_hub) return HubRole::arriving;
  return HubRole::none;
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_trips_csv(std::ostream& out, const std::vector<BundleTrip>& trips) {
  out << kTripsHeader << '\n';
  for (const auto& bt : trips) {
    const Trip& t = bt.trip;
    out << t.vehicle_id << ',' << t.pickup_time << ',' << t.dropoff_time << ','
        << exact(t.pickup_point.lon) << ',' << exact(t.pickup_point.lat) << ','
        << exact(t.dropoff_point.lon) << ',' << exact(t.dropoff_point.lat) << ','
        << (t.pickup_zone ? std::to_string(*t.pickup_zone) : "") << ','
        << (t.dropoff_zone ? std::to_string(*t.dropoff_zone) : "") << ','
        << (t.truncated_start ? 1 : 0) << ',' << (t.truncated_end ? 1 : 0) << ','
        << to_string(t.mode) << ',' << to_string(bt.role) << '\n';
  }
}

std::vector<BundleTrip> read_trips_csv(std::istream& in) {
  expect_header(in, kTripsHeader);
  std::vector<BundleTrip> out;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 13) {
      throw FormatError("trips CSV line " + std::to_string(line_no) + ": expected 13 fields");
    }
    BundleTrip bt;
    Trip& t = bt.trip;
    t.vehicle_id = f[0];
    t.pickup_time = number<EpochSeconds>(f[1], line_no);
    t.dropoff_time = number<EpochSeconds>(f[2], line_no);
    t.pickup_point = {number<double>(f[3], line_no), number<double>(f[4], line_no)};
    t.dropoff_point = {number<double>(f[5], line_no), number<double>(f[6], line_no)};
    t.pickup_zone = optional_zone(f[7], line_no);
    t.dropoff_zone = optional_zone(f[8], line_no);
    t.truncated_start = f[9] == "1";
    t.truncated_end = f[10] == "1";
    if (f[11] != "taxi") {
      throw FormatError("trips CSV line " + std::to_string(line_no) + ": unknown mode");
    }
    if (f[12] == "departing") {
      bt.role = HubRole::departing;
    } else if (f[12] == "arriving") {
      bt.role = HubRole::arriving;
    } else if (f[12] == "internal") {
      bt.role = HubRole::internal;
    } else if (f[12] == "none") {
      bt.role = HubRole::none;
    } else {
      throw FormatError("trips CSV line " + std::to_string(line_no) + ": unknown hub role");
    }
    out.push_back(std::move(bt));
  }
  return out;
}

void write_hub_events_csv(std::ostream& out, const std::vector<HubEvent>& events) {
  out << "vehicle_id,time,direction\n";
  for (const auto& e : events) {
    out << e.vehicle_id << ',' << e.time << ',' << to_string(e.direction) << '\n';
  }
}

void write_speeds_csv(std::ostream& out, const std::vector<SpeedCell>& cells) {
  out << kSpeedsHeader << '\n';
  for (const auto& c : cells) {
    out << format_date(c.date) << ',' << c.zone_id << ',' << c.period << ','
        << exact(c.mean_kmh) << ',' << c.samples << '\n';
  }
}

std::vector<SpeedCell> read_speeds_csv(std::istream& in) {
  expect_header(in, kSpeedsHeader);
  std::vector<SpeedCell> out;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 5) {
      throw FormatError("speeds CSV line " + std::to_string(line_no) + ": expected 5 fields");
    }
    auto date = try_parse_date(f[0]);
    if (!date) throw FormatError("speeds CSV line " + std::to_string(line_no) + ": bad date");
    out.push_back({*date, number<int>(f[1], line_no), number<int>(f[2], line_no),
                   number<double>(f[3], line_no), number<std::size_t>(f[4], line_no)});
  }
  return out;
}

void write_rejects_csv(std::ostream& out, const std::vector<RejectedLine>& rejects) {
  out << "line,reason,raw\n";
  for (const auto& r : rejects) {
    std::string raw = r.raw;
    std::string quoted = "\"";
    for (char c : raw) {
      if (c == '"') quoted += '"';
      quoted += c;
    }
    quoted += '"';
    out << r.line_number << ',' << r.reason << ',' << quoted << '\n';
  }
}

}  // namespace hubflow
