#include "hubflow/od.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "hubflow/error.hpp"

namespace hubflow {

namespace {

constexpr EpochSeconds kDay = 86400;

EpochSeconds floor_div(EpochSeconds a, EpochSeconds b) {
  EpochSeconds q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::vector<Date> sorted_unique(std::span<const Date> dates) {
  std::vector<Date> out(dates.begin(), dates.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Dense date x period counter shared by the event- and trip-based series.
class SeriesBuilder {
 public:
  SeriesBuilder(const PeriodScheme& scheme, std::span<const Date> dates)
      : scheme_(scheme), dates_(sorted_unique(dates)),
        counts_(dates_.size() * static_cast<std::size_t>(scheme.periods_per_day), 0) {
    scheme_.validate();
  }

  void add(EpochSeconds t) {
    const auto slot = scheme_.slot_of(t);
    auto it = std::lower_bound(dates_.begin(), dates_.end(), slot.date);
    if (it == dates_.end() || *it != slot.date) return;
    const auto row = static_cast<std::size_t>(it - dates_.begin());
    ++counts_[row * static_cast<std::size_t>(scheme_.periods_per_day) +
              static_cast<std::size_t>(slot.period - 1)];
  }

  FlowSeries finish(FlowDirection direction) const {
    FlowSeries series;
    series.direction = direction;
    series.periods_per_day = scheme_.periods_per_day;
    series.entries.reserve(counts_.size());
    for (std::size_t r = 0; r < dates_.size(); ++r) {
      for (int p = 1; p <= scheme_.periods_per_day; ++p) {
        series.entries.push_back(
            {dates_[r], p,
             counts_[r * static_cast<std::size_t>(scheme_.periods_per_day) +
                     static_cast<std::size_t>(p - 1)]});
      }
    }
    return series;
  }

 private:
  PeriodScheme scheme_;
  std::vector<Date> dates_;
  std::vector<std::int64_t> counts_;
};

std::string trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return std::string(s);
}

}  // namespace

PeriodScheme PeriodScheme::uniform(int periods, int tz_offset_min) {
  if (periods < 1 || 1440 % periods != 0) {
    throw ArgumentError("periods per day must divide 1440 minutes evenly");
  }
  PeriodScheme scheme;
  scheme.periods_per_day = periods;
  scheme.tz_offset_min = tz_offset_min;
  for (int p = 0; p < periods; ++p) {
    scheme.boundaries_min.push_back(p * (1440 / periods));
  }
  return scheme;
}

void PeriodScheme::validate() const {
  if (periods_per_day < 1 ||
      boundaries_min.size() != static_cast<std::size_t>(periods_per_day)) {
    throw ArgumentError("period boundaries must number periods_per_day");
  }
  if (boundaries_min.front() != 0) {
    throw ArgumentError("first period must start at local midnight");
  }
  for (std::size_t i = 1; i < boundaries_min.size(); ++i) {
    if (boundaries_min[i] <= boundaries_min[i - 1]) {
      throw ArgumentError("period boundaries must increase strictly");
    }
  }
  if (boundaries_min.back() >= 1440) {
    throw ArgumentError("period boundaries must lie within the day");
  }
  if (tz_offset_min <= -1440 || tz_offset_min >= 1440) {
    throw ArgumentError("timezone offset out of range");
  }
}

PeriodScheme::Slot PeriodScheme::slot_of(EpochSeconds t) const {
  const EpochSeconds local = t + static_cast<EpochSeconds>(tz_offset_min) * 60;
  const EpochSeconds day = floor_div(local, kDay);
  const auto minute = static_cast<int>((local - day * kDay) / 60);
  const auto it =
      std::upper_bound(boundaries_min.begin(), boundaries_min.end(), minute);
  return {Date{std::chrono::days{day}},
          static_cast<int>(it - boundaries_min.begin())};
}

EpochSeconds PeriodScheme::period_start(Date local_day, int period) const {
  return to_epoch(local_day) +
         static_cast<EpochSeconds>(boundaries_min.at(static_cast<std::size_t>(period - 1))) * 60 -
         static_cast<EpochSeconds>(tz_offset_min) * 60;
}

EpochSeconds PeriodScheme::period_end(Date local_day, int period) const {
  if (period == periods_per_day) {
    return to_epoch(local_day) + kDay -
           static_cast<EpochSeconds>(tz_offset_min) * 60;
  }
  return period_start(local_day, period + 1);
}

std::string_view to_string(FlowDirection d) {
  return d == FlowDirection::inbound ? "inbound" : "outbound";
}

std::optional<FlowDirection> parse_flow_direction(std::string_view text) {
  if (text == "inbound") return FlowDirection::inbound;
  if (text == "outbound") return FlowDirection::outbound;
  return std::nullopt;
}

std::int64_t FlowSeries::total() const {
  std::int64_t sum = 0;
  for (const auto& e : entries) sum += e.count;
  return sum;
}

std::int64_t FlowSeries::day_total(Date d) const {
  std::int64_t sum = 0;
  for (const auto& e : entries) {
    if (e.date == d) sum += e.count;
  }
  return sum;
}

FlowSeries FlowSeries::restricted_to(std::span<const Date> dates) const {
  const auto keep = sorted_unique(dates);
  FlowSeries out{direction, periods_per_day, {}};
  for (const auto& e : entries) {
    if (std::binary_search(keep.begin(), keep.end(), e.date)) {
      out.entries.push_back(e);
    }
  }
  return out;
}

FlowSeries hub_flow_series(std::span<const HubEvent> events,
                           const PeriodScheme& scheme,
                           std::span<const Date> dates,
                           FlowDirection direction) {
  const HubDirection wanted = direction == FlowDirection::inbound
                                  ? HubDirection::enter
                                  : HubDirection::exit;
  SeriesBuilder builder(scheme, dates);
  for (const auto& e : events) {
    if (e.direction == wanted) builder.add(e.time);
  }
  return builder.finish(direction);
}

FlowSeries hub_flow_series(std::span<const HubEvent> events,
                           const PeriodScheme& scheme, Date from, Date to,
                           FlowDirection direction) {
  const auto dates = date_range(from, to);
  return hub_flow_series(events, scheme, dates, direction);
}

FlowSeries trip_flow_series(std::span<const Trip> trips,
                            const PeriodScheme& scheme,
                            std::span<const Date> dates,
                            FlowDirection direction) {
  SeriesBuilder builder(scheme, dates);
  for (const auto& t : trips) {
    builder.add(direction == FlowDirection::outbound ? t.pickup_time
                                                     : t.dropoff_time);
  }
  return builder.finish(direction);
}

void write_flow_csv(std::ostream& out, const FlowSeries& series) {
  out << "date,period,count\n";
  for (const auto& e : series.entries) {
    out << format_date(e.date) << ',' << e.period << ',' << e.count << '\n';
  }
}

FlowSeries read_flow_csv(std::istream& in, FlowDirection direction,
                         int periods_per_day) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != "date,period,count") {
    throw FormatError("flow CSV header must be 'date,period,count'");
  }
  FlowSeries series{direction, periods_per_day, {}};
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::istringstream row(line);
    std::string date, period, count;
    if (!std::getline(row, date, ',') || !std::getline(row, period, ',') ||
        !std::getline(row, count)) {
      throw FormatError("flow CSV line " + std::to_string(line_no) +
                        ": expected 3 fields");
    }
    auto d = try_parse_date(trim(date));
    try {
      if (!d) throw std::invalid_argument("date");
      const int p = std::stoi(period);
      const std::int64_t c = std::stoll(count);
      if (p < 1 || p > periods_per_day || c < 0) {
        throw std::invalid_argument("range");
      }
      series.entries.push_back({*d, p, c});
    } catch (const std::exception&) {
      throw FormatError("flow CSV line " + std::to_string(line_no) +
                        ": bad value");
    }
  }
  return series;
}

TimeWindow parse_window(std::string_view text, int tz_offset_min) {
  const EpochSeconds shift = static_cast<EpochSeconds>(tz_offset_min) * 60;
  TimeWindow w;
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) {
    auto d = try_parse_date(text);
    if (!d) throw ArgumentError("window must be a date or a start/end pair");
    w = {to_epoch(*d) - shift, to_epoch(*d) + kDay - shift};
  } else {
    const auto a = text.substr(0, slash);
    const auto b = text.substr(slash + 1);
    auto da = try_parse_date(a);
    auto db = try_parse_date(b);
    if (da && db) {
      w = {to_epoch(*da) - shift, to_epoch(*db) + kDay - shift};
    } else {
      auto ta = parse_iso8601(a);
      auto tb = parse_iso8601(b);
      if (!ta || !tb) throw ArgumentError("window bounds are not dates or ISO-8601 times");
      w = {*ta, *tb};
    }
  }
  if (w.end <= w.start) throw ArgumentError("window end must follow its start");
  return w;
}

std::int64_t ODMatrix::sum_counts() const {
  std::int64_t sum = 0;
  for (const auto& [pair, c] : counts) sum += c;
  return sum;
}

ODMatrix build_od_matrix(std::span<const Trip> trips, const ZoneSet& zones,
                         const TimeWindow& window) {
  if (window.end <= window.start) {
    throw ArgumentError("OD window end must follow its start");
  }
  ODMatrix od;
  od.window = window;
  for (const auto& t : trips) {
    if (!window.contains(t.pickup_time)) continue;
    ++od.trips_in_window;
    if (t.pickup_zone && t.dropoff_zone && zones.find(*t.pickup_zone) &&
        zones.find(*t.dropoff_zone)) {
      ++od.counts[{*t.pickup_zone, *t.dropoff_zone}];
    } else {
      ++od.unassigned;
    }
  }
  return od;
}

void write_od_csv(std::ostream& out, const ODMatrix& od) {
  out << "origin_zone,dest_zone,count\n";
  for (const auto& [pair, count] : od.counts) {
    out << pair.first << ',' << pair.second << ',' << count << '\n';
  }
}

namespace {

// Travel times in minutes of trips ending in each zone.
std::unordered_map<int, std::vector<double>> minutes_by_dropoff_zone(
    std::span<const Trip> trips) {
  std::unordered_map<int, std::vector<double>> out;
  for (const auto& t : trips) {
    if (!t.dropoff_zone) continue;
    out[*t.dropoff_zone].push_back(static_cast<double>(t.duration_s()) / 60.0);
  }
  return out;
}

}  // namespace

AccessibilityResult accessibility(std::span<const Trip> trips_from_hub,
                                  const ZoneSet& zones, double budget_min,
                                  std::size_t min_samples) {
  if (!(budget_min > 0.0)) throw ArgumentError("budget must be positive");
  // Sum seconds and divide once so exact inputs give exact means.
  std::unordered_map<int, std::pair<std::int64_t, std::size_t>> sums;
  for (const auto& t : trips_from_hub) {
    if (!t.dropoff_zone) continue;
    auto& s = sums[*t.dropoff_zone];
    s.first += t.duration_s();
    ++s.second;
  }
  AccessibilityResult result{budget_min, min_samples, {}};
  for (const auto& z : zones.zones()) {
    ZoneAccess access{z.zone_id, 0, std::nullopt, false};
    if (auto it = sums.find(z.zone_id); it != sums.end()) {
      access.samples = it->second.second;
      access.mean_minutes = static_cast<double>(it->second.first) /
                            static_cast<double>(access.samples) / 60.0;
      access.reachable = access.samples >= min_samples &&
                         *access.mean_minutes <= budget_min;
    }
    result.zones.push_back(access);
  }
  return result;
}

std::string_view to_string(ReliabilityClass c) {
  switch (c) {
    case ReliabilityClass::reliable: return "reliable";
    case ReliabilityClass::poor: return "poor";
    case ReliabilityClass::undefined: return "undefined";
  }
  return "undefined";
}

double nearest_rank_percentile(std::span<const double> sorted, double pct) {
  if (sorted.empty()) throw ArgumentError("percentile of an empty sample");
  const double n = static_cast<double>(sorted.size());
  const double rank = std::ceil(pct * n / 100.0);
  const auto idx = static_cast<std::size_t>(std::clamp(rank, 1.0, n)) - 1;
  return sorted[idx];
}

ReliabilityResult reliability(std::span<const Trip> trips_from_hub,
                              const ZoneSet& zones, std::size_t min_samples,
                              double threshold) {
  auto by_zone = minutes_by_dropoff_zone(trips_from_hub);
  ReliabilityResult result{min_samples, threshold, {}};
  for (const auto& z : zones.zones()) {
    ZoneReliability zr;
    zr.zone_id = z.zone_id;
    auto it = by_zone.find(z.zone_id);
    if (it != by_zone.end()) {
      auto& times = it->second;
      std::sort(times.begin(), times.end());
      zr.samples = times.size();
      if (zr.samples >= std::max<std::size_t>(min_samples, 1)) {
        zr.p10_min = nearest_rank_percentile(times, 10);
        zr.median_min = nearest_rank_percentile(times, 50);
        zr.p90_min = nearest_rank_percentile(times, 90);
        if (*zr.median_min > 0.0) {
          zr.spread_index = (*zr.p90_min - *zr.p10_min) / *zr.median_min;
          zr.classification = *zr.spread_index > threshold
                                  ? ReliabilityClass::poor
                                  : ReliabilityClass::reliable;
        }
      }
    }
    result.zones.push_back(zr);
  }
  return result;
}

std::string_view to_string(CongestionLevel l) {
  switch (l) {
    case CongestionLevel::free: return "free";
    case CongestionLevel::slow: return "slow";
    case CongestionLevel::congested: return "congested";
    case CongestionLevel::unknown: return "unknown";
  }
  return "unknown";
}

CongestionLevel classify_speed(std::optional<double> mean_kmh,
                               const CongestionThresholds& thresholds) {
  if (!mean_kmh) return CongestionLevel::unknown;
  if (*mean_kmh >= thresholds.free_kmh) return CongestionLevel::free;
  if (*mean_kmh >= thresholds.slow_kmh) return CongestionLevel::slow;
  return CongestionLevel::congested;
}

std::vector<SpeedCell> accumulate_speeds(std::span<const ProbeRecord> records,
                                         const ZoneIndex& index,
                                         const PeriodScheme& scheme) {
  scheme.validate();
  struct Key {
    Date date;
    int zone;
    int period;
    auto operator<=>(const Key&) const = default;
  };
  std::map<Key, std::pair<double, std::size_t>> acc;
  for (const auto& r : records) {
    if (r.state != VehicleState::in_service) continue;
    auto zone = index.locate(r.position);
    if (!zone) continue;
    const auto slot = scheme.slot_of(r.timestamp);
    auto& cell = acc[{slot.date, *zone, slot.period}];
    cell.first += r.speed_kmh;
    ++cell.second;
  }
  std::vector<SpeedCell> out;
  out.reserve(acc.size());
  for (const auto& [key, sum] : acc) {
    out.push_back({key.date, key.zone, key.period,
                   sum.first / static_cast<double>(sum.second), sum.second});
  }
  return out;
}

CongestionGrid road_condition(std::span<const SpeedCell> speeds,
                              const ZoneSet& zones, const PeriodScheme& scheme,
                              Date date,
                              const CongestionThresholds& thresholds) {
  scheme.validate();
  std::map<std::pair<int, int>, const SpeedCell*> day;
  for (const auto& s : speeds) {
    if (s.date == date) day[{s.zone_id, s.period}] = &s;
  }
  CongestionGrid grid{date, {}};
  for (const auto& z : zones.zones()) {
    for (int p = 1; p <= scheme.periods_per_day; ++p) {
      CongestionCell cell{z.zone_id, p, 0, std::nullopt,
                          CongestionLevel::unknown};
      if (auto it = day.find({z.zone_id, p}); it != day.end() &&
                                              it->second->samples > 0) {
        cell.samples = it->second->samples;
        cell.mean_kmh = it->second->mean_kmh;
      }
      cell.level = classify_speed(cell.mean_kmh, thresholds);
      grid.cells.push_back(cell);
    }
  }
  return grid;
}

CongestionGrid road_condition(std::span<const ProbeRecord> records,
                              const ZoneSet& zones, const ZoneIndex& index,
                              const PeriodScheme& scheme, Date date,
                              const CongestionThresholds& thresholds) {
  const auto speeds = accumulate_speeds(records, index, scheme);
  return road_condition(speeds, zones, scheme, date, thresholds);
}

ServiceExtent compute_service_extent(const ODMatrix& od, const ZoneSet& zones,
                                     LonLat hub, double q) {
  if (!(q > 0.0) || q > 1.0) {
    throw ArgumentError("coverage fraction must lie in (0, 1]");
  }
  const auto hub_zone = locate_brute_force(zones, hub);
  std::map<int, double> volume;
  for (const auto& [pair, count] : od.counts) {
    const int far = hub_zone && pair.first == *hub_zone ? pair.second : pair.first;
    if (count > 0 && zones.find(far)) volume[far] += static_cast<double>(count);
  }
  double total = 0.0;
  for (const auto& [zone, v] : volume) total += v;
  if (total <= 0.0) throw Error("no volume");

  const Projection proj = zones.projection();
  std::vector<std::pair<double, int>> by_distance;
  for (const auto& [zone, v] : volume) {
    by_distance.emplace_back(proj.distance_km(hub, zones.centroid(zone)), zone);
  }
  std::sort(by_distance.begin(), by_distance.end());

  const double target = q * total * (1.0 - 1e-12);
  ServiceExtent extent{0.0, 0.0, total, 0};
  for (std::size_t i = 0; i < by_distance.size(); ++i) {
    const auto [dist, zone] = by_distance[i];
    extent.covered_volume += volume[zone];
    extent.radius_km = dist;
    ++extent.zones_within;
    // Zones tied at the same distance fall inside the same radius.
    const bool tie_follows =
        i + 1 < by_distance.size() && by_distance[i + 1].first == dist;
    if (extent.covered_volume >= target && !tie_follows) break;
  }
  return extent;
}

}  // namespace hubflow
