#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hubflow/probe.hpp"
#include "hubflow/time.hpp"
#include "hubflow/zones.hpp"

namespace hubflow {

// Day-local time bins. Period indices are 1-based everywhere outside this
// struct's internals.
struct PeriodScheme {
  int periods_per_day = 12;
  std::vector<int> boundaries_min;  // start offsets from local midnight
  int tz_offset_min = 0;            // local = UTC + offset

  static PeriodScheme uniform(int periods = 12, int tz_offset_min = 0);

  // Throws ArgumentError unless boundaries start at 0, increase strictly,
  // stay below 1440 and number periods_per_day.
  void validate() const;

  struct Slot {
    Date date;  // local date
    int period = 1;
  };
  Slot slot_of(EpochSeconds t) const;
  EpochSeconds period_start(Date local_day, int period) const;
  EpochSeconds period_end(Date local_day, int period) const;
};

enum class FlowDirection { inbound, outbound };

std::string_view to_string(FlowDirection d);
std::optional<FlowDirection> parse_flow_direction(std::string_view text);

struct FlowEntry {
  Date date;
  int period = 1;
  std::int64_t count = 0;

  friend bool operator==(const FlowEntry&, const FlowEntry&) = default;
};

struct FlowSeries {
  FlowDirection direction = FlowDirection::inbound;
  int periods_per_day = 12;
  std::vector<FlowEntry> entries;  // date-major, every period of every date

  std::int64_t total() const;
  std::int64_t day_total(Date d) const;
  // Only entries whose date is listed, keeping series order.
  FlowSeries restricted_to(std::span<const Date> dates) const;
};

// Inbound counts enter events, outbound counts exit events, each binned by the
// event's local time. Dates without events still get zero entries.
FlowSeries hub_flow_series(std::span<const HubEvent> events,
                           const PeriodScheme& scheme,
                           std::span<const Date> dates,
                           FlowDirection direction);
FlowSeries hub_flow_series(std::span<const HubEvent> events,
                           const PeriodScheme& scheme, Date from, Date to,
                           FlowDirection direction);

// Trip-based counterpart: outbound trips are binned by pickup time, inbound
// by dropoff time. The caller selects which trips belong to the hub.
FlowSeries trip_flow_series(std::span<const Trip> trips,
                            const PeriodScheme& scheme,
                            std::span<const Date> dates,
                            FlowDirection direction);

void write_flow_csv(std::ostream& out, const FlowSeries& series);
// Throws FormatError on a bad header or row.
FlowSeries read_flow_csv(std::istream& in, FlowDirection direction,
                         int periods_per_day);

struct TimeWindow {
  EpochSeconds start = 0;
  EpochSeconds end = 0;  // exclusive

  bool contains(EpochSeconds t) const { return t >= start && t < end; }
};

// Accepts "YYYY-MM-DD" (one local day), "YYYY-MM-DD/YYYY-MM-DD" (inclusive
// local days) or "<iso8601>/<iso8601>". Throws ArgumentError.
TimeWindow parse_window(std::string_view text, int tz_offset_min);

struct ODMatrix {
  TimeWindow window;
  std::map<std::pair<int, int>, std::int64_t> counts;
  std::int64_t unassigned = 0;
  std::int64_t trips_in_window = 0;

  std::int64_t sum_counts() const;
};

// Trips are filtered on pickup_time. Endpoints without a zone, or with a zone
// id absent from `zones`, are tallied as unassigned. Throws ArgumentError when
// the window is empty.
ODMatrix build_od_matrix(std::span<const Trip> trips, const ZoneSet& zones,
                         const TimeWindow& window);

void write_od_csv(std::ostream& out, const ODMatrix& od);

struct ZoneAccess {
  int zone_id = 0;
  std::size_t samples = 0;
  std::optional<double> mean_minutes;
  bool reachable = false;
};

struct AccessibilityResult {
  double budget_min = 0.0;
  std::size_t min_samples = 0;
  std::vector<ZoneAccess> zones;  // every zone of the set, by zone_id
};

// Travel time per trip is dropoff - pickup, grouped by dropoff zone. A zone is
// reachable when it has at least min_samples trips and its mean is within the
// budget (inclusive). Throws ArgumentError for budget <= 0.
AccessibilityResult accessibility(std::span<const Trip> trips_from_hub,
                                  const ZoneSet& zones, double budget_min,
                                  std::size_t min_samples = 5);

enum class ReliabilityClass { reliable, poor, undefined };

std::string_view to_string(ReliabilityClass c);

struct ZoneReliability {
  int zone_id = 0;
  std::size_t samples = 0;
  std::optional<double> p10_min;
  std::optional<double> median_min;
  std::optional<double> p90_min;
  std::optional<double> spread_index;
  ReliabilityClass classification = ReliabilityClass::undefined;
};

struct ReliabilityResult {
  std::size_t min_samples = 0;
  double threshold = 0.0;
  std::vector<ZoneReliability> zones;
};

// Nearest-rank percentile of an ascending sample: element ceil(pct/100 * n).
double nearest_rank_percentile(std::span<const double> sorted, double pct);

// Spread index (p90 - p10) / median per dropoff zone; poor when it exceeds
// threshold.
ReliabilityResult reliability(std::span<const Trip> trips_from_hub,
                              const ZoneSet& zones,
                              std::size_t min_samples = 5,
                              double threshold = 0.5);

enum class CongestionLevel { free, slow, congested, unknown };

std::string_view to_string(CongestionLevel l);

struct CongestionThresholds {
  double free_kmh = 30.0;  // mean >= free_kmh is free
  double slow_kmh = 15.0;  // slow_kmh <= mean < free_kmh is slow
};

CongestionLevel classify_speed(std::optional<double> mean_kmh,
                               const CongestionThresholds& thresholds = {});

// Sum of in-service probe speeds per (local date, zone, period).
struct SpeedCell {
  Date date;
  int zone_id = 0;
  int period = 1;
  double mean_kmh = 0.0;
  std::size_t samples = 0;

  friend bool operator==(const SpeedCell&, const SpeedCell&) = default;
};

// Sorted by (date, zone_id, period); only non-empty cells are present.
std::vector<SpeedCell> accumulate_speeds(std::span<const ProbeRecord> records,
                                         const ZoneIndex& index,
                                         const PeriodScheme& scheme);

struct CongestionCell {
  int zone_id = 0;
  int period = 1;
  std::size_t samples = 0;
  std::optional<double> mean_kmh;
  CongestionLevel level = CongestionLevel::unknown;
};

struct CongestionGrid {
  Date date;
  std::vector<CongestionCell> cells;  // zone-major, every zone x period
};

CongestionGrid road_condition(std::span<const SpeedCell> speeds,
                              const ZoneSet& zones, const PeriodScheme& scheme,
                              Date date,
                              const CongestionThresholds& thresholds = {});
CongestionGrid road_condition(std::span<const ProbeRecord> records,
                              const ZoneSet& zones, const ZoneIndex& index,
                              const PeriodScheme& scheme, Date date,
                              const CongestionThresholds& thresholds = {});

struct ServiceExtent {
  double radius_km = 0.0;
  double covered_volume = 0.0;
  double total_volume = 0.0;
  std::size_t zones_within = 0;
};

// Each OD pair's count is attributed to its far end: the destination when the
// origin is the hub's zone, otherwise the origin. Returns the smallest radius
// around the hub whose zone centroids gather at least q of the volume.
// Throws ArgumentError for q outside (0, 1] and Error("no volume") when the
// matrix holds nothing attributable.
ServiceExtent compute_service_extent(const ODMatrix& od, const ZoneSet& zones,
                                     LonLat hub, double q);

}  // namespace hubflow
