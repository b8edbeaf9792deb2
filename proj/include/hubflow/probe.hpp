#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hubflow/geo.hpp"
#include "hubflow/time.hpp"

namespace hubflow {

enum class VehicleState { out_of_service = 0, in_service = 1, unknown = 2 };

enum class TravelMode { taxi };

std::string_view to_string(VehicleState s);
std::string_view to_string(TravelMode m);

struct ProbeRecord {
  std::string vehicle_id;
  EpochSeconds timestamp = 0;
  LonLat position;
  double speed_kmh = 0.0;
  double heading_deg = 0.0;
  bool occupied = false;
  VehicleState state = VehicleState::unknown;

  friend bool operator==(const ProbeRecord&, const ProbeRecord&) = default;
};

struct RejectedLine {
  std::size_t line_number = 0;  // 1-based, header is line 1
  std::string reason;
  std::string raw;
};

struct ParsedProbes {
  std::vector<ProbeRecord> records;
  std::vector<RejectedLine> rejects;
};

inline constexpr std::string_view kProbeCsvHeader =
    "vehicle_id,timestamp,lon,lat,speed_kmh,heading_deg,state,occupied";

// Throws IoError when the stream cannot be read and FormatError when the
// header line does not match kProbeCsvHeader. Every other line becomes
// either a record or a reject, in input order.
ParsedProbes parse_probe_csv(std::istream& in);
ParsedProbes parse_probe_file(const std::string& path);

// Parses one data line. On failure returns nullopt and sets `reason`.
std::optional<ProbeRecord> parse_probe_line(std::string_view line,
                                            std::string& reason);

std::string format_probe_line(const ProbeRecord& r);

struct Track {
  std::string vehicle_id;
  std::vector<ProbeRecord> records;  // strictly increasing timestamps
};

// Groups by vehicle (tracks ordered by vehicle_id), sorts by time, drops exact
// duplicates; of several different records sharing a timestamp the first in
// input order survives.
std::vector<Track> build_tracks(std::vector<ProbeRecord> records);

struct Trip {
  std::string vehicle_id;
  EpochSeconds pickup_time = 0;
  EpochSeconds dropoff_time = 0;
  LonLat pickup_point;
  LonLat dropoff_point;
  std::optional<int> pickup_zone;
  std::optional<int> dropoff_zone;
  bool truncated_start = false;
  bool truncated_end = false;
  TravelMode mode = TravelMode::taxi;

  // One-record runs have zero duration.
  bool degenerate() const { return dropoff_time <= pickup_time; }
  EpochSeconds duration_s() const { return dropoff_time - pickup_time; }

  friend bool operator==(const Trip&, const Trip&) = default;
};

// One trip per maximal run of occupied records.
std::vector<Trip> extract_trips(const Track& track);

// Degenerate trips are dropped unless include_degenerate is set.
std::vector<Trip> countable_trips(std::vector<Trip> trips,
                                  bool include_degenerate);

enum class HubDirection { enter, exit };

std::string_view to_string(HubDirection d);

struct HubEvent {
  std::string vehicle_id;
  EpochSeconds time = 0;
  HubDirection direction = HubDirection::enter;

  friend bool operator==(const HubEvent&, const HubEvent&) = default;
};

// One event per inside/outside transition, stamped with the first record on
// the new side. Throws ConfigError for an invalid geofence.
std::vector<HubEvent> detect_hub_events(const Track& track,
                                        const Geofence& fence);

}  // namespace hubflow
