#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "hubflow/od.hpp"
#include "hubflow/probe.hpp"

namespace hubflow {

// Where a trip sits relative to the hub geofence.
enum class HubRole { none, departing, arriving, internal };

std::string_view to_string(HubRole r);
HubRole hub_role_of(const Trip& trip, const Geofence& fence);

struct BundleTrip {
  Trip trip;
  HubRole role = HubRole::none;
};

// 64-bit FNV-1a, hex encoded. Used for config and artifact fingerprints.
std::string fnv1a_hex(std::string_view bytes);

void write_trips_csv(std::ostream& out, const std::vector<BundleTrip>& trips);
std::vector<BundleTrip> read_trips_csv(std::istream& in);

void write_hub_events_csv(std::ostream& out, const std::vector<HubEvent>& events);

void write_speeds_csv(std::ostream& out, const std::vector<SpeedCell>& cells);
std::vector<SpeedCell> read_speeds_csv(std::istream& in);

void write_rejects_csv(std::ostream& out, const std::vector<RejectedLine>& rejects);

}  // namespace hubflow
