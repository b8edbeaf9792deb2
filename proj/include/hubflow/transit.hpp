#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "hubflow/error.hpp"
#include "hubflow/geo.hpp"

namespace hubflow {

struct Station {
  std::string id;
  std::string name;
  LonLat location;
};

struct BusRoute {
  std::string id;
  std::vector<std::string> stops;
  bool one_way = false;
};

// Immutable once constructed. Routes ride both ways unless flagged one_way.
class BusNetwork {
 public:
  struct StopRef {
    std::size_t route;     // index into routes()
    std::size_t position;  // index into that route's stops
  };

  BusNetwork() = default;
  // Throws ValidationError naming every unknown station, duplicate id and
  // malformed route.
  BusNetwork(std::vector<Station> stations, std::vector<BusRoute> routes);

  const std::vector<Station>& stations() const { return stations_; }
  const std::vector<BusRoute>& routes() const { return routes_; }
  std::optional<std::size_t> station_index(const std::string& id) const;
  const std::vector<StopRef>& stops_at(std::size_t station) const {
    return stops_at_[station];
  }
  // Station index of a route stop.
  std::size_t stop_station(std::size_t route, std::size_t position) const {
    return route_stops_[route][position];
  }

 private:
  std::vector<Station> stations_;
  std::vector<BusRoute> routes_;
  std::unordered_map<std::string, std::size_t> station_lookup_;
  std::vector<std::vector<std::size_t>> route_stops_;
  std::vector<std::vector<StopRef>> stops_at_;
};

// {"stations": [{id, name, lon, lat}], "routes": [{id, stops, one_way}]}
BusNetwork parse_network_json(const std::string& text);
BusNetwork load_network(const std::string& path);
nlohmann::json network_to_json(const BusNetwork& net);

struct TransferLeg {
  std::string route_id;
  std::string board_station;
  std::string alight_station;
  int stops = 0;  // inter-station hops ridden

  friend bool operator==(const TransferLeg&, const TransferLeg&) = default;
};

struct TransferPlan {
  std::vector<TransferLeg> legs;

  int num_transfers() const { return static_cast<int>(legs.size()) - 1; }
  int total_stops() const;

  friend bool operator==(const TransferPlan&, const TransferPlan&) = default;
};

// Fewer transfers first, then fewer ridden stops, then route ids
// lexicographically, then the station sequence.
bool plan_ranks_before(const TransferPlan& a, const TransferPlan& b);

// Every simple plan (leg endpoints never repeat a station, consecutive legs
// use different routes) with at most max_transfers transfers, ranked and cut
// to `limit`. Throws ArgumentError for unknown stations, origin == dest or a
// negative transfer budget.
std::vector<TransferPlan> find_plans(const BusNetwork& net,
                                     const std::string& origin,
                                     const std::string& dest,
                                     int max_transfers = 2,
                                     std::size_t limit = 10);

// Thrown by find_plans for ids not present in the network, so servers can
// answer 404 rather than 400.
class UnknownStationError : public ArgumentError {
 public:
  using ArgumentError::ArgumentError;
};

}  // namespace hubflow
