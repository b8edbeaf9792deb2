#include "hubflow/transit.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <tuple>

namespace hubflow {

using nlohmann::json;

BusNetwork::BusNetwork(std::vector<Station> stations, std::vector<BusRoute> routes)
    : stations_(std::move(stations)), routes_(std::move(routes)) {
  std::vector<std::string> issues;
  for (std::size_t i = 0; i < stations_.size(); ++i) {
    if (stations_[i].id.empty()) {
      issues.push_back("station #" + std::to_string(i + 1) + " has an empty id");
      continue;
    }
    if (!station_lookup_.emplace(stations_[i].id, i).second) {
      issues.push_back("duplicate station id '" + stations_[i].id + "'");
    }
  }
  std::map<std::string, int> route_ids;
  route_stops_.resize(routes_.size());
  for (std::size_t r = 0; r < routes_.size(); ++r) {
    const auto& route = routes_[r];
    const std::string label = "route '" + route.id + "'";
    if (route.id.empty()) issues.push_back("route #" + std::to_string(r + 1) + " has an empty id");
    if (++route_ids[route.id] == 2) issues.push_back("duplicate " + label);
    if (route.stops.size() < 2) issues.push_back(label + " has fewer than 2 stops");
    for (std::size_t k = 0; k < route.stops.size(); ++k) {
      auto it = station_lookup_.find(route.stops[k]);
      if (it == station_lookup_.end()) {
        issues.push_back(label + " references unknown station '" +
                         route.stops[k] + "'");
        continue;
      }
      route_stops_[r].push_back(it->second);
      if (k > 0 && route.stops[k] == route.stops[k - 1]) {
        issues.push_back(label + " repeats station '" + route.stops[k] +
                         "' consecutively");
      }
    }
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));

  stops_at_.resize(stations_.size());
  for (std::size_t r = 0; r < route_stops_.size(); ++r) {
    for (std::size_t k = 0; k < route_stops_[r].size(); ++k) {
      stops_at_[route_stops_[r][k]].push_back({r, k});
    }
  }
}

std::optional<std::size_t> BusNetwork::station_index(const std::string& id) const {
  auto it = station_lookup_.find(id);
  if (it == station_lookup_.end()) return std::nullopt;
  return it->second;
}

BusNetwork parse_network_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("network file is not valid JSON: ") + e.what());
  }
  try {
    std::vector<Station> stations;
    for (const auto& s : doc.at("stations")) {
      stations.push_back({s.at("id").get<std::string>(), s.value("name", ""),
                          {s.at("lon").get<double>(), s.at("lat").get<double>()}});
    }
    std::vector<BusRoute> routes;
    for (const auto& r : doc.at("routes")) {
      routes.push_back({r.at("id").get<std::string>(),
                        r.at("stops").get<std::vector<std::string>>(),
                        r.value("one_way", false)});
    }
    return BusNetwork(std::move(stations), std::move(routes));
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed network file: ") + e.what());
  }
}

BusNetwork load_network(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open network file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_network_json(buf.str());
  } catch (const ValidationError& e) {
    auto issues = e.issues();
    issues.insert(issues.begin(), "in network file '" + path + "'");
    throw ValidationError(std::move(issues));
  } catch (const FormatError& e) {
    throw FormatError("network file '" + path + "': " + e.what());
  }
}

json network_to_json(const BusNetwork& net) {
  json stations = json::array();
  for (const auto& s : net.stations()) {
    stations.push_back({{"id", s.id},
                        {"name", s.name},
                        {"lon", s.location.lon},
                        {"lat", s.location.lat}});
  }
  json routes = json::array();
  for (const auto& r : net.routes()) {
    routes.push_back({{"id", r.id}, {"stops", r.stops}, {"one_way", r.one_way}});
  }
  return {{"stations", stations}, {"routes", routes}};
}

int TransferPlan::total_stops() const {
  int sum = 0;
  for (const auto& leg : legs) sum += leg.stops;
  return sum;
}

bool plan_ranks_before(const TransferPlan& a, const TransferPlan& b) {
  if (a.num_transfers() != b.num_transfers()) {
    return a.num_transfers() < b.num_transfers();
  }
  if (a.total_stops() != b.total_stops()) return a.total_stops() < b.total_stops();
  auto routes_of = [](const TransferPlan& p) {
    std::vector<std::string_view> ids;
    for (const auto& leg : p.legs) ids.push_back(leg.route_id);
    return ids;
  };
  const auto ra = routes_of(a);
  const auto rb = routes_of(b);
  if (ra != rb) return ra < rb;
  auto stations_of = [](const TransferPlan& p) {
    std::vector<std::string_view> ids;
    for (const auto& leg : p.legs) {
      ids.push_back(leg.board_station);
      ids.push_back(leg.alight_station);
    }
    return ids;
  };
  return stations_of(a) < stations_of(b);
}

namespace {

constexpr int kUnreachable = std::numeric_limits<int>::max();

struct Candidate {
  std::size_t route;
  std::size_t alight;
  int hops;
};

// Single-leg moves out of `station`, keeping the fewest hops when a looped
// route offers several.
std::vector<Candidate> legs_from(const BusNetwork& net, std::size_t station) {
  std::map<std::pair<std::size_t, std::size_t>, int> best;
  for (const auto& ref : net.stops_at(station)) {
    const auto& route = net.routes()[ref.route];
    const std::size_t n = route.stops.size();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == ref.position || (route.one_way && j < ref.position)) continue;
      const std::size_t alight = net.stop_station(ref.route, j);
      if (alight == station) continue;
      const int hops = static_cast<int>(j > ref.position ? j - ref.position
                                                         : ref.position - j);
      auto [it, inserted] = best.emplace(std::make_pair(ref.route, alight), hops);
      if (!inserted) it->second = std::min(it->second, hops);
    }
  }
  std::vector<Candidate> out;
  out.reserve(best.size());
  for (const auto& [key, hops] : best) out.push_back({key.first, key.second, hops});
  return out;
}

// Minimum number of legs from every station to `dest`.
std::vector<int> legs_to_destination(const BusNetwork& net, std::size_t dest) {
  std::vector<int> dist(net.stations().size(), kUnreachable);
  std::deque<std::size_t> queue{dest};
  dist[dest] = 0;
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.pop_front();
    for (const auto& ref : net.stops_at(v)) {
      const auto& route = net.routes()[ref.route];
      for (std::size_t i = 0; i < route.stops.size(); ++i) {
        if (i == ref.position || (route.one_way && i > ref.position)) continue;
        const std::size_t u = net.stop_station(ref.route, i);
        if (dist[u] == kUnreachable) {
          dist[u] = dist[v] + 1;
          queue.push_back(u);
        }
      }
    }
  }
  return dist;
}

class PlanSearch {
 public:
  PlanSearch(const BusNetwork& net, std::size_t dest)
      : net_(net), dest_(dest), to_dest_(legs_to_destination(net, dest)) {}

  // Appends every simple plan with exactly `legs` legs.
  void collect(std::size_t origin, int legs, std::vector<TransferPlan>& out) {
    if (to_dest_[origin] > legs) return;
    legs_target_ = legs;
    visited_.assign(net_.stations().size(), false);
    visited_[origin] = true;
    path_.clear();
    extend(origin, std::nullopt, out);
  }

 private:
  const std::vector<Candidate>& moves(std::size_t station) {
    auto it = cache_.find(station);
    if (it == cache_.end()) it = cache_.emplace(station, legs_from(net_, station)).first;
    return it->second;
  }

  void extend(std::size_t at, std::optional<std::size_t> prev_route,
              std::vector<TransferPlan>& out) {
    const int used = static_cast<int>(path_.size());
    const int left_after = legs_target_ - used - 1;
    for (const auto& c : moves(at)) {
      if (prev_route && *prev_route == c.route) continue;
      if (visited_[c.alight]) continue;
      if (left_after == 0) {
        if (c.alight != dest_) continue;
      } else if (c.alight == dest_ || to_dest_[c.alight] > left_after) {
        continue;
      }
      path_.push_back({net_.routes()[c.route].id, net_.stations()[at].id,
                       net_.stations()[c.alight].id, c.hops});
      if (left_after == 0) {
        out.push_back({path_});
      } else {
        visited_[c.alight] = true;
        extend(c.alight, c.route, out);
        visited_[c.alight] = false;
      }
      path_.pop_back();
    }
  }

  const BusNetwork& net_;
  std::size_t dest_;
  std::vector<int> to_dest_;
  std::unordered_map<std::size_t, std::vector<Candidate>> cache_;
  int legs_target_ = 0;
  std::vector<bool> visited_;
  std::vector<TransferLeg> path_;
};

}  // namespace

std::vector<TransferPlan> find_plans(const BusNetwork& net,
                                     const std::string& origin,
                                     const std::string& dest, int max_transfers,
                                     std::size_t limit) {
  const auto from = net.station_index(origin);
  if (!from) throw UnknownStationError("unknown station '" + origin + "'");
  const auto to = net.station_index(dest);
  if (!to) throw UnknownStationError("unknown station '" + dest + "'");
  if (*from == *to) throw ArgumentError("origin and destination are the same station");
  if (max_transfers < 0) throw ArgumentError("max_transfers must be non-negative");

  // Layer by transfer count; once a layer fills the cut-off, later layers
  // cannot rank inside it.
  PlanSearch search(net, *to);
  std::vector<TransferPlan> plans;
  for (int legs = 1; legs <= max_transfers + 1; ++legs) {
    std::vector<TransferPlan> layer;
    search.collect(*from, legs, layer);
    std::sort(layer.begin(), layer.end(), plan_ranks_before);
    plans.insert(plans.end(), layer.begin(), layer.end());
    if (plans.size() >= limit) break;
  }
  if (plans.size() > limit) plans.resize(limit);
  return plans;
}

}  // namespace hubflow
