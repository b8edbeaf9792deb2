#include "hubflow/zones.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hubflow/error.hpp"

namespace hubflow {

namespace {

using nlohmann::json;

bool on_boundary(LonLat p, const Ring& ring) {
  for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
    if (on_segment(p, ring[i], ring[i + 1])) return true;
  }
  return false;
}

bool strictly_inside(LonLat p, const Ring& ring) {
  return point_in_ring(p, ring) && !on_boundary(p, ring);
}

bool boxes_overlap(const BBox& a, const BBox& b) {
  return a.min_lon < b.max_lon && b.min_lon < a.max_lon &&
         a.min_lat < b.max_lat && b.min_lat < a.max_lat;
}

bool edges_cross(const Ring& a, const Ring& b) {
  for (std::size_t i = 0; i + 1 < a.size(); ++i) {
    for (std::size_t j = 0; j + 1 < b.size(); ++j) {
      const double o1 = orient(a[i], a[i + 1], b[j]);
      const double o2 = orient(a[i], a[i + 1], b[j + 1]);
      const double o3 = orient(b[j], b[j + 1], a[i]);
      const double o4 = orient(b[j], b[j + 1], a[i + 1]);
      if (((o1 > 0 && o2 < 0) || (o1 < 0 && o2 > 0)) &&
          ((o3 > 0 && o4 < 0) || (o3 < 0 && o4 > 0))) {
        return true;
      }
    }
  }
  return false;
}

bool interiors_overlap(const TrafficZone& a, LonLat centroid_a,
                       const TrafficZone& b, LonLat centroid_b) {
  if (edges_cross(a.ring, b.ring)) return true;
  for (const auto& v : a.ring) {
    if (strictly_inside(v, b.ring)) return true;
  }
  for (const auto& v : b.ring) {
    if (strictly_inside(v, a.ring)) return true;
  }
  // Congruent or nested rings share every vertex on the boundary; probe with
  // interior points.
  if (strictly_inside(centroid_a, a.ring) && strictly_inside(centroid_a, b.ring)) {
    return true;
  }
  return strictly_inside(centroid_b, b.ring) &&
         strictly_inside(centroid_b, a.ring);
}

}  // namespace

ZoneSet::ZoneSet(std::vector<TrafficZone> zones) {
  std::sort(zones.begin(), zones.end(),
            [](const TrafficZone& a, const TrafficZone& b) {
              return a.zone_id < b.zone_id;
            });
  std::vector<std::string> issues;
  for (std::size_t i = 0; i < zones.size(); ++i) {
    if (i > 0 && zones[i].zone_id == zones[i - 1].zone_id) {
      issues.push_back("zone " + std::to_string(zones[i].zone_id) +
                       ": duplicate zone_id");
    }
    if (auto problem = ring_problem(zones[i].ring)) {
      issues.push_back("zone " + std::to_string(zones[i].zone_id) + ": " +
                       *problem);
    }
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));

  for (auto& z : zones) z.ring = normalize_ring(z.ring);
  zones_ = std::move(zones);
  centroids_.reserve(zones_.size());
  std::vector<BBox> boxes;
  for (const auto& z : zones_) {
    centroids_.push_back(ring_centroid(z.ring));
    boxes.push_back(bbox_of(z.ring));
  }
  for (std::size_t i = 0; i < zones_.size(); ++i) {
    for (std::size_t j = i + 1; j < zones_.size(); ++j) {
      if (!boxes_overlap(boxes[i], boxes[j])) continue;
      if (interiors_overlap(zones_[i], centroids_[i], zones_[j], centroids_[j])) {
        warnings_.push_back("zones " + std::to_string(zones_[i].zone_id) +
                            " and " + std::to_string(zones_[j].zone_id) +
                            " overlap");
      }
    }
  }
}

const TrafficZone* ZoneSet::find(int zone_id) const {
  auto it = std::lower_bound(
      zones_.begin(), zones_.end(), zone_id,
      [](const TrafficZone& z, int id) { return z.zone_id < id; });
  if (it == zones_.end() || it->zone_id != zone_id) return nullptr;
  return &*it;
}

LonLat ZoneSet::centroid(int zone_id) const {
  const TrafficZone* z = find(zone_id);
  if (!z) throw ArgumentError("unknown zone " + std::to_string(zone_id));
  return centroids_[static_cast<std::size_t>(z - zones_.data())];
}

Projection ZoneSet::projection() const {
  if (zones_.empty()) return Projection({0.0, 0.0});
  double lon = 0.0, lat = 0.0;
  for (const auto& c : centroids_) {
    lon += c.lon;
    lat += c.lat;
  }
  const double n = static_cast<double>(centroids_.size());
  return Projection({lon / n, lat / n});
}

ZoneSet parse_zones_geojson(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("zone file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" ||
      !doc.contains("features") || !doc["features"].is_array()) {
    throw FormatError("zone file must be a GeoJSON FeatureCollection");
  }

  std::vector<TrafficZone> zones;
  std::vector<std::string> issues;
  std::size_t feature_no = 0;
  for (const auto& feature : doc["features"]) {
    ++feature_no;
    const std::string where = "feature " + std::to_string(feature_no);
    try {
      const auto& props = feature.at("properties");
      TrafficZone zone;
      if (!props.contains("zone_id") || !props["zone_id"].is_number_integer()) {
        issues.push_back(where + ": missing integer zone_id");
        continue;
      }
      zone.zone_id = props["zone_id"].get<int>();
      zone.name = props.value("name", "");
      zone.district = props.value("district", "");
      const auto& geometry = feature.at("geometry");
      if (geometry.value("type", "") != "Polygon") {
        issues.push_back("zone " + std::to_string(zone.zone_id) +
                         ": geometry must be a Polygon");
        continue;
      }
      const auto& rings = geometry.at("coordinates");
      if (!rings.is_array() || rings.empty()) {
        issues.push_back("zone " + std::to_string(zone.zone_id) +
                         ": empty polygon");
        continue;
      }
      if (rings.size() > 1) {
        issues.push_back("zone " + std::to_string(zone.zone_id) +
                         ": polygons with holes are not supported");
        continue;
      }
      for (const auto& pos : rings[0]) {
        zone.ring.push_back({pos.at(0).get<double>(), pos.at(1).get<double>()});
      }
      zones.push_back(std::move(zone));
    } catch (const json::exception& e) {
      issues.push_back(where + ": malformed (" + e.what() + ")");
    }
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));
  return ZoneSet(std::move(zones));
}

ZoneSet load_zones(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open zone file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_zones_geojson(buf.str());
  } catch (const ValidationError& e) {
    auto issues = e.issues();
    issues.insert(issues.begin(), "in zone file '" + path + "'");
    throw ValidationError(std::move(issues));
  } catch (const FormatError& e) {
    throw FormatError("zone file '" + path + "': " + e.what());
  }
}

std::string zones_to_geojson(const ZoneSet& zones) {
  json features = json::array();
  for (const auto& z : zones.zones()) {
    json ring = json::array();
    for (const auto& p : z.ring) ring.push_back({p.lon, p.lat});
    features.push_back({
        {"type", "Feature"},
        {"properties",
         {{"zone_id", z.zone_id}, {"name", z.name}, {"district", z.district}}},
        {"geometry", {{"type", "Polygon"}, {"coordinates", {ring}}}},
    });
  }
  json doc = {{"type", "FeatureCollection"}, {"features", features}};
  return doc.dump(1);
}

ZoneSet make_grid_zones(const BBox& box, int cols, int rows, int districts) {
  if (cols < 1 || rows < 1 || districts < 1) {
    throw ArgumentError("grid needs at least one column, row and district");
  }
  if (!(box.max_lon > box.min_lon) || !(box.max_lat > box.min_lat)) {
    throw ArgumentError("grid bounding box is empty");
  }
  static const char* kDistricts[] = {"Nanshan", "Futian",  "Luohu",
                                     "Yantian", "Bao'an", "Longgang"};
  const double dx = (box.max_lon - box.min_lon) / cols;
  const double dy = (box.max_lat - box.min_lat) / rows;
  auto lon_at = [&](int c) {
    return c == cols ? box.max_lon : box.min_lon + c * dx;
  };
  auto lat_at = [&](int r) {
    return r == rows ? box.max_lat : box.min_lat + r * dy;
  };

  std::vector<TrafficZone> zones;
  zones.reserve(static_cast<std::size_t>(cols) * rows);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      TrafficZone z;
      z.zone_id = r * cols + c + 1;
      char name[16];
      std::snprintf(name, sizeof name, "Z%03d", z.zone_id);
      z.name = name;
      const int d = c * districts / cols;
      z.district = d < 6 ? kDistricts[d] : "District " + std::to_string(d + 1);
      const double x0 = lon_at(c), x1 = lon_at(c + 1);
      const double y0 = lat_at(r), y1 = lat_at(r + 1);
      z.ring = {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}, {x0, y0}};
      zones.push_back(std::move(z));
    }
  }
  return ZoneSet(std::move(zones));
}

std::optional<int> locate_brute_force(const ZoneSet& zones, LonLat p) {
  for (const auto& z : zones.zones()) {
    if (point_in_ring(p, z.ring)) return z.zone_id;
  }
  return std::nullopt;
}

ZoneIndex build_index(const ZoneSet& zones) {
  ZoneIndex index;
  if (zones.empty()) return index;
  std::vector<LonLat> all;
  for (const auto& z : zones.zones()) {
    index.entries_.push_back({z.zone_id, bbox_of(z.ring), z.ring});
    all.insert(all.end(), z.ring.begin(), z.ring.end());
  }
  index.extent_ = bbox_of(all);

  // Roughly four cells per zone, shaped after the extent's aspect ratio.
  const double width = index.extent_.max_lon - index.extent_.min_lon;
  const double height = index.extent_.max_lat - index.extent_.min_lat;
  const double target = 4.0 * static_cast<double>(zones.size());
  const double aspect = height > 0.0 && width > 0.0 ? width / height : 1.0;
  index.cols_ = static_cast<std::size_t>(
      std::clamp(std::round(std::sqrt(target * aspect)), 1.0, 1024.0));
  index.rows_ = static_cast<std::size_t>(std::clamp(
      std::round(target / static_cast<double>(index.cols_)), 1.0, 1024.0));
  index.cells_.assign(index.cols_ * index.rows_, {});

  for (std::uint32_t e = 0; e < index.entries_.size(); ++e) {
    const BBox& b = index.entries_[e].box;
    const std::size_t c0 = index.cell_col(b.min_lon);
    const std::size_t c1 = index.cell_col(b.max_lon);
    const std::size_t r0 = index.cell_row(b.min_lat);
    const std::size_t r1 = index.cell_row(b.max_lat);
    for (std::size_t r = r0; r <= r1; ++r) {
      for (std::size_t c = c0; c <= c1; ++c) {
        index.cells_[r * index.cols_ + c].push_back(e);
      }
    }
  }
  return index;
}

std::size_t ZoneIndex::cell_col(double lon) const {
  const double width = extent_.max_lon - extent_.min_lon;
  if (!(width > 0.0)) return 0;
  const double f = std::floor((lon - extent_.min_lon) / width *
                              static_cast<double>(cols_));
  return static_cast<std::size_t>(
      std::clamp(f, 0.0, static_cast<double>(cols_ - 1)));
}

std::size_t ZoneIndex::cell_row(double lat) const {
  const double height = extent_.max_lat - extent_.min_lat;
  if (!(height > 0.0)) return 0;
  const double f = std::floor((lat - extent_.min_lat) / height *
                              static_cast<double>(rows_));
  return static_cast<std::size_t>(
      std::clamp(f, 0.0, static_cast<double>(rows_ - 1)));
}

std::optional<int> ZoneIndex::locate(LonLat p) const {
  if (entries_.empty() || !std::isfinite(p.lon) || !std::isfinite(p.lat) ||
      !extent_.contains(p)) {
    return std::nullopt;
  }
  for (std::uint32_t e : cells_[cell_row(p.lat) * cols_ + cell_col(p.lon)]) {
    const Entry& entry = entries_[e];
    if (entry.box.contains(p) && point_in_ring(p, entry.ring)) {
      return entry.zone_id;
    }
  }
  return std::nullopt;
}

std::vector<Trip> assign_trip_zones(std::vector<Trip> trips,
                                    const ZoneIndex& index) {
  for (auto& t : trips) {
    t.pickup_zone = index.locate(t.pickup_point);
    t.dropoff_zone = index.locate(t.dropoff_point);
  }
  return trips;
}

}  // namespace hubflow
