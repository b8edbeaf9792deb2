#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hubflow/geo.hpp"
#include "hubflow/probe.hpp"

namespace hubflow {

struct TrafficZone {
  int zone_id = 0;
  std::string name;
  std::string district;
  Ring ring;
};

// Zones sorted by zone_id. Construction validates every ring and id; overlaps
// between zones are reported as warnings rather than errors.
class ZoneSet {
 public:
  ZoneSet() = default;
  // Throws ValidationError naming each offending zone_id.
  explicit ZoneSet(std::vector<TrafficZone> zones);

  const std::vector<TrafficZone>& zones() const { return zones_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  std::size_t size() const { return zones_.size(); }
  bool empty() const { return zones_.empty(); }

  const TrafficZone* find(int zone_id) const;
  LonLat centroid(int zone_id) const;  // throws ArgumentError if unknown
  // Projection origin used for distances: the mean zone latitude.
  Projection projection() const;

 private:
  std::vector<TrafficZone> zones_;
  std::vector<LonLat> centroids_;
  std::vector<std::string> warnings_;
};

// GeoJSON FeatureCollection of Polygons with integer `zone_id`, `name` and
// `district` properties. Holes are not supported.
ZoneSet parse_zones_geojson(const std::string& text);
ZoneSet load_zones(const std::string& path);
std::string zones_to_geojson(const ZoneSet& zones);

// Deterministic rectangular partition of `box` into cols x rows cells with
// ids 1..cols*rows (row-major from the south-west corner), spread over
// `districts` district tags by column band.
ZoneSet make_grid_zones(const BBox& box, int cols, int rows, int districts = 6);

// Lowest zone_id whose ring contains p, scanning every zone.
std::optional<int> locate_brute_force(const ZoneSet& zones, LonLat p);

// Uniform-grid bucketing of zone bounding boxes. Immutable once built.
class ZoneIndex {
 public:
  ZoneIndex() = default;

  // Boundary points count as inside; on shared boundaries the lowest zone_id
  // wins.
  std::optional<int> locate(LonLat p) const;

 private:
  friend ZoneIndex build_index(const ZoneSet& zones);

  struct Entry {
    int zone_id;
    BBox box;
    Ring ring;
  };

  std::size_t cell_col(double lon) const;
  std::size_t cell_row(double lat) const;

  std::vector<Entry> entries_;  // ascending zone_id
  BBox extent_{};
  std::size_t cols_ = 0;
  std::size_t rows_ = 0;
  std::vector<std::vector<std::uint32_t>> cells_;  // entry indices, ascending
};

ZoneIndex build_index(const ZoneSet& zones);

std::vector<Trip> assign_trip_zones(std::vector<Trip> trips,
                                    const ZoneIndex& index);

}  // namespace hubflow
