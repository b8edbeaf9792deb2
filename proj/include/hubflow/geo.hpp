#pragma once

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace hubflow {

inline constexpr double kEarthRadiusKm = 6371.0088;

struct LonLat {
  double lon = 0.0;
  double lat = 0.0;

  friend bool operator==(const LonLat&, const LonLat&) = default;
};

// Kilometres east/north of the projection origin.
struct PlanePoint {
  double x = 0.0;
  double y = 0.0;
};

// Equirectangular projection about a reference latitude. Good to well under
// a percent at city scale, which is all the analyses need.
class Projection {
 public:
  explicit Projection(LonLat origin);

  PlanePoint to_plane(LonLat p) const;
  LonLat to_lonlat(PlanePoint p) const;
  double distance_km(LonLat a, LonLat b) const;

  LonLat origin() const { return origin_; }

 private:
  LonLat origin_;
  double cos_lat_;
};

struct BBox {
  double min_lon = 0.0;
  double min_lat = 0.0;
  double max_lon = 0.0;
  double max_lat = 0.0;

  bool contains(LonLat p) const {
    return p.lon >= min_lon && p.lon <= max_lon && p.lat >= min_lat &&
           p.lat <= max_lat;
  }
};

// Closed ring: first vertex repeated as the last one.
using Ring = std::vector<LonLat>;

BBox bbox_of(std::span<const LonLat> pts);

// Sign of the cross product (b - a) x (p - a): >0 left, <0 right, 0 on line.
double orient(LonLat a, LonLat b, LonLat p);
bool on_segment(LonLat p, LonLat a, LonLat b);

// Ray casting; points on an edge or vertex count as inside.
bool point_in_ring(LonLat p, const Ring& ring);

// Empty when the ring is a valid closed simple polygon with at least three
// distinct vertices, otherwise a short reason.
std::optional<std::string> ring_problem(const Ring& ring);

// Consecutive repeated vertices removed; closure preserved.
Ring normalize_ring(const Ring& ring);

double ring_signed_area(const Ring& ring);
LonLat ring_centroid(const Ring& ring);

// True when the segments [a,b] and [c,d] share at least one point.
bool segments_intersect(LonLat a, LonLat b, LonLat c, LonLat d);

struct Circle {
  LonLat center;
  double radius_m = 0.0;
};

using Geofence = std::variant<Circle, Ring>;

// Throws ConfigError for a non-positive radius or a non-simple polygon.
void validate_geofence(const Geofence& fence);
bool geofence_contains(const Geofence& fence, LonLat p);

}  // namespace hubflow
