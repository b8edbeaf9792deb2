#include "hubflow/geo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hubflow/error.hpp"

namespace hubflow {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

}  // namespace

Projection::Projection(LonLat origin)
    : origin_(origin), cos_lat_(std::cos(origin.lat * kDegToRad)) {}

PlanePoint Projection::to_plane(LonLat p) const {
  return {(p.lon - origin_.lon) * kDegToRad * cos_lat_ * kEarthRadiusKm,
          (p.lat - origin_.lat) * kDegToRad * kEarthRadiusKm};
}

LonLat Projection::to_lonlat(PlanePoint p) const {
  return {origin_.lon + p.x / (kDegToRad * cos_lat_ * kEarthRadiusKm),
          origin_.lat + p.y / (kDegToRad * kEarthRadiusKm)};
}

double Projection::distance_km(LonLat a, LonLat b) const {
  PlanePoint pa = to_plane(a);
  PlanePoint pb = to_plane(b);
  return std::hypot(pa.x - pb.x, pa.y - pb.y);
}

BBox bbox_of(std::span<const LonLat> pts) {
  BBox box{};
  if (pts.empty()) return box;
  box = {pts[0].lon, pts[0].lat, pts[0].lon, pts[0].lat};
  for (const auto& p : pts) {
    box.min_lon = std::min(box.min_lon, p.lon);
    box.max_lon = std::max(box.max_lon, p.lon);
    box.min_lat = std::min(box.min_lat, p.lat);
    box.max_lat = std::max(box.max_lat, p.lat);
  }
  return box;
}

double orient(LonLat a, LonLat b, LonLat p) {
  return (b.lon - a.lon) * (p.lat - a.lat) - (b.lat - a.lat) * (p.lon - a.lon);
}

bool on_segment(LonLat p, LonLat a, LonLat b) {
  if (orient(a, b, p) != 0.0) return false;
  return p.lon >= std::min(a.lon, b.lon) && p.lon <= std::max(a.lon, b.lon) &&
         p.lat >= std::min(a.lat, b.lat) && p.lat <= std::max(a.lat, b.lat);
}

bool point_in_ring(LonLat p, const Ring& ring) {
  bool inside = false;
  for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
    const LonLat a = ring[i];
    const LonLat b = ring[i + 1];
    if (on_segment(p, a, b)) return true;
    if ((a.lat > p.lat) != (b.lat > p.lat)) {
      // Crossing iff p lies west of the edge; the side test is the sign of
      // orient, flipped for downward edges.
      const double o = orient(a, b, p);
      if (a.lat < b.lat ? o > 0.0 : o < 0.0) inside = !inside;
    }
  }
  return inside;
}

Ring normalize_ring(const Ring& ring) {
  Ring out;
  out.reserve(ring.size());
  for (const auto& p : ring) {
    if (out.empty() || !(out.back() == p)) out.push_back(p);
  }
  return out;
}

bool segments_intersect(LonLat a, LonLat b, LonLat c, LonLat d) {
  const double o1 = orient(a, b, c);
  const double o2 = orient(a, b, d);
  const double o3 = orient(c, d, a);
  const double o4 = orient(c, d, b);
  auto sign = [](double v) { return (v > 0.0) - (v < 0.0); };
  if (sign(o1) * sign(o2) < 0 && sign(o3) * sign(o4) < 0) return true;
  return on_segment(c, a, b) || on_segment(d, a, b) || on_segment(a, c, d) ||
         on_segment(b, c, d);
}

std::optional<std::string> ring_problem(const Ring& raw) {
  if (raw.size() < 2 || !(raw.front() == raw.back())) {
    return std::string("ring is not closed");
  }
  const Ring ring = normalize_ring(raw);
  for (const auto& p : ring) {
    if (!std::isfinite(p.lon) || !std::isfinite(p.lat)) {
      return std::string("non-finite vertex");
    }
  }
  const std::size_t edges = ring.size() - 1;
  if (edges < 3) return std::string("fewer than 3 distinct vertices");
  {
    std::vector<std::pair<double, double>> distinct;
    for (std::size_t i = 0; i < edges; ++i) {
      distinct.emplace_back(ring[i].lon, ring[i].lat);
    }
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()),
                   distinct.end());
    if (distinct.size() < 3) return std::string("fewer than 3 distinct vertices");
  }

  for (std::size_t i = 0; i < edges; ++i) {
    for (std::size_t j = i + 1; j < edges; ++j) {
      const LonLat a = ring[i], b = ring[i + 1];
      const LonLat c = ring[j], d = ring[j + 1];
      if (j == i + 1) {
        // Shared vertex b == c; the edges may only touch there.
        if (on_segment(d, a, b) || on_segment(a, c, d)) {
          return "ring is self-intersecting (edges " + std::to_string(i) +
                 " and " + std::to_string(j) + " overlap)";
        }
      } else if (i == 0 && j == edges - 1) {
        // Shared vertex a == d.
        if (on_segment(c, a, b) || on_segment(b, c, d)) {
          return "ring is self-intersecting (edges " + std::to_string(i) +
                 " and " + std::to_string(j) + " overlap)";
        }
      } else if (segments_intersect(a, b, c, d)) {
        return "ring is self-intersecting (edges " + std::to_string(i) +
               " and " + std::to_string(j) + ")";
      }
    }
  }
  return std::nullopt;
}

double ring_signed_area(const Ring& ring) {
  if (ring.size() < 4) return 0.0;
  const LonLat o = ring.front();
  double twice = 0.0;
  for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
    const double x0 = ring[i].lon - o.lon, y0 = ring[i].lat - o.lat;
    const double x1 = ring[i + 1].lon - o.lon, y1 = ring[i + 1].lat - o.lat;
    twice += x0 * y1 - x1 * y0;
  }
  return twice / 2.0;
}

LonLat ring_centroid(const Ring& ring) {
  const LonLat o = ring.front();
  double twice = 0.0, cx = 0.0, cy = 0.0;
  for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
    const double x0 = ring[i].lon - o.lon, y0 = ring[i].lat - o.lat;
    const double x1 = ring[i + 1].lon - o.lon, y1 = ring[i + 1].lat - o.lat;
    const double cross = x0 * y1 - x1 * y0;
    twice += cross;
    cx += (x0 + x1) * cross;
    cy += (y0 + y1) * cross;
  }
  if (twice == 0.0) return o;
  return {o.lon + cx / (3.0 * twice), o.lat + cy / (3.0 * twice)};
}

void validate_geofence(const Geofence& fence) {
  if (const auto* circle = std::get_if<Circle>(&fence)) {
    if (!(circle->radius_m > 0.0) || !std::isfinite(circle->radius_m)) {
      throw ConfigError("geofence radius must be positive");
    }
    return;
  }
  if (auto problem = ring_problem(std::get<Ring>(fence))) {
    throw ConfigError("invalid geofence polygon: " + *problem);
  }
}

bool geofence_contains(const Geofence& fence, LonLat p) {
  if (const auto* circle = std::get_if<Circle>(&fence)) {
    const Projection proj(circle->center);
    return proj.distance_km(circle->center, p) * 1000.0 <= circle->radius_m;
  }
  return point_in_ring(p, std::get<Ring>(fence));
}

}  // namespace hubflow
