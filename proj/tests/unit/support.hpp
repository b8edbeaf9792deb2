#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "hubflow/geo.hpp"
#include "hubflow/zones.hpp"

namespace hubflow::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() /
            ("hubflow_" + tag + "_" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline Ring square(double x0, double y0, double side) {
  return {{x0, y0}, {x0 + side, y0}, {x0 + side, y0 + side}, {x0, y0 + side}, {x0, y0}};
}

inline TrafficZone zone(int id, Ring ring) {
  return {id, "Z" + std::to_string(id), "D", std::move(ring)};
}

// Winding number around p; nonzero means inside. Independent of the ray
// casting under test. Boundary points are the caller's business.
inline int winding_number(LonLat p, const Ring& ring) {
  int wn = 0;
  for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
    const LonLat a = ring[i];
    const LonLat b = ring[i + 1];
    const double cross = (b.lon - a.lon) * (p.lat - a.lat) - (p.lon - a.lon) * (b.lat - a.lat);
    if (a.lat <= p.lat) {
      if (b.lat > p.lat && cross > 0) ++wn;
    } else if (b.lat <= p.lat && cross < 0) {
      --wn;
    }
  }
  return wn;
}

// Random convex polygon: sorted angles on a jittered circle.
inline Ring random_convex(std::mt19937_64& rng, LonLat center, double radius) {
  std::uniform_real_distribution<double> angle(0.0, 6.283185307179586);
  std::uniform_real_distribution<double> scale(0.5, 1.0);
  std::uniform_int_distribution<int> count(3, 9);
  std::vector<double> angles(count(rng));
  for (auto& a : angles) a = angle(rng);
  std::sort(angles.begin(), angles.end());
  angles.erase(std::unique(angles.begin(), angles.end()), angles.end());
  Ring ring;
  const double r = radius * scale(rng);
  for (double a : angles) {
    ring.push_back({center.lon + r * std::cos(a), center.lat + r * std::sin(a)});
  }
  ring.push_back(ring.front());
  return ring;
}

}  // namespace hubflow::testing
