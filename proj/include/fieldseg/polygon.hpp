#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fieldseg/raster.hpp"

namespace fieldseg {

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

/// Closed ring: first vertex repeated as the last.
using Ring = std::vector<Point>;

struct PolygonPart {
  Ring exterior;
  std::vector<Ring> holes;
  bool operator==(const PolygonPart&) const = default;
};

/// A labelled field. Most fields have one part; an id whose pixels form
/// several 4-connected pieces is carried as a multi-part polygon.
struct FieldPolygon {
  std::uint32_t id = 0;
  std::vector<PolygonPart> parts;

  /// Unsigned area: exteriors minus holes.
  double area() const noexcept;
  /// Throws kInvariant on id == 0 or an open / too-short ring.
  void validate() const;

  bool operator==(const FieldPolygon&) const = default;
};

/// Shoelace area; positive for rings that run clockwise on screen (y down).
double signed_area(const Ring& ring) noexcept;

/// Even-odd point test against one ring. Points on the ring are unspecified.
bool point_in_ring(const Ring& ring, Point p) noexcept;

/// Throws kInvariant when polygon ids are zero or repeated.
void check_unique_ids(std::span<const FieldPolygon> polys);

/// Map-space polygon to pixel space (x = column, y = row, pixel corners on
/// integers) through the geotransform.
FieldPolygon to_pixel_space(const FieldPolygon& poly, const GeoTransform& geo);
FieldPolygon to_map_space(const FieldPolygon& poly, const GeoTransform& geo);

/// Visits every pixel (row, col) of a width x height frame whose center lies
/// strictly inside the polygon under the even-odd rule over all rings.
///
/// Scanline rule: for row r the sample line is y = r + 0.5; an edge
/// contributes a crossing when min(y0, y1) <= y < max(y0, y1); column c is
/// inside a span (xa, xb) when xa < c + 0.5 < xb.
template <typename Fn>
void scan_fill(const FieldPolygon& poly, int width, int height, Fn&& visit) {
  struct Edge {
    Point a, b;
  };
  std::vector<Edge> edges;
  double ymin = INFINITY;
  double ymax = -INFINITY;
  auto add_ring = [&](const Ring& ring) {
    for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
      if (ring[i].y == ring[i + 1].y) continue;
      edges.push_back({ring[i], ring[i + 1]});
      ymin = std::min({ymin, ring[i].y, ring[i + 1].y});
      ymax = std::max({ymax, ring[i].y, ring[i + 1].y});
    }
  };
  for (const auto& part : poly.parts) {
    add_ring(part.exterior);
    for (const auto& hole : part.holes) add_ring(hole);
  }
  if (edges.empty()) return;

  const double hmax = static_cast<double>(height);
  const int r0 = static_cast<int>(std::clamp(std::floor(ymin - 0.5), 0.0, hmax));
  const int r1 = static_cast<int>(std::clamp(std::ceil(ymax - 0.5), -1.0, hmax - 1.0));
  std::vector<double> xs;
  for (int r = r0; r <= r1; ++r) {
    const double y = r + 0.5;
    xs.clear();
    for (const auto& e : edges) {
      const double lo = std::min(e.a.y, e.b.y);
      const double hi = std::max(e.a.y, e.b.y);
      if (y < lo || y >= hi) continue;
      xs.push_back(e.a.x + (y - e.a.y) * (e.b.x - e.a.x) / (e.b.y - e.a.y));
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      const double c_lo = std::floor(xs[k] - 0.5) + 1.0;
      const double c_hi = std::ceil(xs[k + 1] - 0.5) - 1.0;
      const double wmax = static_cast<double>(width);
      const int c0 = static_cast<int>(std::clamp(c_lo, 0.0, wmax));
      const int c1 = static_cast<int>(std::clamp(c_hi, -1.0, wmax - 1.0));
      for (int c = c0; c <= c1; ++c) visit(r, c);
    }
  }
}

/// True when the enclosed area is zero (collinear or repeated vertices).
bool is_degenerate(const FieldPolygon& poly) noexcept;

// GeoJSON subset: a FeatureCollection whose features carry a Polygon or
// MultiPolygon geometry and a numeric "id" property. Other geometry types
// and features without an id are rejected.
std::vector<FieldPolygon> parse_geojson(const std::string& text);
std::string to_geojson(std::span<const FieldPolygon> polys, const std::string& crs = {});
std::vector<FieldPolygon> read_geojson(const std::filesystem::path& path);
void write_geojson(const std::filesystem::path& path, std::span<const FieldPolygon> polys,
                   const std::string& crs = {});

}  // namespace fieldseg
