#include "fieldseg/polygon.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace fieldseg {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

void validate_ring(const Ring& ring, std::uint32_t id) {
  if (ring.size() < 4)
    fail(ErrorCode::kInvariant, "polygon " + std::to_string(id) + ": ring needs at least 4 vertices");
  if (ring.front() != ring.back())
    fail(ErrorCode::kInvariant, "polygon " + std::to_string(id) + ": ring is not closed");
  for (const auto& p : ring)
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
      fail(ErrorCode::kInvariant, "polygon " + std::to_string(id) + ": non-finite vertex");
}

template <typename Fn>
Ring map_ring(const Ring& ring, Fn&& fn) {
  Ring out;
  out.reserve(ring.size());
  for (const auto& p : ring) out.push_back(fn(p));
  return out;
}

template <typename Fn>
FieldPolygon map_polygon(const FieldPolygon& poly, Fn&& fn) {
  FieldPolygon out{poly.id, {}};
  for (const auto& part : poly.parts) {
    PolygonPart q{map_ring(part.exterior, fn), {}};
    for (const auto& h : part.holes) q.holes.push_back(map_ring(h, fn));
    out.parts.push_back(std::move(q));
  }
  return out;
}

Ring ring_from_json(const json& j) {
  Ring ring;
  for (const auto& pt : j) {
    if (!pt.is_array() || pt.size() < 2)
      fail(ErrorCode::kInvalidArgument, "geojson: coordinate must be [x, y]");
    ring.push_back({pt[0].get<double>(), pt[1].get<double>()});
  }
  return ring;
}

PolygonPart part_from_json(const json& rings) {
  if (!rings.is_array() || rings.empty())
    fail(ErrorCode::kInvalidArgument, "geojson: polygon needs at least one ring");
  PolygonPart part{ring_from_json(rings[0]), {}};
  for (std::size_t i = 1; i < rings.size(); ++i) part.holes.push_back(ring_from_json(rings[i]));
  return part;
}

ordered_json ring_to_json(const Ring& ring) {
  ordered_json a = ordered_json::array();
  for (const auto& p : ring) a.push_back({p.x, p.y});
  return a;
}

ordered_json part_to_json(const PolygonPart& part) {
  ordered_json a = ordered_json::array();
  a.push_back(ring_to_json(part.exterior));
  for (const auto& h : part.holes) a.push_back(ring_to_json(h));
  return a;
}

}  // namespace

double signed_area(const Ring& ring) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < ring.size(); ++i)
    s += ring[i].x * ring[i + 1].y - ring[i + 1].x * ring[i].y;
  return 0.5 * s;
}

bool point_in_ring(const Ring& ring, Point p) noexcept {
  bool inside = false;
  for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
    const Point& a = ring[i];
    const Point& b = ring[i + 1];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x) inside = !inside;
    }
  }
  return inside;
}

double FieldPolygon::area() const noexcept {
  double a = 0.0;
  for (const auto& part : parts) {
    a += std::abs(signed_area(part.exterior));
    for (const auto& h : part.holes) a -= std::abs(signed_area(h));
  }
  return a;
}

void FieldPolygon::validate() const {
  if (id == 0) fail(ErrorCode::kInvariant, "polygon id must be > 0");
  if (parts.empty()) fail(ErrorCode::kInvariant, "polygon " + std::to_string(id) + " has no rings");
  for (const auto& part : parts) {
    validate_ring(part.exterior, id);
    for (const auto& h : part.holes) validate_ring(h, id);
  }
}

bool is_degenerate(const FieldPolygon& poly) noexcept {
  return !(poly.area() > 0.0);
}

void check_unique_ids(std::span<const FieldPolygon> polys) {
  std::set<std::uint32_t> seen;
  for (const auto& p : polys) {
    if (p.id == 0) fail(ErrorCode::kInvariant, "polygon id must be > 0");
    if (!seen.insert(p.id).second)
      fail(ErrorCode::kInvariant, "duplicate polygon id " + std::to_string(p.id));
  }
}

FieldPolygon to_pixel_space(const FieldPolygon& poly, const GeoTransform& geo) {
  return map_polygon(poly, [&](Point p) {
    auto [c, r] = geo.to_pixel(p.x, p.y);
    return Point{c, r};
  });
}

FieldPolygon to_map_space(const FieldPolygon& poly, const GeoTransform& geo) {
  return map_polygon(poly, [&](Point p) {
    auto [x, y] = geo.to_map(p.x, p.y);
    return Point{x, y};
  });
}

std::vector<FieldPolygon> parse_geojson(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kInvalidArgument, std::string("geojson: ") + e.what());
  }
  std::vector<json> features;
  if (doc.value("type", "") == "FeatureCollection") {
    for (const auto& f : doc.at("features")) features.push_back(f);
  } else if (doc.value("type", "") == "Feature") {
    features.push_back(doc);
  } else {
    fail(ErrorCode::kInvalidArgument, "geojson: expected a FeatureCollection or Feature");
  }

  std::vector<FieldPolygon> out;
  try {
    for (const auto& f : features) {
      const auto& props = f.value("properties", json::object());
      if (!props.contains("id") || !props["id"].is_number())
        fail(ErrorCode::kInvalidArgument, "geojson: feature without a numeric id property");
      const double raw_id = props["id"].get<double>();
      if (raw_id < 1 || raw_id > 4294967295.0 || raw_id != std::floor(raw_id))
        fail(ErrorCode::kInvariant, "geojson: id must be a positive 32-bit integer");
      FieldPolygon poly{static_cast<std::uint32_t>(raw_id), {}};
      const auto& geom = f.at("geometry");
      const std::string type = geom.at("type").get<std::string>();
      if (type == "Polygon") {
        poly.parts.push_back(part_from_json(geom.at("coordinates")));
      } else if (type == "MultiPolygon") {
        for (const auto& rings : geom.at("coordinates")) poly.parts.push_back(part_from_json(rings));
      } else {
        fail(ErrorCode::kInvalidArgument, "geojson: unsupported geometry type " + type);
      }
      poly.validate();
      out.push_back(std::move(poly));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::kInvalidArgument, std::string("geojson: ") + e.what());
  }
  check_unique_ids(out);
  return out;
}

std::string to_geojson(std::span<const FieldPolygon> polys, const std::string& crs) {
  ordered_json doc;
  doc["type"] = "FeatureCollection";
  if (!crs.empty()) doc["crs"] = {{"type", "name"}, {"properties", {{"name", crs}}}};
  ordered_json features = ordered_json::array();
  for (const auto& p : polys) {
    ordered_json f;
    f["type"] = "Feature";
    f["properties"] = {{"id", p.id}};
    ordered_json geom;
    if (p.parts.size() == 1) {
      geom["type"] = "Polygon";
      geom["coordinates"] = part_to_json(p.parts.front());
    } else {
      geom["type"] = "MultiPolygon";
      ordered_json parts = ordered_json::array();
      for (const auto& part : p.parts) parts.push_back(part_to_json(part));
      geom["coordinates"] = std::move(parts);
    }
    f["geometry"] = std::move(geom);
    features.push_back(std::move(f));
  }
  doc["features"] = std::move(features);
  return doc.dump() + "\n";
}

std::vector<FieldPolygon> read_geojson(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_geojson(ss.str());
}

void write_geojson(const std::filesystem::path& path, std::span<const FieldPolygon> polys,
                   const std::string& crs) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot open for writing: " + path.string());
  out << to_geojson(polys, crs);
  if (!out) fail(ErrorCode::kIo, "write failed: " + path.string());
}

}  // namespace fieldseg
