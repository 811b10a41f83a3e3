#include "fieldseg/instance.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <unordered_map>

namespace fieldseg {
namespace {

// Lattice directions on screen (y down), clockwise order.
enum Dir : std::uint8_t { kEast = 0, kSouth = 1, kWest = 2, kNorth = 3 };
constexpr std::array<int, 4> kDx = {1, 0, -1, 0};
constexpr std::array<int, 4> kDy = {0, 1, 0, -1};

struct Edge {
  std::uint32_t id;
  std::uint32_t x;  // start vertex
  std::uint32_t y;
  Dir dir;
};

bool edge_less(const Edge& a, const Edge& b) {
  if (a.id != b.id) return a.id < b.id;
  if (a.y != b.y) return a.y < b.y;
  if (a.x != b.x) return a.x < b.x;
  return a.dir < b.dir;
}

// Region always lies on the right of an edge (clockwise on screen).
std::vector<Edge> boundary_edges(const InstanceMap& map) {
  const int w = map.width();
  const int h = map.height();
  std::vector<Edge> edges;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const std::uint32_t id = map.at(r, c);
      if (id == 0) continue;
      const auto x = static_cast<std::uint32_t>(c);
      const auto y = static_cast<std::uint32_t>(r);
      if (r == 0 || map.at(r - 1, c) != id) edges.push_back({id, x, y, kEast});
      if (c == w - 1 || map.at(r, c + 1) != id) edges.push_back({id, x + 1, y, kSouth});
      if (r == h - 1 || map.at(r + 1, c) != id) edges.push_back({id, x + 1, y + 1, kWest});
      if (c == 0 || map.at(r, c - 1) != id) edges.push_back({id, x, y + 1, kNorth});
    }
  }
  std::sort(edges.begin(), edges.end(), edge_less);
  return edges;
}

// Traces closed rings from the edges of one id (sorted range).
std::vector<Ring> trace_rings(std::span<const Edge> edges) {
  std::vector<bool> used(edges.size(), false);
  auto find_out = [&](std::uint32_t x, std::uint32_t y, std::array<int, 2>& out) {
    Edge key{edges.front().id, x, y, kEast};
    auto it = std::lower_bound(edges.begin(), edges.end(), key, edge_less);
    int n = 0;
    for (; it != edges.end() && it->x == x && it->y == y && n < 2; ++it)
      out[n++] = static_cast<int>(it - edges.begin());
    return n;
  };

  std::vector<Ring> rings;
  for (std::size_t s = 0; s < edges.size(); ++s) {
    if (used[s]) continue;
    std::vector<Dir> dirs;
    std::vector<Point> verts;
    std::size_t cur = s;
    used[s] = true;
    while (true) {
      const Edge& e = edges[cur];
      verts.push_back({static_cast<double>(e.x), static_cast<double>(e.y)});
      dirs.push_back(e.dir);
      const std::uint32_t nx = e.x + kDx[e.dir];
      const std::uint32_t ny = e.y + kDy[e.dir];
      std::array<int, 2> cand{};
      const int n = find_out(nx, ny, cand);
      // Prefer right turn, then straight, then left: keeps diagonal contacts
      // apart so each ring bounds a 4-connected piece.
      int best = -1;
      int best_rank = 4;
      for (int k = 0; k < n; ++k) {
        const auto idx = static_cast<std::size_t>(cand[k]);
        if (used[idx] && idx != s) continue;
        const int turn = (edges[idx].dir - e.dir + 4) % 4;  // 1 right, 0 straight, 3 left
        const int rank = turn == 1 ? 0 : turn == 0 ? 1 : 2;
        if (rank < best_rank) {
          best_rank = rank;
          best = cand[k];
        }
      }
      if (best < 0) fail(ErrorCode::kInvariant, "polygonize: open boundary");
      if (static_cast<std::size_t>(best) == s) break;
      cur = static_cast<std::size_t>(best);
      used[cur] = true;
    }
    // Keep only corners.
    Ring ring;
    const std::size_t m = verts.size();
    for (std::size_t i = 0; i < m; ++i) {
      const Dir prev = dirs[(i + m - 1) % m];
      if (dirs[i] != prev) ring.push_back(verts[i]);
    }
    ring.push_back(ring.front());
    rings.push_back(std::move(ring));
  }
  return rings;
}

}  // namespace

Connectivity parse_connectivity(std::string_view text) {
  if (text == "four" || text == "4") return Connectivity::kFour;
  if (text == "eight" || text == "8") return Connectivity::kEight;
  fail(ErrorCode::kInvalidArgument, "connectivity must be 'four' or 'eight'");
}

const char* to_string(Connectivity conn) noexcept {
  return conn == Connectivity::kFour ? "four" : "eight";
}

InstanceMap extract_instances(const BinaryMask& mask, Connectivity conn) {
  const int w = mask.width();
  const int h = mask.height();
  std::vector<std::uint32_t> labels(mask.size(), 0);
  std::vector<std::size_t> stack;
  std::uint32_t next_id = 0;
  static constexpr std::array<std::array<int, 2>, 8> kOffsets = {
      {{-1, 0}, {0, -1}, {0, 1}, {1, 0}, {-1, -1}, {-1, 1}, {1, -1}, {1, 1}}};
  const int n_neighbors = conn == Connectivity::kEight ? 8 : 4;
  for (std::size_t start = 0; start < mask.size(); ++start) {
    if (mask[start] == 0 || labels[start] != 0) continue;
    labels[start] = ++next_id;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      const int r = static_cast<int>(i / w);
      const int c = static_cast<int>(i % w);
      for (int k = 0; k < n_neighbors; ++k) {
        const int rr = r + kOffsets[k][0];
        const int cc = c + kOffsets[k][1];
        if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
        const std::size_t j = static_cast<std::size_t>(rr) * w + cc;
        if (mask[j] == 0 || labels[j] != 0) continue;
        labels[j] = next_id;
        stack.push_back(j);
      }
    }
  }
  return InstanceMap(w, h, std::move(labels));
}

std::vector<FieldPolygon> instances_to_polygons(const InstanceMap& map) {
  const auto edges = boundary_edges(map);
  std::vector<FieldPolygon> out;
  std::size_t begin = 0;
  while (begin < edges.size()) {
    std::size_t end = begin;
    while (end < edges.size() && edges[end].id == edges[begin].id) ++end;
    const std::uint32_t id = edges[begin].id;
    auto rings = trace_rings(std::span(edges).subspan(begin, end - begin));

    FieldPolygon poly{id, {}};
    std::vector<Ring> holes;
    for (auto& ring : rings) {
      if (signed_area(ring) > 0)
        poly.parts.push_back({std::move(ring), {}});
      else
        holes.push_back(std::move(ring));
    }
    for (auto& hole : holes) {
      // Probe a point just on the region side of the hole's first edge, then
      // attach the hole to the smallest exterior containing it.
      const Point a = hole[0];
      const Point b = hole[1];
      const double len = std::abs(b.x - a.x) + std::abs(b.y - a.y);
      const double dx = (b.x - a.x) / len;
      const double dy = (b.y - a.y) / len;
      const Point probe{(a.x + b.x) / 2 - 0.25 * dy, (a.y + b.y) / 2 + 0.25 * dx};
      std::size_t owner = poly.parts.size();
      double owner_area = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < poly.parts.size(); ++k) {
        const double area = signed_area(poly.parts[k].exterior);
        if (area < owner_area && point_in_ring(poly.parts[k].exterior, probe)) {
          owner = k;
          owner_area = area;
        }
      }
      if (owner == poly.parts.size()) fail(ErrorCode::kInvariant, "polygonize: orphan hole");
      poly.parts[owner].holes.push_back(std::move(hole));
    }
    out.push_back(std::move(poly));
    begin = end;
  }
  return out;
}

InstanceMap polygons_to_instance_map(std::span<const FieldPolygon> polys, int width, int height) {
  if (width <= 0 || height <= 0)
    fail(ErrorCode::kInvalidArgument, "rasterize: dimensions must be positive");
  check_unique_ids(polys);
  std::vector<std::uint32_t> data(static_cast<std::size_t>(width) * height, 0);
  for (const auto& poly : polys) {
    scan_fill(poly, width, height, [&](int r, int c) {
      data[static_cast<std::size_t>(r) * width + c] = poly.id;
    });
  }
  return InstanceMap(width, height, std::move(data));
}

BinaryMask border_of(const InstanceMap& map) {
  const int w = map.width();
  const int h = map.height();
  return make_grid<std::uint8_t, BinaryMaskTraits>(w, h, [&](int r, int c) -> std::uint8_t {
    const std::uint32_t id = map.at(r, c);
    if (id == 0) return 0;
    if (r == 0 || c == 0 || r == h - 1 || c == w - 1) return 1;
    return (map.at(r - 1, c) != id || map.at(r + 1, c) != id || map.at(r, c - 1) != id ||
            map.at(r, c + 1) != id)
               ? 1
               : 0;
  });
}

BinaryMask interior_of(const InstanceMap& map) {
  const BinaryMask border = border_of(map);
  return make_grid<std::uint8_t, BinaryMaskTraits>(
      map.width(), map.height(),
      [&](int r, int c) -> std::uint8_t { return map.at(r, c) != 0 && border.at(r, c) == 0; });
}

BinaryMask foreground_of(const InstanceMap& map) {
  return make_grid<std::uint8_t, BinaryMaskTraits>(
      map.width(), map.height(), [&](int r, int c) -> std::uint8_t { return map.at(r, c) != 0; });
}

std::vector<std::uint32_t> instance_ids(const InstanceMap& map) {
  std::vector<std::uint32_t> ids;
  for (std::uint32_t v : map.data())
    if (v != 0) ids.push_back(v);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

InstanceMap remove_small_instances(const InstanceMap& map, std::size_t min_area) {
  if (min_area <= 1) return map;
  std::unordered_map<std::uint32_t, std::size_t> area;
  for (std::uint32_t v : map.data())
    if (v != 0) ++area[v];
  std::vector<std::uint32_t> data(map.data().begin(), map.data().end());
  for (auto& v : data)
    if (v != 0 && area[v] < min_area) v = 0;
  return InstanceMap(map.width(), map.height(), std::move(data));
}

InstanceMap renumber_scan_order(const InstanceMap& map) {
  std::unordered_map<std::uint32_t, std::uint32_t> remap;
  std::vector<std::uint32_t> data(map.size());
  for (std::size_t i = 0; i < map.size(); ++i) {
    const std::uint32_t v = map[i];
    if (v == 0) continue;
    auto [it, inserted] = remap.try_emplace(v, static_cast<std::uint32_t>(remap.size() + 1));
    data[i] = it->second;
  }
  return InstanceMap(map.width(), map.height(), std::move(data));
}

InstanceMap mask_to_instances(const BinaryMask& mask, Connectivity conn, std::size_t min_area) {
  const InstanceMap components = remove_small_instances(extract_instances(mask, conn), min_area);
  const auto polys = instances_to_polygons(components);
  return polygons_to_instance_map(polys, mask.width(), mask.height());
}

BinaryMask invert(const BinaryMask& mask) {
  return make_grid<std::uint8_t, BinaryMaskTraits>(
      mask.width(), mask.height(), [&](int r, int c) -> std::uint8_t { return mask.at(r, c) == 0; });
}

}  // namespace fieldseg
