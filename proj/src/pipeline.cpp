#include "fieldseg/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fieldseg/instance.hpp"
#include "fieldseg/rng.hpp"
#include "fieldseg/tile_io.hpp"

namespace fieldseg {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

int parse_int(std::string_view s) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    fail(ErrorCode::kInvalidArgument, "bad date component: " + std::string(s));
  return v;
}

struct PixelRC {
  int row;
  int col;
};

bool inside_polygon(const FieldPolygon& poly, Point p) {
  bool inside = false;
  for (const auto& part : poly.parts) {
    if (point_in_ring(part.exterior, p)) inside = !inside;
    for (const auto& h : part.holes)
      if (point_in_ring(h, p)) inside = !inside;
  }
  return inside;
}

PixelRC snap_vertex(const FieldPolygon& poly, Point v) {
  const int c0 = static_cast<int>(std::floor(v.x - 0.5));
  const int r0 = static_cast<int>(std::floor(v.y - 0.5));
  bool in[2][2];
  for (int dr = 0; dr < 2; ++dr)
    for (int dc = 0; dc < 2; ++dc)
      in[dr][dc] = inside_polygon(poly, {c0 + dc + 0.5, r0 + dr + 0.5});

  bool found = false;
  PixelRC best{0, 0};
  double best_dist = 0.0;
  int best_support = 0;
  for (int dr = 0; dr < 2; ++dr) {
    for (int dc = 0; dc < 2; ++dc) {
      if (!in[dr][dc]) continue;
      const double ex = c0 + dc + 0.5 - v.x;
      const double ey = r0 + dr + 0.5 - v.y;
      const double dist = ex * ex + ey * ey;
      const int support = static_cast<int>(in[1 - dr][dc]) + static_cast<int>(in[dr][1 - dc]);
      // Candidates are visited in (row, col) order, so strict comparisons
      // keep the earliest on a full tie.
      if (!found || dist < best_dist || (dist == best_dist && support > best_support)) {
        found = true;
        best = {r0 + dr, c0 + dc};
        best_dist = dist;
        best_support = support;
      }
    }
  }
  if (!found) best = {static_cast<int>(std::floor(v.y)), static_cast<int>(std::floor(v.x))};
  return best;
}

template <typename Fn>
void bresenham(PixelRC a, PixelRC b, Fn&& plot) {
  int x0 = a.col, y0 = a.row;
  const int x1 = b.col, y1 = b.row;
  const int dx = std::abs(x1 - x0);
  const int dy = -std::abs(y1 - y0);
  const int sx = x0 < x1 ? 1 : -1;
  const int sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  while (true) {
    plot(y0, x0);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

std::string get_string(const json& j, const char* key) {
  if (!j.contains(key)) return {};
  if (!j[key].is_string()) fail(ErrorCode::kInvalidArgument, std::string("manifest: '") + key + "' must be a string");
  return j[key].get<std::string>();
}

}  // namespace

Date parse_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-')
    fail(ErrorCode::kInvalidArgument, "date must be YYYY-MM-DD: " + std::string(text));
  const Date d{std::chrono::year(parse_int(text.substr(0, 4))),
               std::chrono::month(static_cast<unsigned>(parse_int(text.substr(5, 2)))),
               std::chrono::day(static_cast<unsigned>(parse_int(text.substr(8, 2))))};
  if (!d.ok()) fail(ErrorCode::kInvalidArgument, "invalid calendar date: " + std::string(text));
  return d;
}

std::string format_date(Date d) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf;
}

DateRange::DateRange(Date start, Date end) : start_(start), end_(end) {
  if (!start.ok() || !end.ok()) fail(ErrorCode::kInvalidArgument, "DateRange: invalid date");
  if (end < start) fail(ErrorCode::kInvariant, "DateRange: start must not be after end");
}

std::array<DateRange, 3> seasonal_ranges(int year) {
  using namespace std::chrono;
  const std::chrono::year y{year};
  return {DateRange{y / January / 1, y / March / 31}, DateRange{y / April / 1, y / June / 30},
          DateRange{y / July / 1, y / September / 30}};
}

Raster seasonal_median_composite(std::span<const DatedRaster> stack, const DateRange& range) {
  std::vector<const Raster*> selected;
  for (const auto& item : stack)
    if (range.contains(item.date)) selected.push_back(&item.raster);
  if (selected.empty())
    fail(ErrorCode::kEmptyInput, "composite: no raster dated within " + format_date(range.start()) +
                                     " .. " + format_date(range.end()));
  const Raster& first = *selected.front();
  for (const Raster* r : selected) {
    if (!r->same_frame(first)) fail(ErrorCode::kDimensionMismatch, "composite: rasters differ in shape");
    if (r->geo() != first.geo()) fail(ErrorCode::kDimensionMismatch, "composite: rasters differ in georeference");
  }

  const std::size_t n = first.sample_count();
  const std::size_t k = selected.size();
  std::vector<float> out(n);
  std::vector<float> values(k);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j)
      values[j] = std::visit([i](const auto& v) { return static_cast<float>(v[i]); }, selected[j]->samples());
    const std::size_t mid = k / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    const float upper = values[mid];
    if (k % 2 == 1) {
      out[i] = upper;
    } else {
      const float lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
      out[i] = static_cast<float>((static_cast<double>(lower) + static_cast<double>(upper)) / 2.0);
    }
  }
  return Raster(first.width(), first.height(), first.bands(), std::move(out), first.geo());
}

std::vector<TileOrigin> tile_origins(int width, int height, int tile_size) {
  if (tile_size <= 0) fail(ErrorCode::kInvalidArgument, "tile size must be positive");
  std::vector<TileOrigin> origins;
  for (int r = 0; r + tile_size <= height; r += tile_size)
    for (int c = 0; c + tile_size <= width; c += tile_size) origins.push_back({r, c});
  return origins;
}

std::vector<TileTensor> tile_grid(std::span<const Raster> composites, int tile_size) {
  if (composites.empty()) fail(ErrorCode::kEmptyInput, "tile_grid: no composites");
  const Raster& first = composites.front();
  for (const auto& c : composites)
    if (!c.same_frame(first)) fail(ErrorCode::kDimensionMismatch, "tile_grid: composites differ in shape");
  if (tile_size <= 0) fail(ErrorCode::kInvalidArgument, "tile size must be positive");
  if (first.width() < tile_size || first.height() < tile_size)
    fail(ErrorCode::kInvalidArgument, "tile_grid: raster smaller than one tile");

  const int m = first.bands();
  const int t = static_cast<int>(composites.size());
  std::vector<TileTensor> tiles;
  for (const auto& origin : tile_origins(first.width(), first.height(), tile_size)) {
    std::vector<float> data(static_cast<std::size_t>(tile_size) * tile_size * m * t);
    std::size_t i = 0;
    for (int r = 0; r < tile_size; ++r)
      for (int c = 0; c < tile_size; ++c)
        for (int b = 0; b < m; ++b)
          for (int s = 0; s < t; ++s)
            data[i++] = composites[static_cast<std::size_t>(s)].value(origin.row + r, origin.col + c, b);
    tiles.emplace_back(tile_size, m, t, std::move(data));
  }
  return tiles;
}

LabelMasks labels_to_masks(std::span<const FieldPolygon> polygons, const Frame& frame, LabelMode mode) {
  const int w = frame.width;
  const int h = frame.height;
  if (w <= 0 || h <= 0) fail(ErrorCode::kInvalidArgument, "labels_to_masks: frame dimensions must be positive");
  if (frame.geo) frame.geo->validate();
  check_unique_ids(polygons);

  const std::size_t n = static_cast<std::size_t>(w) * h;
  std::vector<std::uint8_t> inside(n, 0);
  std::vector<std::uint8_t> border(n, 0);
  std::size_t skipped = 0;

  for (const auto& source : polygons) {
    source.validate();
    const FieldPolygon poly = frame.geo ? to_pixel_space(source, *frame.geo) : source;
    if (is_degenerate(poly)) {
      ++skipped;
      continue;
    }
    scan_fill(poly, w, h, [&](int r, int c) { inside[static_cast<std::size_t>(r) * w + c] = 1; });
    auto plot = [&](int r, int c) {
      if (r >= 0 && r < h && c >= 0 && c < w) border[static_cast<std::size_t>(r) * w + c] = 1;
    };
    auto trace = [&](const Ring& ring) {
      std::vector<PixelRC> snapped;
      snapped.reserve(ring.size());
      for (const auto& v : ring) snapped.push_back(snap_vertex(poly, v));
      for (std::size_t i = 0; i + 1 < snapped.size(); ++i) bresenham(snapped[i], snapped[i + 1], plot);
    };
    for (const auto& part : poly.parts) {
      trace(part.exterior);
      for (const auto& hole : part.holes) trace(hole);
    }
  }

  std::vector<std::uint8_t> interior(n, 0);
  std::vector<std::uint8_t> nolabel(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    interior[i] = (inside[i] != 0 && border[i] == 0) ? 1 : 0;
    if (mode == LabelMode::kPartial) nolabel[i] = (interior[i] != 0 || border[i] != 0) ? 1 : 0;
  }
  return {BinaryMask(w, h, std::move(border)), BinaryMask(w, h, std::move(interior)),
          NoLabelMask(w, h, std::move(nolabel)), skipped};
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::kTrain;
  if (text == "val") return Split::kVal;
  if (text == "test") return Split::kTest;
  if (text.empty() || text == "unassigned") return Split::kUnassigned;
  fail(ErrorCode::kInvalidArgument, "unknown split tag: " + std::string(text));
}

const char* to_string(Split split) noexcept {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
    case Split::kUnassigned: return "unassigned";
  }
  return "unassigned";
}

std::vector<ManifestEntry> DatasetManifest::in_split(Split split) const {
  std::vector<ManifestEntry> out;
  for (const auto& e : entries)
    if (e.split == split) out.push_back(e);
  return out;
}

void SplitRatios::validate() const {
  if (train < 0 || val < 0 || test < 0) fail(ErrorCode::kInvariant, "split ratios must be non-negative");
  if (std::abs(train + val + test - 1.0) > 1e-9) fail(ErrorCode::kInvariant, "split ratios must sum to 1");
}

SplitCounts split_counts(std::size_t n, const SplitRatios& ratios) {
  ratios.validate();
  const auto floor_count = [n](double r) {
    return static_cast<std::size_t>(std::floor(static_cast<double>(n) * r + 1e-9));
  };
  SplitCounts c;
  c.val = floor_count(ratios.val);
  c.test = floor_count(ratios.test);
  c.train = n - c.val - c.test;
  return c;
}

DatasetManifest random_split(std::vector<ManifestEntry> entries, const SplitRatios& ratios, std::uint64_t seed) {
  if (entries.size() < 3) fail(ErrorCode::kInvalidArgument, "random_split: need at least 3 entries");
  const SplitCounts counts = split_counts(entries.size(), ratios);

  std::vector<std::size_t> order(entries.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Xorshift64Star rng(seed);
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i + 1));
    std::swap(order[i], order[j]);
  }
  for (std::size_t k = 0; k < order.size(); ++k) {
    Split s = Split::kTest;
    if (k < counts.train) s = Split::kTrain;
    else if (k < counts.train + counts.val) s = Split::kVal;
    entries[order[k]].split = s;
  }
  DatasetManifest m;
  m.entries = std::move(entries);
  m.split_seed = seed;
  return m;
}

std::string manifest_to_jsonl(const DatasetManifest& manifest) {
  std::string out;
  ordered_json header;
  header["format"] = "fieldseg-manifest";
  header["version"] = 1;
  header["split_seed"] = manifest.split_seed ? ordered_json(*manifest.split_seed) : ordered_json(nullptr);
  out += header.dump() + "\n";
  for (const auto& e : manifest.entries) {
    ordered_json j;
    j["id"] = e.id;
    j["region"] = e.region;
    j["split"] = to_string(e.split);
    j["tile"] = e.tile;
    j["border"] = e.border;
    j["interior"] = e.interior;
    j["nolabel"] = e.nolabel;
    j["instances"] = e.instances;
    out += j.dump() + "\n";
  }
  return out;
}

DatasetManifest parse_manifest(const std::string& text, std::filesystem::path base_dir) {
  static const std::set<std::string> kEntryKeys = {"id",     "region",   "split",   "tile",
                                                   "border", "interior", "nolabel", "instances"};
  DatasetManifest m;
  m.base_dir = std::move(base_dir);
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::set<std::string> ids;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      fail(ErrorCode::kInvalidArgument, "manifest line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!j.is_object()) fail(ErrorCode::kInvalidArgument, "manifest line " + std::to_string(line_no) + ": not an object");
    if (j.contains("format")) {
      if (j["format"] != "fieldseg-manifest") fail(ErrorCode::kInvalidArgument, "manifest: unknown format");
      if (j.contains("split_seed") && !j["split_seed"].is_null())
        m.split_seed = j["split_seed"].get<std::uint64_t>();
      continue;
    }
    for (const auto& [key, _] : j.items())
      if (!kEntryKeys.contains(key))
        fail(ErrorCode::kInvalidArgument, "manifest line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    ManifestEntry e;
    e.id = get_string(j, "id");
    if (e.id.empty()) fail(ErrorCode::kInvalidArgument, "manifest line " + std::to_string(line_no) + ": missing id");
    if (!ids.insert(e.id).second) fail(ErrorCode::kInvariant, "manifest: duplicate id " + e.id);
    e.region = get_string(j, "region");
    e.split = parse_split(get_string(j, "split"));
    e.tile = get_string(j, "tile");
    e.border = get_string(j, "border");
    e.interior = get_string(j, "interior");
    e.nolabel = get_string(j, "nolabel");
    e.instances = get_string(j, "instances");
    m.entries.push_back(std::move(e));
  }
  return m;
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open manifest: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str(), path.parent_path());
}

void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot open for writing: " + path.string());
  out << manifest_to_jsonl(manifest);
  if (!out) fail(ErrorCode::kIo, "write failed: " + path.string());
}

double mean_fields_per_image(std::span<const InstanceMap> maps) {
  if (maps.empty()) fail(ErrorCode::kEmptyInput, "mean_fields_per_image: no images");
  double total = 0.0;
  for (const auto& m : maps) total += static_cast<double>(instance_ids(m).size());
  return total / static_cast<double>(maps.size());
}

double mean_fields_per_image(const DatasetManifest& manifest) {
  std::vector<InstanceMap> maps;
  for (const auto& e : manifest.entries) {
    if (e.instances.empty()) fail(ErrorCode::kInvalidArgument, "manifest entry " + e.id + " has no instance map");
    maps.push_back(read_tile_as<InstanceMap>(manifest.resolve(e.instances)));
  }
  return mean_fields_per_image(maps);
}

}  // namespace fieldseg
