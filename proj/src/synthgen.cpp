#include "fieldseg/synthgen.hpp"

#include <algorithm>
#include <string>

#include "fieldseg/instance.hpp"
#include "fieldseg/rng.hpp"

namespace fieldseg {
namespace {

constexpr int kMaxAttempts = 1000;
constexpr double kBackground = 0.5;

struct Rect {
  int row = 0;
  int col = 0;
  int h = 0;
  int w = 0;

  bool near(const Rect& o, int gap) const noexcept {
    return row - gap < o.row + o.h && o.row < row + h + gap && col - gap < o.col + o.w && o.col < col + w + gap;
  }
};

FieldPolygon rect_polygon(std::uint32_t id, const Rect& r) {
  const double x0 = r.col;
  const double y0 = r.row;
  const double x1 = r.col + r.w;
  const double y1 = r.row + r.h;
  // Clockwise on screen (y down).
  Ring ring{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}, {x0, y0}};
  return FieldPolygon{id, {PolygonPart{std::move(ring), {}}}};
}

}  // namespace

void SceneSpec::validate() const {
  if (width <= 0 || height <= 0) fail(ErrorCode::kInvariant, "SceneSpec: width and height must be positive");
  if (n_fields < 0) fail(ErrorCode::kInvariant, "SceneSpec: n_fields must be >= 0");
  if (field_size_min <= 0 || field_size_min > field_size_max)
    fail(ErrorCode::kInvariant, "SceneSpec: field size range must be positive and ordered");
  if (timesteps <= 0 || bands <= 0) fail(ErrorCode::kInvariant, "SceneSpec: timesteps and bands must be positive");
  if (!(noise_std >= 0)) fail(ErrorCode::kInvariant, "SceneSpec: noise_std must be >= 0");
  if (boundary_gap < 1) fail(ErrorCode::kInvariant, "SceneSpec: boundary_gap must be >= 1");
}

TileTensor Scene::tile() const {
  if (composites.empty()) fail(ErrorCode::kEmptyInput, "scene has no composites");
  if (composites.front().width() != composites.front().height())
    fail(ErrorCode::kInvalidArgument, "scene is not square");
  return tile_grid(composites, composites.front().width()).front();
}

Scene generate(const SceneSpec& spec) {
  spec.validate();
  Xorshift64Star rng(spec.seed);
  const int w = spec.width;
  const int h = spec.height;

  std::vector<Rect> rects;
  for (int f = 0; f < spec.n_fields; ++f) {
    bool placed = false;
    for (int attempt = 0; attempt < kMaxAttempts && !placed; ++attempt) {
      Rect r;
      r.h = static_cast<int>(rng.range(spec.field_size_min, spec.field_size_max));
      r.w = static_cast<int>(rng.range(spec.field_size_min, spec.field_size_max));
      if (r.h > h || r.w > w) continue;
      r.row = static_cast<int>(rng.range(0, h - r.h));
      r.col = static_cast<int>(rng.range(0, w - r.w));
      placed = std::none_of(rects.begin(), rects.end(),
                            [&](const Rect& o) { return r.near(o, spec.boundary_gap); });
      if (placed) rects.push_back(r);
    }
    if (!placed)
      fail(ErrorCode::kPlacementFailed, "could not place field " + std::to_string(f + 1) + " of " +
                                            std::to_string(spec.n_fields) + " after " +
                                            std::to_string(kMaxAttempts) + " attempts");
  }

  std::vector<FieldPolygon> polygons;
  for (std::size_t i = 0; i < rects.size(); ++i)
    polygons.push_back(rect_polygon(static_cast<std::uint32_t>(i + 1), rects[i]));
  InstanceMap instances = polygons_to_instance_map(polygons, w, h);

  // means[(f * T + t) * M + b]; index 0 is background.
  const int T = spec.timesteps;
  const int M = spec.bands;
  std::vector<double> means(static_cast<std::size_t>(rects.size() + 1) * T * M, kBackground);
  for (std::size_t f = 1; f <= rects.size(); ++f)
    for (int t = 0; t < T; ++t)
      for (int b = 0; b < M; ++b) means[(f * T + t) * M + b] = rng.uniform(0.05, 0.35);

  std::vector<Raster> composites;
  for (int t = 0; t < T; ++t) {
    std::vector<float> data(static_cast<std::size_t>(w) * h * M);
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        const std::size_t f = instances.at(r, c);
        for (int b = 0; b < M; ++b) {
          const double v = means[(f * T + t) * M + b] + spec.noise_std * rng.normal();
          data[(static_cast<std::size_t>(r) * w + c) * M + b] = static_cast<float>(v);
        }
      }
    }
    composites.emplace_back(w, h, M, std::move(data));
  }

  LabelMasks masks = labels_to_masks(polygons, Frame{w, h, std::nullopt}, LabelMode::kFull);
  return Scene{std::move(composites), std::move(polygons), std::move(instances),
               std::move(masks.border), std::move(masks.interior), std::move(masks.nolabel)};
}

Degraded degrade(const InstanceMap& instances, double drop_fraction, int jitter_px, std::uint64_t seed) {
  if (!(drop_fraction >= 0.0 && drop_fraction <= 1.0))
    fail(ErrorCode::kInvalidArgument, "degrade: drop_fraction must be in [0, 1]");
  if (jitter_px < 0) fail(ErrorCode::kInvalidArgument, "degrade: jitter_px must be >= 0");

  Xorshift64Star rng(seed);
  std::vector<std::uint32_t> ids = instance_ids(instances);
  const auto n_drop = static_cast<std::size_t>(drop_fraction * static_cast<double>(ids.size()));
  std::vector<std::uint32_t> order = ids;
  for (std::size_t i = order.size(); i-- > 1;) std::swap(order[i], order[rng.below(i + 1)]);

  const int w = instances.width();
  const int h = instances.height();
  Degraded out{InstanceMap(w, h, 0u), {}, {}, {}};
  out.dropped.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_drop));
  std::sort(out.dropped.begin(), out.dropped.end());
  for (std::uint32_t id : ids)
    if (!std::binary_search(out.dropped.begin(), out.dropped.end(), id)) out.kept.push_back(id);

  std::vector<Shift> shifts;
  for (std::uint32_t id : out.kept) {
    Shift s{id, 0, 0};
    if (jitter_px > 0) {
      s.dr = static_cast<int>(rng.range(-jitter_px, jitter_px));
      s.dc = static_cast<int>(rng.range(-jitter_px, jitter_px));
    }
    shifts.push_back(s);
    if (s.dr != 0 || s.dc != 0) out.moved.push_back(s);
  }

  std::vector<std::uint32_t> data(instances.size(), 0);
  for (const Shift& s : shifts) {
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        if (instances.at(r, c) != s.id) continue;
        const int rr = r + s.dr;
        const int cc = c + s.dc;
        if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
        data[static_cast<std::size_t>(rr) * w + cc] = s.id;
      }
    }
  }
  out.instances = InstanceMap(w, h, std::move(data));
  return out;
}

}  // namespace fieldseg
