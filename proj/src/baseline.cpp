#include "fieldseg/baseline.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <unordered_map>

#include "fieldseg/instance.hpp"

namespace fieldseg {
namespace {

std::vector<float> single_band(const Raster& img, const char* who) {
  if (img.bands() != 1) fail(ErrorCode::kInvalidArgument, std::string(who) + ": expected a single-band raster");
  std::vector<float> v = img.band_f32(0);
  for (float x : v)
    if (!std::isfinite(x)) fail(ErrorCode::kInvariant, std::string(who) + ": non-finite input");
  return v;
}

std::vector<float> gaussian_blur(const std::vector<float>& src, int w, int h, double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-(i * i) / (2.0 * sigma * sigma));
    kernel[static_cast<std::size_t>(i + radius)] = v;
    sum += v;
  }
  for (auto& v : kernel) v /= sum;

  std::vector<float> tmp(src.size());
  std::vector<float> out(src.size());
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        const int cc = std::clamp(c + k, 0, w - 1);
        acc += kernel[static_cast<std::size_t>(k + radius)] * src[static_cast<std::size_t>(r) * w + cc];
      }
      tmp[static_cast<std::size_t>(r) * w + c] = static_cast<float>(acc);
    }
  }
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        const int rr = std::clamp(r + k, 0, h - 1);
        acc += kernel[static_cast<std::size_t>(k + radius)] * tmp[static_cast<std::size_t>(rr) * w + c];
      }
      out[static_cast<std::size_t>(r) * w + c] = static_cast<float>(acc);
    }
  }
  return out;
}

struct FloodItem {
  float level;
  float relief;
  std::size_t index;
};

// Min-heap order: flood level, then own relief, then raster-scan index.
struct FloodLater {
  bool operator()(const FloodItem& a, const FloodItem& b) const noexcept {
    if (a.level != b.level) return a.level > b.level;
    if (a.relief != b.relief) return a.relief > b.relief;
    return a.index > b.index;
  }
};

}  // namespace

void CWParams::validate() const {
  if (!(gaussian_sigma > 0)) fail(ErrorCode::kInvariant, "CWParams: gaussian_sigma must be > 0");
  if (!(canny_low < canny_high)) fail(ErrorCode::kInvariant, "CWParams: canny_low must be < canny_high");
  if (!(min_field_area < max_field_area))
    fail(ErrorCode::kInvariant, "CWParams: min_field_area must be < max_field_area");
  if (!(homogeneity_max_std >= 0)) fail(ErrorCode::kInvariant, "CWParams: homogeneity_max_std must be >= 0");
  if (!(seed_min_distance >= 0)) fail(ErrorCode::kInvariant, "CWParams: seed_min_distance must be >= 0");
}

Gradient smoothed_gradient(const Raster& img, double sigma) {
  if (!(sigma > 0)) fail(ErrorCode::kInvalidArgument, "gaussian sigma must be > 0");
  const int w = img.width();
  const int h = img.height();
  const auto smooth = gaussian_blur(single_band(img, "canny"), w, h, sigma);
  auto at = [&](int r, int c) {
    return smooth[static_cast<std::size_t>(std::clamp(r, 0, h - 1)) * w + std::clamp(c, 0, w - 1)];
  };
  Gradient g{w, h, {}, {}, {}};
  const std::size_t n = static_cast<std::size_t>(w) * h;
  g.gx.resize(n);
  g.gy.resize(n);
  g.magnitude.resize(n);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const float gx = (at(r - 1, c + 1) + 2 * at(r, c + 1) + at(r + 1, c + 1)) -
                       (at(r - 1, c - 1) + 2 * at(r, c - 1) + at(r + 1, c - 1));
      const float gy = (at(r + 1, c - 1) + 2 * at(r + 1, c) + at(r + 1, c + 1)) -
                       (at(r - 1, c - 1) + 2 * at(r - 1, c) + at(r - 1, c + 1));
      const std::size_t i = static_cast<std::size_t>(r) * w + c;
      g.gx[i] = gx;
      g.gy[i] = gy;
      g.magnitude[i] = std::hypot(gx, gy);
    }
  }
  return g;
}

BinaryMask canny(const Gradient& grad, double low, double high) {
  if (!(low < high)) fail(ErrorCode::kInvalidArgument, "canny: low threshold must be < high");
  const int w = grad.width;
  const int h = grad.height;
  const auto& mag = grad.magnitude;
  constexpr float kTan22 = 0.41421356F;

  // Non-maximum suppression; strict on the "before" neighbour, non-strict on
  // the "after" one so plateaus two pixels wide yield a single line.
  std::vector<float> thin(mag.size(), 0.0F);
  for (int r = 1; r < h - 1; ++r) {
    for (int c = 1; c < w - 1; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * w + c;
      const float m = mag[i];
      if (m <= 0.0F) continue;
      const float ax = std::abs(grad.gx[i]);
      const float ay = std::abs(grad.gy[i]);
      int dr = 0;
      int dc = 0;
      if (ay <= kTan22 * ax) {
        dc = 1;
      } else if (ax <= kTan22 * ay) {
        dr = 1;
      } else if ((grad.gx[i] > 0) == (grad.gy[i] > 0)) {
        dr = 1;
        dc = 1;
      } else {
        dr = 1;
        dc = -1;
      }
      const float before = mag[static_cast<std::size_t>(r - dr) * w + (c - dc)];
      const float after = mag[static_cast<std::size_t>(r + dr) * w + (c + dc)];
      if (m > before && m >= after) thin[i] = m;
    }
  }

  std::vector<std::uint8_t> edge(mag.size(), 0);
  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < thin.size(); ++i) {
    if (thin[i] >= high && edge[i] == 0) {
      edge[i] = 1;
      stack.push_back(i);
    }
  }
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    const int r = static_cast<int>(i / w);
    const int c = static_cast<int>(i % w);
    for (int dr = -1; dr <= 1; ++dr) {
      for (int dc = -1; dc <= 1; ++dc) {
        const int rr = r + dr;
        const int cc = c + dc;
        if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
        const std::size_t j = static_cast<std::size_t>(rr) * w + cc;
        if (edge[j] == 0 && thin[j] >= low) {
          edge[j] = 1;
          stack.push_back(j);
        }
      }
    }
  }
  return BinaryMask(w, h, std::move(edge));
}

BinaryMask canny(const Raster& img, double low, double high, double sigma) {
  return canny(smoothed_gradient(img, sigma), low, high);
}

InstanceMap watershed(const Raster& relief, const InstanceMap& seeds) {
  const auto values = single_band(relief, "watershed");
  if (relief.width() != seeds.width() || relief.height() != seeds.height())
    fail(ErrorCode::kDimensionMismatch, "watershed: relief and seeds differ in shape");
  if (seeds.count_nonzero() == 0) fail(ErrorCode::kInvalidArgument, "watershed: no seeds");

  const int w = relief.width();
  const int h = relief.height();
  std::vector<std::uint32_t> labels(seeds.data().begin(), seeds.data().end());
  std::priority_queue<FloodItem, std::vector<FloodItem>, FloodLater> open;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] != 0) open.push({values[i], values[i], i});

  while (!open.empty()) {
    const FloodItem cur = open.top();
    open.pop();
    const int r = static_cast<int>(cur.index / w);
    const int c = static_cast<int>(cur.index % w);
    const std::array<std::array<int, 2>, 4> nbrs = {{{r - 1, c}, {r, c - 1}, {r, c + 1}, {r + 1, c}}};
    for (const auto& [rr, cc] : nbrs) {
      if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
      const std::size_t j = static_cast<std::size_t>(rr) * w + cc;
      if (labels[j] != 0) continue;
      labels[j] = labels[cur.index];
      open.push({std::max(cur.level, values[j]), values[j], j});
    }
  }
  return InstanceMap(w, h, std::move(labels));
}

InstanceMap generate_seeds(const Raster& relief, double min_distance) {
  const auto values = single_band(relief, "generate_seeds");
  const int w = relief.width();
  const int h = relief.height();
  const std::size_t n = values.size();

  struct Minimum {
    float value;
    std::size_t rep;
    std::vector<std::size_t> pixels;
  };
  std::vector<Minimum> minima;
  std::vector<std::uint8_t> visited(n, 0);
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < n; ++start) {
    if (visited[start]) continue;
    const float v = values[start];
    std::vector<std::size_t> plateau;
    bool is_min = true;
    bool has_rim = false;
    visited[start] = 1;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      plateau.push_back(i);
      const int r = static_cast<int>(i / w);
      const int c = static_cast<int>(i % w);
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          if (dr == 0 && dc == 0) continue;
          const int rr = r + dr;
          const int cc = c + dc;
          if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
          const std::size_t j = static_cast<std::size_t>(rr) * w + cc;
          if (values[j] == v) {
            if (!visited[j]) {
              visited[j] = 1;
              stack.push_back(j);
            }
          } else {
            has_rim = true;
            if (values[j] < v) is_min = false;
          }
        }
      }
    }
    if (is_min && has_rim) {
      std::sort(plateau.begin(), plateau.end());
      minima.push_back({v, plateau.front(), std::move(plateau)});
    }
  }

  std::sort(minima.begin(), minima.end(), [](const Minimum& a, const Minimum& b) {
    if (a.value != b.value) return a.value < b.value;
    return a.rep < b.rep;
  });
  const double min_d2 = min_distance * min_distance;
  std::vector<const Minimum*> kept;
  for (const auto& m : minima) {
    const double r = static_cast<double>(m.rep / w);
    const double c = static_cast<double>(m.rep % w);
    bool clear = true;
    for (const Minimum* k : kept) {
      const double dr = r - static_cast<double>(k->rep / w);
      const double dc = c - static_cast<double>(k->rep % w);
      if (dr * dr + dc * dc < min_d2) {
        clear = false;
        break;
      }
    }
    if (clear) kept.push_back(&m);
  }
  std::sort(kept.begin(), kept.end(), [](const Minimum* a, const Minimum* b) { return a->rep < b->rep; });

  std::vector<std::uint32_t> labels(n, 0);
  std::uint32_t id = 0;
  for (const Minimum* m : kept) {
    ++id;
    for (std::size_t i : m->pixels) labels[i] = id;
  }
  return InstanceMap(w, h, std::move(labels));
}

InstanceMap ruleset_filter(const InstanceMap& segments, const TileTensor& tile, const CWParams& params) {
  params.validate();
  if (segments.width() != tile.size() || segments.height() != tile.size())
    fail(ErrorCode::kDimensionMismatch, "ruleset_filter: segments and tile differ in shape");
  const int bands = tile.bands();
  const int last = tile.timesteps() - 1;

  struct Stats {
    std::int64_t area = 0;
    std::vector<double> sum;
    std::vector<double> sum_sq;
  };
  std::unordered_map<std::uint32_t, Stats> stats;
  const int w = segments.width();
  for (int r = 0; r < segments.height(); ++r) {
    for (int c = 0; c < w; ++c) {
      const std::uint32_t id = segments.at(r, c);
      if (id == 0) continue;
      Stats& s = stats[id];
      if (s.sum.empty()) {
        s.sum.assign(static_cast<std::size_t>(bands), 0.0);
        s.sum_sq.assign(static_cast<std::size_t>(bands), 0.0);
      }
      ++s.area;
      for (int b = 0; b < bands; ++b) {
        const double v = tile.at(r, c, b, last);
        s.sum[static_cast<std::size_t>(b)] += v;
        s.sum_sq[static_cast<std::size_t>(b)] += v * v;
      }
    }
  }

  std::unordered_map<std::uint32_t, bool> keep;
  for (const auto& [id, s] : stats) {
    bool ok = s.area >= params.min_field_area && s.area <= params.max_field_area;
    for (int b = 0; ok && b < bands; ++b) {
      const double mean = s.sum[static_cast<std::size_t>(b)] / static_cast<double>(s.area);
      const double var = std::max(0.0, s.sum_sq[static_cast<std::size_t>(b)] / static_cast<double>(s.area) - mean * mean);
      if (std::sqrt(var) > params.homogeneity_max_std) ok = false;
    }
    keep[id] = ok;
  }

  std::vector<std::uint32_t> data(segments.data().begin(), segments.data().end());
  for (auto& v : data)
    if (v != 0 && !keep[v]) v = 0;
  return renumber_scan_order(InstanceMap(segments.width(), segments.height(), std::move(data)));
}

Raster luminance(const TileTensor& tile) {
  const int n = tile.size();
  const int used = std::min(3, tile.bands());
  const int last = tile.timesteps() - 1;
  std::vector<float> out(static_cast<std::size_t>(n) * n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      double acc = 0.0;
      for (int b = 0; b < used; ++b) acc += tile.at(r, c, b, last);
      out[static_cast<std::size_t>(r) * n + c] = static_cast<float>(acc / used);
    }
  }
  return Raster(n, n, 1, std::move(out));
}

Delineation delineate(const TileTensor& tile, const CWParams& params) {
  params.validate();
  const Raster lum = luminance(tile);
  const Gradient grad = smoothed_gradient(lum, params.gaussian_sigma);
  const BinaryMask edges = canny(grad, params.canny_low, params.canny_high);

  const float peak = grad.magnitude.empty() ? 0.0F : *std::max_element(grad.magnitude.begin(), grad.magnitude.end());
  std::vector<float> relief_values(grad.magnitude);
  for (std::size_t i = 0; i < relief_values.size(); ++i)
    if (edges[i] != 0) relief_values[i] = peak;
  const Raster relief(tile.size(), tile.size(), 1, std::move(relief_values));

  const InstanceMap seeds = generate_seeds(relief, params.seed_min_distance);
  if (seeds.count_nonzero() == 0) {
    return {BinaryMask(tile.size(), tile.size(), std::uint8_t{0}), InstanceMap(tile.size(), tile.size(), 0u)};
  }
  const InstanceMap segments = watershed(relief, seeds);
  InstanceMap fields = ruleset_filter(segments, tile, params);
  BinaryMask border = border_of(fields);
  return {std::move(border), std::move(fields)};
}

}  // namespace fieldseg
