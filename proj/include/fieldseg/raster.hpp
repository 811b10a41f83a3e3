#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "fieldseg/error.hpp"

namespace fieldseg {

enum class DType : std::uint8_t { kU8 = 1, kU16 = 2, kF32 = 3, kU32 = 4 };

const char* to_string(DType dtype) noexcept;

/// Affine north-up pixel-to-map transform.
struct GeoTransform {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double pixel_size_x = 1.0;
  double pixel_size_y = -1.0;
  std::string epsg;

  void validate() const;

  /// Map coordinates to fractional pixel coordinates (col, row).
  std::pair<double, double> to_pixel(double x, double y) const noexcept {
    return {(x - origin_x) / pixel_size_x, (y - origin_y) / pixel_size_y};
  }
  std::pair<double, double> to_map(double col, double row) const noexcept {
    return {origin_x + col * pixel_size_x, origin_y + row * pixel_size_y};
  }

  bool operator==(const GeoTransform&) const = default;
};

/// Multi-band raster, row-major with bands interleaved by pixel.
class Raster {
 public:
  using Samples =
      std::variant<std::vector<std::uint8_t>, std::vector<std::uint16_t>, std::vector<float>>;

  Raster(int width, int height, int bands, Samples samples,
         std::optional<GeoTransform> geo = std::nullopt);

  static Raster filled(int width, int height, int bands, float value,
                       std::optional<GeoTransform> geo = std::nullopt);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int bands() const noexcept { return bands_; }
  DType dtype() const noexcept;
  std::size_t sample_count() const noexcept;
  const Samples& samples() const noexcept { return samples_; }
  const std::optional<GeoTransform>& geo() const noexcept { return geo_; }

  std::size_t index(int row, int col, int band) const noexcept {
    return (static_cast<std::size_t>(row) * width_ + col) * bands_ + band;
  }

  /// Typed view; throws kInvalidArgument when T does not match dtype().
  template <typename T>
  std::span<const T> view() const {
    const auto* v = std::get_if<std::vector<T>>(&samples_);
    if (v == nullptr) fail(ErrorCode::kInvalidArgument, "raster dtype mismatch");
    return *v;
  }

  /// Any sample widened to float.
  float value(int row, int col, int band) const noexcept;

  /// Float copy of one band.
  std::vector<float> band_f32(int band) const;

  bool same_frame(const Raster& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_ && bands_ == other.bands_;
  }

  bool operator==(const Raster&) const = default;

 private:
  int width_;
  int height_;
  int bands_;
  Samples samples_;
  std::optional<GeoTransform> geo_;
};

/// Model input tile indexed (row, col, band, timestep), timestep fastest.
class TileTensor {
 public:
  TileTensor(int size, int bands, int timesteps, std::vector<float> data);

  int size() const noexcept { return size_; }
  int bands() const noexcept { return bands_; }
  int timesteps() const noexcept { return timesteps_; }
  std::span<const float> data() const noexcept { return data_; }

  std::size_t index(int row, int col, int band, int t) const noexcept {
    return ((static_cast<std::size_t>(row) * size_ + col) * bands_ + band) * timesteps_ + t;
  }
  float at(int row, int col, int band, int t) const noexcept {
    return data_[index(row, col, band, t)];
  }

  bool operator==(const TileTensor&) const = default;

 private:
  int size_;
  int bands_;
  int timesteps_;
  std::vector<float> data_;
};

/// Single-band 2-D grid with a value-domain check supplied by Traits.
template <typename T, typename Traits>
class Grid {
 public:
  using value_type = T;

  Grid(int width, int height, std::vector<T> data)
      : width_(width), height_(height), data_(std::move(data)) {
    if (width <= 0 || height <= 0)
      fail(ErrorCode::kInvariant, std::string(Traits::kName) + ": dimensions must be positive");
    if (data_.size() != static_cast<std::size_t>(width) * height)
      fail(ErrorCode::kInvariant, std::string(Traits::kName) + ": sample count mismatch");
    for (T v : data_) {
      if (!Traits::valid(v))
        fail(ErrorCode::kInvariant, std::string(Traits::kName) + ": value out of domain");
    }
  }

  Grid(int width, int height, T fill = T{})
      : Grid(width, height,
             std::vector<T>(static_cast<std::size_t>(width > 0 ? width : 0) *
                                (height > 0 ? height : 0),
                            fill)) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  std::span<const T> data() const noexcept { return data_; }

  T at(int row, int col) const noexcept {
    return data_[static_cast<std::size_t>(row) * width_ + col];
  }
  T operator[](std::size_t i) const noexcept { return data_[i]; }

  template <typename U, typename V>
  bool same_shape(const Grid<U, V>& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  std::size_t count_nonzero() const noexcept {
    std::size_t n = 0;
    for (T v : data_) n += (v != T{}) ? 1 : 0;
    return n;
  }

  bool operator==(const Grid&) const = default;

 private:
  int width_;
  int height_;
  std::vector<T> data_;
};

struct BinaryMaskTraits {
  static constexpr const char* kName = "BinaryMask";
  static constexpr bool valid(std::uint8_t v) noexcept { return v <= 1; }
};
struct NoLabelMaskTraits {
  static constexpr const char* kName = "NoLabelMask";
  static constexpr bool valid(std::uint8_t v) noexcept { return v <= 1; }
};
struct InstanceMapTraits {
  static constexpr const char* kName = "InstanceMap";
  static constexpr bool valid(std::uint32_t) noexcept { return true; }
};

/// 1 = positive (border or interior, depending on the head).
using BinaryMask = Grid<std::uint8_t, BinaryMaskTraits>;
/// 1 = pixel carries a valid label; 0 = excluded from every metric.
using NoLabelMask = Grid<std::uint8_t, NoLabelMaskTraits>;
/// 0 = background, otherwise an instance id.
using InstanceMap = Grid<std::uint32_t, InstanceMapTraits>;

template <typename T, typename Traits, typename Fn>
Grid<T, Traits> make_grid(int width, int height, Fn&& fn) {
  std::vector<T> data(static_cast<std::size_t>(width) * height);
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c) data[static_cast<std::size_t>(r) * width + c] = fn(r, c);
  return Grid<T, Traits>(width, height, std::move(data));
}

/// Copy of the window [row0, row0+height) x [col0, col0+width).
template <typename T, typename Traits>
Grid<T, Traits> crop(const Grid<T, Traits>& g, int row0, int col0, int width, int height) {
  if (row0 < 0 || col0 < 0 || row0 + height > g.height() || col0 + width > g.width())
    fail(ErrorCode::kInvalidArgument, "crop window outside grid");
  return make_grid<T, Traits>(width, height,
                              [&](int r, int c) { return g.at(row0 + r, col0 + c); });
}

/// 1 where value >= t, else 0. Input must be single-band float with finite values.
BinaryMask threshold(const Raster& prob, float t = 0.5F);

/// Single-band f32 raster carrying the mask values 0/1.
Raster mask_to_raster(const BinaryMask& mask);

}  // namespace fieldseg
