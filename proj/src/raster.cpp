#include "fieldseg/raster.hpp"

#include <cmath>

namespace fieldseg {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kIo: return "io";
    case ErrorCode::kBadMagic: return "bad magic";
    case ErrorCode::kTruncated: return "truncated";
    case ErrorCode::kUnsupportedDtype: return "unsupported dtype";
    case ErrorCode::kWrongRecordKind: return "wrong record kind";
    case ErrorCode::kHeaderOverflow: return "header overflow";
    case ErrorCode::kInvariant: return "invariant violation";
    case ErrorCode::kDimensionMismatch: return "dimension mismatch";
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kEmptyInput: return "empty input";
    case ErrorCode::kMissingPrediction: return "missing prediction";
    case ErrorCode::kPlacementFailed: return "placement failed";
    case ErrorCode::kConfig: return "config";
  }
  return "unknown";
}

const char* to_string(DType dtype) noexcept {
  switch (dtype) {
    case DType::kU8: return "u8";
    case DType::kU16: return "u16";
    case DType::kF32: return "f32";
    case DType::kU32: return "u32";
  }
  return "?";
}

void GeoTransform::validate() const {
  if (!(pixel_size_x > 0.0) || !std::isfinite(pixel_size_x))
    fail(ErrorCode::kInvariant, "GeoTransform: pixel_size_x must be > 0");
  if (pixel_size_y == 0.0 || !std::isfinite(pixel_size_y))
    fail(ErrorCode::kInvariant, "GeoTransform: pixel_size_y must be non-zero");
  if (!std::isfinite(origin_x) || !std::isfinite(origin_y))
    fail(ErrorCode::kInvariant, "GeoTransform: origin must be finite");
}

Raster::Raster(int width, int height, int bands, Samples samples,
               std::optional<GeoTransform> geo)
    : width_(width), height_(height), bands_(bands), samples_(std::move(samples)),
      geo_(std::move(geo)) {
  if (width <= 0 || height <= 0 || bands <= 0)
    fail(ErrorCode::kInvariant, "Raster: width, height and bands must be positive");
  const std::size_t expected = static_cast<std::size_t>(width) * height * bands;
  if (sample_count() != expected) fail(ErrorCode::kInvariant, "Raster: sample count mismatch");
  if (geo_) geo_->validate();
}

Raster Raster::filled(int width, int height, int bands, float value,
                      std::optional<GeoTransform> geo) {
  const std::size_t n = static_cast<std::size_t>(width > 0 ? width : 0) *
                        (height > 0 ? height : 0) * (bands > 0 ? bands : 0);
  return Raster(width, height, bands, std::vector<float>(n, value), std::move(geo));
}

DType Raster::dtype() const noexcept {
  switch (samples_.index()) {
    case 0: return DType::kU8;
    case 1: return DType::kU16;
    default: return DType::kF32;
  }
}

std::size_t Raster::sample_count() const noexcept {
  return std::visit([](const auto& v) { return v.size(); }, samples_);
}

float Raster::value(int row, int col, int band) const noexcept {
  const std::size_t i = index(row, col, band);
  return std::visit([i](const auto& v) { return static_cast<float>(v[i]); }, samples_);
}

std::vector<float> Raster::band_f32(int band) const {
  if (band < 0 || band >= bands_) fail(ErrorCode::kInvalidArgument, "band index out of range");
  std::vector<float> out(static_cast<std::size_t>(width_) * height_);
  for (int r = 0; r < height_; ++r)
    for (int c = 0; c < width_; ++c) out[static_cast<std::size_t>(r) * width_ + c] = value(r, c, band);
  return out;
}

TileTensor::TileTensor(int size, int bands, int timesteps, std::vector<float> data)
    : size_(size), bands_(bands), timesteps_(timesteps), data_(std::move(data)) {
  if (size <= 0 || bands <= 0 || timesteps <= 0)
    fail(ErrorCode::kInvariant, "TileTensor: dimensions must be positive");
  if (data_.size() != static_cast<std::size_t>(size) * size * bands * timesteps)
    fail(ErrorCode::kInvariant, "TileTensor: sample count mismatch");
  for (float v : data_)
    if (!std::isfinite(v)) fail(ErrorCode::kInvariant, "TileTensor: non-finite value");
}

BinaryMask threshold(const Raster& prob, float t) {
  if (prob.bands() != 1) fail(ErrorCode::kInvalidArgument, "threshold: expected a single-band raster");
  const auto values = prob.view<float>();
  std::vector<std::uint8_t> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) fail(ErrorCode::kInvariant, "threshold: non-finite probability");
    out[i] = values[i] >= t ? 1 : 0;
  }
  return BinaryMask(prob.width(), prob.height(), std::move(out));
}

Raster mask_to_raster(const BinaryMask& mask) {
  std::vector<float> v(mask.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = mask[i];
  return Raster(mask.width(), mask.height(), 1, std::move(v));
}

}  // namespace fieldseg
