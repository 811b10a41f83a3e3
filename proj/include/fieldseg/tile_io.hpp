#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

#include "fieldseg/raster.hpp"

namespace fieldseg {

/// FBT1 container. All integers and floats little-endian.
///
///   offset  size  field
///        0     4  magic "FBT1"
///        4     1  record kind (RecordKind)
///        5     1  dtype code (DType)
///        6     1  geo flag (0 or 1; only kind=raster may set it)
///        7     1  reserved, written as 0
///        8     4  width  (u32)
///       12     4  height (u32)
///       16     4  bands  (u32)
///       20     4  timesteps (u32)
///       24        if geo flag: origin_x, origin_y, pixel_size_x, pixel_size_y
///                 (4 x f64), epsg byte length (u16), epsg ASCII bytes
///        .        samples, width*height*bands*timesteps of dtype, in the
///                 record's native order
///
/// Masks are u8 with bands = timesteps = 1; instance maps are u32 with
/// bands = timesteps = 1; rasters have timesteps = 1 and dtype u8/u16/f32;
/// tiles are f32 with width = height = N, bands = M, timesteps = T, sample
/// order (row, col, band, timestep).
enum class RecordKind : std::uint8_t {
  kRaster = 1,
  kTile = 2,
  kBinaryMask = 3,
  kNoLabelMask = 4,
  kInstanceMap = 5,
};

inline constexpr std::size_t kFbtFixedHeaderBytes = 24;

using Record = std::variant<Raster, TileTensor, BinaryMask, NoLabelMask, InstanceMap>;

RecordKind kind_of(const Record& record) noexcept;
const char* to_string(RecordKind kind) noexcept;

std::vector<std::byte> encode_record(const Record& record);
/// Errors: kBadMagic, kTruncated, kUnsupportedDtype, kWrongRecordKind (unknown
/// kind byte), kInvariant.
Record decode_record(std::span<const std::byte> bytes);

void write_tile(const Record& record, const std::filesystem::path& path);
Record read_tile(const std::filesystem::path& path);

/// read_tile that also checks the record kind (kWrongRecordKind otherwise).
template <typename T>
T read_tile_as(const std::filesystem::path& path) {
  Record r = read_tile(path);
  if (auto* v = std::get_if<T>(&r)) return std::move(*v);
  fail(ErrorCode::kWrongRecordKind,
       path.string() + ": unexpected record kind " + to_string(kind_of(r)));
}

}  // namespace fieldseg
