#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fieldseg/polygon.hpp"
#include "fieldseg/raster.hpp"

namespace fieldseg {

// ---------------------------------------------------------------------------
// Seasonal compositing and tiling

using Date = std::chrono::year_month_day;

/// Parses YYYY-MM-DD.
Date parse_date(std::string_view text);
std::string format_date(Date d);

class DateRange {
 public:
  DateRange(Date start, Date end);

  Date start() const noexcept { return start_; }
  Date end() const noexcept { return end_; }
  bool contains(Date d) const noexcept { return start_ <= d && d <= end_; }

 private:
  Date start_;
  Date end_;
};

/// Jan 1 - Mar 31, Apr 1 - Jun 30, Jul 1 - Sep 30 of the given year.
std::array<DateRange, 3> seasonal_ranges(int year);

struct DatedRaster {
  Raster raster;
  Date date;
};

/// Per-pixel, per-band median over the rasters dated inside the range; an even
/// count takes the mean of the two middle values. Output is f32 and keeps the
/// geotransform of the inputs.
Raster seasonal_median_composite(std::span<const DatedRaster> stack, const DateRange& range);

/// Top-left pixel of each tile in row-major grid order; partial tiles dropped.
struct TileOrigin {
  int row = 0;
  int col = 0;
};
std::vector<TileOrigin> tile_origins(int width, int height, int tile_size);

/// Cuts T composites (one per date range, M bands each) into non-overlapping
/// N x N x M x T tiles in row-major grid order.
std::vector<TileTensor> tile_grid(std::span<const Raster> composites, int tile_size = 224);

// ---------------------------------------------------------------------------
// Label rasterization

struct Frame {
  int width = 0;
  int height = 0;
  std::optional<GeoTransform> geo;  // absent: polygons are already in pixel space
};

enum class LabelMode {
  kFull,     // every field in the frame is labelled
  kPartial,  // only pixels on labelled fields carry a label
};

struct LabelMasks {
  BinaryMask border;
  BinaryMask interior;
  NoLabelMask nolabel;
  std::size_t skipped_degenerate = 0;
};

/// Interior: pixel centers strictly inside a polygon (even-odd over all
/// rings). Border: each ring traced as 8-connected Bresenham segments between
/// snapped vertices; border wins over interior. A vertex snaps to the nearest
/// of the four pixels around it whose center is inside the polygon (ties: the
/// one with most inside neighbours among the four, then row, then column),
/// or to the pixel containing it when none is. Zero-area polygons are skipped
/// and counted.
LabelMasks labels_to_masks(std::span<const FieldPolygon> polygons, const Frame& frame,
                           LabelMode mode = LabelMode::kFull);

// ---------------------------------------------------------------------------
// Dataset manifest

enum class Split { kUnassigned, kTrain, kVal, kTest };

Split parse_split(std::string_view text);
const char* to_string(Split split) noexcept;

struct ManifestEntry {
  std::string id;
  std::string region;
  Split split = Split::kUnassigned;
  std::string tile;
  std::string border;
  std::string interior;
  std::string nolabel;
  std::string instances;  // optional

  bool operator==(const ManifestEntry&) const = default;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  std::optional<std::uint64_t> split_seed;
  std::filesystem::path base_dir;  // entry paths are relative to this

  std::filesystem::path resolve(const std::string& relative) const { return base_dir / relative; }
  std::vector<ManifestEntry> in_split(Split split) const;
};

struct SplitRatios {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;

  void validate() const;
};

struct SplitCounts {
  std::size_t train = 0;
  std::size_t val = 0;
  std::size_t test = 0;
};

/// val = floor(n * val_ratio), test = floor(n * test_ratio), train = the rest.
/// A 1e-9 guard absorbs products that land a hair under an integer.
SplitCounts split_counts(std::size_t n, const SplitRatios& ratios);

/// Fisher-Yates shuffle of entry indices with Xorshift64Star(seed)
/// (j = next() % (i + 1) for i = n-1 .. 1); the first `train` shuffled
/// entries become train, the next `val` val, the rest test. Entries keep
/// their input order in the returned manifest.
DatasetManifest random_split(std::vector<ManifestEntry> entries, const SplitRatios& ratios,
                             std::uint64_t seed);

/// Line-delimited JSON: a header object {"format":"fieldseg-manifest",
/// "version":1,"split_seed":<u64|null>} followed by one object per entry with
/// keys id, region, split, tile, border, interior, nolabel, instances.
std::string manifest_to_jsonl(const DatasetManifest& manifest);
DatasetManifest parse_manifest(const std::string& text, std::filesystem::path base_dir);
DatasetManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

/// Mean count of distinct non-zero ids per map.
double mean_fields_per_image(std::span<const InstanceMap> maps);
/// Same, loading each entry's instance map.
double mean_fields_per_image(const DatasetManifest& manifest);

}  // namespace fieldseg
