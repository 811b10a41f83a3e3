#pragma once

#include <filesystem>
#include <unistd.h>

#include <algorithm>
#include <string>

#include "fieldseg/raster.hpp"
#include "fieldseg/rng.hpp"
#include "fieldseg/tile_io.hpp"

namespace fieldseg::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("fieldseg_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Axis-aligned rectangle of `id` drawn into a w x h instance map.
inline InstanceMap rect_map(int w, int h, int row, int col, int rh, int rw, std::uint32_t id = 1) {
  return make_grid<std::uint32_t, InstanceMapTraits>(w, h, [&](int r, int c) {
    return (r >= row && r < row + rh && c >= col && c < col + rw) ? id : 0u;
  });
}

/// Random blobs: seeded random walk "brush strokes" with up to `max_ids` ids.
inline InstanceMap random_blobs(int w, int h, int max_ids, std::uint64_t seed) {
  Xorshift64Star rng(seed);
  std::vector<std::uint32_t> data(static_cast<std::size_t>(w) * h, 0);
  const int n = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_ids)));
  for (int id = 1; id <= n; ++id) {
    int r = static_cast<int>(rng.below(static_cast<std::uint64_t>(h)));
    int c = static_cast<int>(rng.below(static_cast<std::uint64_t>(w)));
    const int steps = 5 + static_cast<int>(rng.below(40));
    for (int s = 0; s < steps; ++s) {
      data[static_cast<std::size_t>(r) * w + c] = static_cast<std::uint32_t>(id);
      switch (rng.below(4)) {
        case 0: r = std::max(0, r - 1); break;
        case 1: r = std::min(h - 1, r + 1); break;
        case 2: c = std::max(0, c - 1); break;
        default: c = std::min(w - 1, c + 1); break;
      }
    }
  }
  return InstanceMap(w, h, std::move(data));
}

inline BinaryMask random_mask(int w, int h, double p, Xorshift64Star& rng) {
  return make_grid<std::uint8_t, BinaryMaskTraits>(w, h, [&](int, int) {
    return static_cast<std::uint8_t>(rng.uniform() < p ? 1 : 0);
  });
}

/// write_tile that creates the parent directory first.
inline void write_record(const std::filesystem::path& path, const Record& record) {
  std::filesystem::create_directories(path.parent_path());
  write_tile(record, path);
}

}  // namespace fieldseg::testing
