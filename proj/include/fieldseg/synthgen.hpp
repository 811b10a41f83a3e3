#pragma once

#include <cstdint>
#include <vector>

#include "fieldseg/pipeline.hpp"
#include "fieldseg/polygon.hpp"
#include "fieldseg/raster.hpp"

namespace fieldseg {

struct SceneSpec {
  std::uint64_t seed = 0;
  int width = 224;
  int height = 224;
  int n_fields = 12;
  int field_size_min = 16;  // side length, px
  int field_size_max = 48;
  int timesteps = 3;
  int bands = 3;
  double noise_std = 0.01;
  int boundary_gap = 2;

  void validate() const;
};

/// A rectangle-field scene. Instance ids are 1..K in placement order and equal
/// the polygon ids; masks come from labels_to_masks over the polygons.
struct Scene {
  std::vector<Raster> composites;  // one f32 raster per timestep, `bands` bands
  std::vector<FieldPolygon> polygons;
  InstanceMap instances;
  BinaryMask border;
  BinaryMask interior;
  NoLabelMask nolabel;

  /// Requires a square scene.
  TileTensor tile() const;
};

/// Background is 0.5 plus noise; each field draws a mean per (timestep, band)
/// uniformly from [0.05, 0.35]. Placement is rejection sampling with at
/// most 1000 attempts per field.
Scene generate(const SceneSpec& spec);

struct Shift {
  std::uint32_t id = 0;
  int dr = 0;
  int dc = 0;

  bool operator==(const Shift&) const = default;
};

struct Degraded {
  InstanceMap instances;
  std::vector<std::uint32_t> dropped;  // ascending
  std::vector<std::uint32_t> kept;     // ascending
  std::vector<Shift> moved;            // nonzero shifts only, ascending id
};

/// Drops floor(drop_fraction * K) ids picked by a seeded Fisher-Yates shuffle,
/// then translates each survivor (ascending id) by an integer offset drawn
/// uniformly from [-jitter_px, jitter_px] per axis. Survivors are painted in
/// ascending id order and clipped at the frame.
Degraded degrade(const InstanceMap& instances, double drop_fraction, int jitter_px, std::uint64_t seed);

}  // namespace fieldseg
