#pragma once

#include <vector>

#include "fieldseg/raster.hpp"

namespace fieldseg {

/// Every knob of the Canny + watershed delineation baseline. Reflectance
/// inputs are expected in [0, 1]; gradient thresholds are in Sobel units of
/// the Gaussian-smoothed luminance.
struct CWParams {
  double gaussian_sigma = 2.0;
  double canny_low = 0.06;
  double canny_high = 0.15;
  int min_field_area = 40;
  int max_field_area = 6000;
  double homogeneity_max_std = 0.06;
  double seed_min_distance = 20.0;

  void validate() const;
};

/// Gradient of a single-band image after Gaussian smoothing.
struct Gradient {
  int width = 0;
  int height = 0;
  std::vector<float> gx;
  std::vector<float> gy;
  std::vector<float> magnitude;
};

/// Separable Gaussian (radius ceil(3 sigma), edge-replicated) then 3x3 Sobel.
Gradient smoothed_gradient(const Raster& img, double sigma);

/// Canny edge detector: smoothing, Sobel, non-maximum suppression along the
/// quantised gradient direction, double-threshold hysteresis (8-connected).
/// Pixels on the outermost frame ring are never edges.
BinaryMask canny(const Raster& img, double low, double high, double sigma);
BinaryMask canny(const Gradient& grad, double low, double high);

/// Priority-flood watershed from labelled seeds over 4-neighbours. Pixels
/// are expanded in order of (flood level, relief, raster-scan index), where
/// the flood level is max(own relief, level of the pixel that reached it);
/// an unlabelled neighbour takes the label of the pixel being expanded.
/// Every pixel is labelled.
InstanceMap watershed(const Raster& relief, const InstanceMap& seeds);

/// Regional minima of the relief (8-connected plateaus whose neighbours are
/// all strictly higher; a frame-filling plateau does not count), thinned so
/// no two kept minima have representatives closer than min_distance. Deeper
/// minima are kept first; the representative is the plateau's first pixel in
/// scan order. Kept plateaus are numbered 1..K in scan order.
InstanceMap generate_seeds(const Raster& relief, double min_distance);

/// Drops segments outside [min_field_area, max_field_area] or with any band's
/// standard deviation in the last timestep above homogeneity_max_std, then
/// renumbers survivors 1..K in scan order.
InstanceMap ruleset_filter(const InstanceMap& segments, const TileTensor& tile, const CWParams& params);

/// Mean of the first min(3, M) bands at the last timestep.
Raster luminance(const TileTensor& tile);

struct Delineation {
  BinaryMask border;
  InstanceMap instances;
};

/// luminance -> canny -> relief (gradient magnitude raised to the maximum
/// magnitude on edge pixels) -> seeds -> watershed -> rule set -> border_of.
/// Produces no interior mask.
Delineation delineate(const TileTensor& tile, const CWParams& params);

}  // namespace fieldseg
