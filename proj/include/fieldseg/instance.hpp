#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "fieldseg/polygon.hpp"
#include "fieldseg/raster.hpp"

namespace fieldseg {

enum class Connectivity { kFour, kEight };

Connectivity parse_connectivity(std::string_view text);
const char* to_string(Connectivity conn) noexcept;

/// Labels each maximal connected region of 1-pixels with ids 1..K in
/// first-encounter raster-scan order.
InstanceMap extract_instances(const BinaryMask& mask, Connectivity conn = Connectivity::kFour);

/// Traces the pixel-corner outline of every id. Vertices lie on the integer
/// lattice (pixel (r, c) spans [c, c+1] x [r, r+1]); exterior rings run
/// clockwise on screen and start at their top-left corner, holes run the other
/// way. Pieces of an id that only touch diagonally become separate parts.
/// Output is sorted by id.
std::vector<FieldPolygon> instances_to_polygons(const InstanceMap& map);

/// Burns polygons into a width x height map by pixel-center containment;
/// later polygons overwrite earlier ones. Polygons are in pixel space.
InstanceMap polygons_to_instance_map(std::span<const FieldPolygon> polys, int width, int height);

/// Foreground pixels with a 4-neighbour of a different id, or on the frame edge.
BinaryMask border_of(const InstanceMap& map);
/// Foreground pixels that are not border_of.
BinaryMask interior_of(const InstanceMap& map);
BinaryMask foreground_of(const InstanceMap& map);

/// Sorted distinct non-zero ids.
std::vector<std::uint32_t> instance_ids(const InstanceMap& map);

/// Zeroes instances with fewer than min_area pixels; ids of survivors kept.
InstanceMap remove_small_instances(const InstanceMap& map, std::size_t min_area);

/// Renumbers non-zero ids to 1..K in first-encounter raster-scan order.
InstanceMap renumber_scan_order(const InstanceMap& map);

/// The evaluation path for a semantic mask: connected components, then the
/// polygonize -> rasterize roundtrip.
InstanceMap mask_to_instances(const BinaryMask& mask, Connectivity conn = Connectivity::kFour,
                              std::size_t min_area = 0);

BinaryMask invert(const BinaryMask& mask);

}  // namespace fieldseg
