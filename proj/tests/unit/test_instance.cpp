#include <gtest/gtest.h>

#include <map>

#include "fieldseg/instance.hpp"
#include "support.hpp"

namespace fieldseg {
namespace {

BinaryMask mask_from(const std::vector<std::string>& rows) {
  const int h = static_cast<int>(rows.size());
  const int w = static_cast<int>(rows[0].size());
  return make_grid<std::uint8_t, BinaryMaskTraits>(
      w, h, [&](int r, int c) { return static_cast<std::uint8_t>(rows[r][c] == '#' ? 1 : 0); });
}

std::map<std::uint32_t, std::size_t> areas(const InstanceMap& m) {
  std::map<std::uint32_t, std::size_t> out;
  for (std::uint32_t v : m.data())
    if (v != 0) ++out[v];
  return out;
}

TEST(Connectivity, ParsesNamesAndDigits) {
  EXPECT_EQ(parse_connectivity("four"), Connectivity::kFour);
  EXPECT_EQ(parse_connectivity("8"), Connectivity::kEight);
  EXPECT_THROW(parse_connectivity("six"), Error);
}

TEST(ExtractInstances, DiagonalContactDependsOnConnectivity) {
  const BinaryMask m = mask_from({
      "#..",
      ".#.",
      "..#",
  });
  EXPECT_EQ(instance_ids(extract_instances(m, Connectivity::kFour)).size(), 3u);
  EXPECT_EQ(instance_ids(extract_instances(m, Connectivity::kEight)).size(), 1u);
}

TEST(ExtractInstances, IdsFollowScanOrder) {
  const BinaryMask m = mask_from({
      "..#",
      "#.#",
      "#..",
  });
  const InstanceMap inst = extract_instances(m);
  EXPECT_EQ(inst.at(0, 2), 1u);
  EXPECT_EQ(inst.at(1, 0), 2u);
  EXPECT_EQ(inst.at(2, 0), 2u);
}

TEST(Polygonize, SquareWithHole) {
  const InstanceMap m = extract_instances(mask_from({
      ".....",
      ".###.",
      ".#.#.",
      ".###.",
      ".....",
  }));
  const auto polys = instances_to_polygons(m);
  ASSERT_EQ(polys.size(), 1u);
  ASSERT_EQ(polys[0].parts.size(), 1u);
  const auto& part = polys[0].parts[0];
  ASSERT_EQ(part.holes.size(), 1u);
  // Boundary walk: the outer lattice square is 3x3, the hole 1x1.
  EXPECT_DOUBLE_EQ(signed_area(part.exterior), 9.0);
  EXPECT_DOUBLE_EQ(signed_area(part.holes[0]), -1.0);
  EXPECT_EQ(part.exterior.size(), 5u);  // collinear vertices compressed
  EXPECT_EQ(part.exterior.front(), (Point{1, 1}));
}

TEST(Polygonize, DiagonalPiecesOfOneIdBecomeParts) {
  const InstanceMap m(2, 2, std::vector<std::uint32_t>{5, 0, 0, 5});
  const auto polys = instances_to_polygons(m);
  ASSERT_EQ(polys.size(), 1u);
  EXPECT_EQ(polys[0].id, 5u);
  EXPECT_EQ(polys[0].parts.size(), 2u);
  EXPECT_EQ(polygons_to_instance_map(polys, 2, 2), m);
}

TEST(Polygonize, RoundTripPropertyOnRandomBlobs) {
  for (std::uint64_t seed = 0; seed < 150; ++seed) {
    const InstanceMap m = testing::random_blobs(17, 13, 6, seed);
    const auto polys = instances_to_polygons(m);
    EXPECT_EQ(polygons_to_instance_map(polys, 17, 13), m) << "seed " << seed;
    // Area of every traced polygon equals its pixel count.
    const auto a = areas(m);
    for (const auto& p : polys) EXPECT_DOUBLE_EQ(p.area(), static_cast<double>(a.at(p.id))) << "seed " << seed;
  }
}

TEST(Polygonize, ExteriorsClockwiseHolesCounter) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    for (const auto& p : instances_to_polygons(testing::random_blobs(15, 15, 4, seed))) {
      for (const auto& part : p.parts) {
        EXPECT_GT(signed_area(part.exterior), 0.0);
        for (const auto& h : part.holes) EXPECT_LT(signed_area(h), 0.0);
      }
    }
  }
}

TEST(Rasterize, LaterPolygonsOverwrite) {
  const std::vector<FieldPolygon> polys{
      {1, {PolygonPart{{{0, 0}, {4, 0}, {4, 4}, {0, 4}, {0, 0}}, {}}}},
      {2, {PolygonPart{{{2, 2}, {6, 2}, {6, 6}, {2, 6}, {2, 2}}, {}}}},
  };
  const InstanceMap m = polygons_to_instance_map(polys, 6, 6);
  EXPECT_EQ(m.at(3, 3), 2u);
  EXPECT_EQ(m.at(1, 1), 1u);
  EXPECT_EQ(areas(m).at(1), 12u);
}

TEST(BorderInterior, TenByTenSquare) {
  const InstanceMap m = testing::rect_map(20, 20, 5, 5, 10, 10);
  EXPECT_EQ(border_of(m).count_nonzero(), 36u);
  EXPECT_EQ(interior_of(m).count_nonzero(), 64u);
  EXPECT_EQ(foreground_of(m).count_nonzero(), 100u);
}

TEST(BorderInterior, AdjacentInstancesShareBorder) {
  std::vector<std::uint32_t> d{1, 1, 2, 2};
  const InstanceMap m(4, 1, d);
  EXPECT_EQ(border_of(m).count_nonzero(), 4u);
}

TEST(BorderInterior, FrameEdgeIsBorder) {
  const InstanceMap m(3, 3, 1u);
  const BinaryMask b = border_of(m);
  EXPECT_EQ(b.count_nonzero(), 8u);
  EXPECT_EQ(b.at(1, 1), 0);
}

TEST(RemoveSmall, KeepsIdsOfSurvivors) {
  const InstanceMap m(5, 1, std::vector<std::uint32_t>{3, 3, 0, 7, 0});
  const InstanceMap out = remove_small_instances(m, 2);
  EXPECT_EQ(instance_ids(out), (std::vector<std::uint32_t>{3}));
}

TEST(Renumber, ScanOrder) {
  const InstanceMap m(4, 1, std::vector<std::uint32_t>{9, 0, 4, 9});
  const InstanceMap out = renumber_scan_order(m);
  EXPECT_EQ(std::vector<std::uint32_t>(out.data().begin(), out.data().end()),
            (std::vector<std::uint32_t>{1, 0, 2, 1}));
}

TEST(MaskToInstances, MatchesComponentsAndDropsSmall) {
  Xorshift64Star rng(4);
  for (int i = 0; i < 40; ++i) {
    const BinaryMask m = testing::random_mask(16, 12, 0.45, rng);
    EXPECT_EQ(mask_to_instances(m), extract_instances(m));
    const InstanceMap big = mask_to_instances(m, Connectivity::kFour, 3);
    for (const auto& [id, n] : areas(big)) EXPECT_GE(n, 3u);
  }
}

TEST(Invert, FlipsEveryPixel) {
  Xorshift64Star rng(2);
  const BinaryMask m = testing::random_mask(9, 9, 0.5, rng);
  EXPECT_EQ(invert(invert(m)), m);
  EXPECT_EQ(invert(m).count_nonzero() + m.count_nonzero(), 81u);
}

}  // namespace
}  // namespace fieldseg
