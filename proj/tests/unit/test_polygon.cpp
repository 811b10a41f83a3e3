#include <gtest/gtest.h>

#include "fieldseg/polygon.hpp"
#include "support.hpp"

namespace fieldseg {
namespace {

Ring square(double x0, double y0, double side) {
  return {{x0, y0}, {x0 + side, y0}, {x0 + side, y0 + side}, {x0, y0 + side}, {x0, y0}};
}

Ring reversed(Ring r) {
  std::reverse(r.begin(), r.end());
  return r;
}

TEST(Polygon, SignedAreaFollowsScreenOrientation) {
  EXPECT_DOUBLE_EQ(signed_area(square(0, 0, 3)), 9.0);
  EXPECT_DOUBLE_EQ(signed_area(reversed(square(0, 0, 3))), -9.0);
}

TEST(Polygon, AreaSubtractsHoles) {
  const FieldPolygon p{1, {PolygonPart{square(0, 0, 4), {reversed(square(1, 1, 2))}}}};
  EXPECT_DOUBLE_EQ(p.area(), 12.0);
}

TEST(Polygon, ValidateRejectsOpenRingAndZeroId) {
  Ring open = square(0, 0, 2);
  open.pop_back();
  EXPECT_THROW((FieldPolygon{1, {PolygonPart{open, {}}}}.validate()), Error);
  EXPECT_THROW((FieldPolygon{0, {PolygonPart{square(0, 0, 2), {}}}}.validate()), Error);
}

TEST(Polygon, DuplicateIdsRejected) {
  const std::vector<FieldPolygon> polys{{3, {PolygonPart{square(0, 0, 1), {}}}},
                                        {3, {PolygonPart{square(2, 0, 1), {}}}}};
  EXPECT_THROW(check_unique_ids(polys), Error);
}

TEST(Polygon, ScanFillCountsPixelCenters) {
  const FieldPolygon p{1, {PolygonPart{square(1, 1, 3), {}}}};
  int n = 0;
  scan_fill(p, 10, 10, [&](int r, int c) {
    EXPECT_TRUE(r >= 1 && r <= 3 && c >= 1 && c <= 3);
    ++n;
  });
  EXPECT_EQ(n, 9);
}

TEST(Polygon, ScanFillClampsToFrame) {
  const FieldPolygon p{1, {PolygonPart{square(-5, -5, 1e9), {}}}};
  int n = 0;
  scan_fill(p, 4, 3, [&](int, int) { ++n; });
  EXPECT_EQ(n, 12);
}

TEST(Polygon, PixelMapSpaceRoundTrip) {
  const GeoTransform g{1000.0, 2000.0, 10.0, -10.0, "EPSG:32631"};
  const FieldPolygon map{5, {PolygonPart{{{1010, 1990}, {1040, 1990}, {1040, 1960}, {1010, 1960}, {1010, 1990}}, {}}}};
  const FieldPolygon px = to_pixel_space(map, g);
  EXPECT_EQ(px.parts[0].exterior[0], (Point{1, 1}));
  EXPECT_EQ(px.parts[0].exterior[2], (Point{4, 4}));
  EXPECT_EQ(to_map_space(px, g), map);
}

TEST(GeoJson, ParsesPolygonAndMultiPolygon) {
  const std::string text = R"({
    "type": "FeatureCollection",
    "features": [
      {"type": "Feature", "properties": {"id": 7},
       "geometry": {"type": "Polygon", "coordinates": [[[0,0],[2,0],[2,2],[0,2],[0,0]]]}},
      {"type": "Feature", "properties": {"id": 8, "crop": "wheat"},
       "geometry": {"type": "MultiPolygon", "coordinates": [
         [[[5,5],[6,5],[6,6],[5,6],[5,5]]],
         [[[8,8],[9,8],[9,9],[8,9],[8,8]]]]}}
    ]})";
  const auto polys = parse_geojson(text);
  ASSERT_EQ(polys.size(), 2u);
  EXPECT_EQ(polys[0].id, 7u);
  EXPECT_EQ(polys[1].parts.size(), 2u);
  EXPECT_DOUBLE_EQ(polys[1].area(), 2.0);
}

TEST(GeoJson, RoundTrip) {
  const std::vector<FieldPolygon> polys{
      {1, {PolygonPart{square(0, 0, 4), {reversed(square(1, 1, 1))}}}},
      {2, {PolygonPart{square(10, 10, 2), {}}, PolygonPart{square(20, 20, 1), {}}}},
  };
  EXPECT_EQ(parse_geojson(to_geojson(polys, "EPSG:4326")), polys);
}

TEST(GeoJson, RejectsMissingIdAndOtherGeometry) {
  EXPECT_THROW(parse_geojson(R"({"type":"FeatureCollection","features":[{"type":"Feature","properties":{},
      "geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,0]]]}}]})"),
               Error);
  EXPECT_THROW(parse_geojson(R"({"type":"FeatureCollection","features":[{"type":"Feature","properties":{"id":1},
      "geometry":{"type":"Point","coordinates":[0,0]}}]})"),
               Error);
  EXPECT_THROW(parse_geojson(R"({"type":"FeatureCollection","features":[{"type":"Feature","properties":{"id":-2},
      "geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,0]]]}}]})"),
               Error);
  EXPECT_THROW(parse_geojson("not json"), Error);
}

TEST(GeoJson, FileRoundTrip) {
  testing::TempDir dir("geojson");
  const std::vector<FieldPolygon> polys{{4, {PolygonPart{square(2, 3, 5), {}}}}};
  write_geojson(dir / "f.geojson", polys);
  EXPECT_EQ(read_geojson(dir / "f.geojson"), polys);
}

}  // namespace
}  // namespace fieldseg
