#include <gtest/gtest.h>

#include <fstream>

#include "fieldseg/evaluate.hpp"
#include "fieldseg/synthgen.hpp"
#include "fieldseg/tile_io.hpp"
#include "support.hpp"

namespace fieldseg {
namespace {

EvalExample perfect_example(std::uint64_t seed) {
  SceneSpec spec;
  spec.seed = seed;
  spec.width = spec.height = 64;
  spec.n_fields = 4;
  spec.field_size_min = 8;
  spec.field_size_max = 16;
  const Scene s = generate(spec);
  return {"e" + std::to_string(seed), s.border, s.interior, s.nolabel, s.border, s.interior};
}

TEST(HeadInstances, BorderHeadLabelsEnclosedRegions) {
  const InstanceMap m = testing::rect_map(12, 12, 2, 2, 5, 5);
  const BinaryMask border = border_of(m);
  const InstanceMap inst = head_instances(border, true, Connectivity::kFour, 0);
  // Inside of the box plus the outside ring.
  EXPECT_EQ(instance_ids(inst).size(), 2u);
  const InstanceMap interior = head_instances(interior_of(m), false, Connectivity::kFour, 0);
  EXPECT_EQ(instance_ids(interior).size(), 1u);
}

TEST(Evaluate, PerfectPredictionsScoreOne) {
  std::vector<EvalExample> ex;
  for (std::uint64_t s = 0; s < 5; ++s) ex.push_back(perfect_example(s));
  const MetricsReport r = evaluate_examples(ex, EvalConfig{});
  for (const HeadReport* h : {&r.border, &r.interior}) {
    EXPECT_TRUE(h->applicable);
    EXPECT_EQ(h->f1.value, 1.0);
    EXPECT_EQ(h->accuracy.value, 1.0);
    EXPECT_EQ(h->miou, 1.0);
    EXPECT_EQ(h->p_at_iou.value, 1.0);
    EXPECT_EQ(h->instance_fp, 0u);
    EXPECT_EQ(h->instance_fn, 0u);
  }
  EXPECT_EQ(r.n_images, 5u);
}

TEST(Evaluate, AllBackgroundPrediction) {
  std::vector<EvalExample> ex{perfect_example(1)};
  ex[0].pred_interior = BinaryMask(64, 64, std::uint8_t{0});
  EvalConfig cfg;
  cfg.border_head = false;
  const MetricsReport r = evaluate_examples(ex, cfg);
  EXPECT_FALSE(r.border.applicable);
  EXPECT_EQ(r.interior.f1.value, 0.0);
  EXPECT_EQ(r.interior.flagged_zero_images, 1u);
  EXPECT_EQ(r.interior.p_at_iou.value, 0.0);
  EXPECT_EQ(r.interior.instance_tp, 0u);
  EXPECT_EQ(r.interior.instance_fn, 4u);
}

TEST(Evaluate, HalfCorrectPAtIouIsPerImageMean) {
  // Image a perfect, image b empty prediction: mean of 1 and flagged 0.
  std::vector<EvalExample> ex{perfect_example(2), perfect_example(3)};
  ex[1].pred_interior = BinaryMask(64, 64, std::uint8_t{0});
  EvalConfig cfg;
  cfg.border_head = false;
  EXPECT_DOUBLE_EQ(evaluate_examples(ex, cfg).interior.p_at_iou.value, 0.5);
}

TEST(Evaluate, MissingPredictionsListed) {
  std::vector<EvalExample> ex{perfect_example(1), perfect_example(2)};
  ex[0].pred_border.reset();
  ex[1].pred_interior.reset();
  try {
    evaluate_examples(ex, EvalConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingPrediction);
    const std::string msg = e.what();
    EXPECT_NE(msg.find("e1"), std::string::npos);
    EXPECT_NE(msg.find("e2"), std::string::npos);
  }
}

TEST(Evaluate, ThreadCountDoesNotChangeResult) {
  std::vector<EvalExample> ex;
  for (std::uint64_t s = 0; s < 6; ++s) {
    ex.push_back(perfect_example(s));
    ex.back().pred_interior = border_of(generate(SceneSpec{.seed = s + 50, .width = 64, .height = 64, .n_fields = 3,
                                                           .field_size_min = 8, .field_size_max = 16})
                                            .instances);
  }
  EXPECT_EQ(evaluate_examples(ex, EvalConfig{}, 1), evaluate_examples(ex, EvalConfig{}, 3));
}

TEST(Evaluate, ConfigValidation) {
  EvalConfig c;
  c.border_head = c.interior_head = false;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.iou_threshold = 0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.threshold = 1.5F;
  EXPECT_THROW(c.validate(), Error);
}

TEST(Report, JsonRoundTrip) {
  std::vector<EvalExample> ex{perfect_example(4), perfect_example(5)};
  ex[1].pred_border = BinaryMask(64, 64, std::uint8_t{1});
  const MetricsReport r = evaluate_examples(ex, EvalConfig{});
  const std::string text = report_to_json(r);
  EXPECT_EQ(parse_report_json(text), r);
  EXPECT_EQ(report_to_json(parse_report_json(text)), text);
  EXPECT_THROW(parse_report_json("{}"), Error);
  EXPECT_THROW(parse_report_json("not json"), Error);
}

TEST(Report, TableShape) {
  std::vector<EvalExample> ex{perfect_example(4)};
  EvalConfig cfg;
  cfg.border_head = false;
  cfg.name = "model-a";
  const MetricsReport r = evaluate_examples(ex, cfg);
  const std::string t = render_table(std::span<const MetricsReport>(&r, 1));
  EXPECT_NE(t.find("model-a"), std::string::npos);
  EXPECT_NE(t.find("n/a"), std::string::npos);
  EXPECT_NE(t.find("1.00"), std::string::npos);
}

TEST(Manifest, EvaluateFromFiles) {
  testing::TempDir dir("eval");
  DatasetManifest m;
  m.base_dir = dir.path();
  for (std::uint64_t s = 0; s < 3; ++s) {
    const EvalExample e = perfect_example(s);
    ManifestEntry me;
    me.id = e.id;
    me.region = "r";
    me.split = Split::kTest;
    me.tile = "t.fbt";
    me.border = e.id + ".b.fbt";
    me.interior = e.id + ".i.fbt";
    me.nolabel = e.id + ".n.fbt";
    testing::write_record(dir / me.border, e.gt_border);
    testing::write_record(dir / me.interior, e.gt_interior);
    testing::write_record(dir / me.nolabel, e.nolabel);
    m.entries.push_back(me);
    if (s < 2) {
      testing::write_record(prediction_path(dir / "pred", e.id, true), mask_to_raster(e.gt_border));
      testing::write_record(prediction_path(dir / "pred", e.id, false), e.gt_interior);
    }
  }
  try {
    evaluate_manifest(m, Split::kTest, dir / "pred", EvalConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingPrediction);
    EXPECT_NE(std::string(e.what()).find("e2.border.fbt"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("e2.interior.fbt"), std::string::npos);
  }
  m.entries.pop_back();
  const MetricsReport r = evaluate_manifest(m, Split::kTest, dir / "pred", EvalConfig{});
  EXPECT_EQ(r.n_images, 2u);
  EXPECT_EQ(r.border.f1.value, 1.0);
  EXPECT_EQ(r.interior.p_at_iou.value, 1.0);
}

TEST(LoadPrediction, ThresholdsProbabilities) {
  testing::TempDir dir("pred");
  const Raster p(3, 1, 1, std::vector<float>{0.2F, 0.5F, 0.9F});
  testing::write_record(dir / "p.fbt", p);
  const BinaryMask m = load_prediction(dir / "p.fbt", 0.5F);
  EXPECT_EQ(m, BinaryMask(3, 1, std::vector<std::uint8_t>{0, 1, 1}));
  testing::write_record(dir / "q.fbt", Raster(3, 1, 2, std::vector<float>(6, 0.0F)));
  EXPECT_THROW(load_prediction(dir / "q.fbt", 0.5F), Error);
}

}  // namespace
}  // namespace fieldseg
