// Acceptance suite: one PASS/FAIL line per criterion, exit 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "fieldseg/baseline.hpp"
#include "fieldseg/evaluate.hpp"
#include "fieldseg/instance.hpp"
#include "fieldseg/metrics.hpp"
#include "fieldseg/pipeline.hpp"
#include "fieldseg/polygon.hpp"
#include "fieldseg/synthgen.hpp"
#include "../oracles.hpp"
#include "../support.hpp"

using namespace fieldseg;
namespace ft = fieldseg::testing;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

NoLabelMask random_nolabel(int w, int h, double p, Xorshift64Star& rng) {
  return make_grid<std::uint8_t, NoLabelMaskTraits>(w, h, [&](int, int) {
    return static_cast<std::uint8_t>(rng.uniform() < p ? 1 : 0);
  });
}

// Pixel metrics and instance IoU against brute-force enumeration.
Outcome metric_conformance() {
  const auto t0 = Clock::now();
  double worst = 0;
  std::size_t count_mismatch = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Xorshift64Star rng(seed);
    const int w = 4 + static_cast<int>(rng.below(20));
    const int h = 4 + static_cast<int>(rng.below(20));
    const BinaryMask pred = ft::random_mask(w, h, rng.uniform(), rng);
    const BinaryMask gt = ft::random_mask(w, h, rng.uniform(), rng);
    const NoLabelMask nl = random_nolabel(w, h, 0.5 + 0.5 * rng.uniform(), rng);
    const ConfusionCounts c = pixel_confusion(pred, gt, nl);
    const auto o = ft::brute_force_counts(pred, gt, &nl);
    if (c.tp != o.tp || c.fp != o.fp || c.fn != o.fn || c.tn != o.tn) ++count_mismatch;
    const double tp = static_cast<double>(o.tp);
    const double fp = static_cast<double>(o.fp);
    const double fn = static_cast<double>(o.fn);
    const double tn = static_cast<double>(o.tn);
    if (tp + fp + fn > 0) worst = std::max(worst, std::abs(f1(c).value - 2 * tp / (2 * tp + fp + fn)));
    if (tp + fp + fn + tn > 0) worst = std::max(worst, std::abs(accuracy(c).value - (tp + tn) / (tp + fp + fn + tn)));
    if (tp + fp + fn > 0) worst = std::max(worst, std::abs(iou(c) - tp / (tp + fp + fn)));

    const InstanceMap a = ft::random_blobs(w, h, 5, seed * 2 + 1);
    const InstanceMap b = ft::random_blobs(w, h, 5, seed * 2 + 2);
    for (const auto& m : match_instances(a, b, nl, 1e-9).matches) {
      const auto [inter, uni] = ft::brute_force_iou(a, m.pred_id, b, m.gt_id, &nl);
      if (inter != m.intersection || uni != m.union_area) ++count_mismatch;
      worst = std::max(worst, std::abs(m.iou - static_cast<double>(inter) / static_cast<double>(uni)));
    }
  }
  const double secs = seconds_since(t0);
  return {count_mismatch == 0 && worst <= 1e-12 && secs < 10.0,
          fmt("1000 pairs, count mismatches %zu, max abs error %.3g, %.2fs", count_mismatch, worst, secs)};
}

// Greedy matching at IoU 0.95 equals the maximum one-to-one matching.
Outcome matching_optimality() {
  const auto t0 = Clock::now();
  std::size_t differ = 0;
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    Xorshift64Star rng(seed + 77);
    const InstanceMap gt = ft::random_blobs(10, 10, 5, seed);
    std::vector<std::uint32_t> d(gt.data().begin(), gt.data().end());
    const std::size_t flips = rng.below(4);
    for (std::size_t k = 0; k < flips; ++k) d[rng.below(d.size())] = static_cast<std::uint32_t>(rng.below(6));
    const InstanceMap pred(10, 10, d);
    std::optional<NoLabelMask> nl;
    if (seed % 2 == 1) nl = random_nolabel(10, 10, 0.9, rng);
    const auto g = nl ? match_instances(pred, gt, *nl, 0.95) : match_instances(pred, gt, 0.95);
    const auto o = ft::exhaustive_match(pred, gt, nl, 0.95);
    if (g.tp != o.tp || g.fp != o.fp || g.fn != o.fn) ++differ;
  }
  const double secs = seconds_since(t0);
  return {differ == 0 && secs < 30.0, fmt("500 pairs, %zu differ from exhaustive, %.2fs", differ, secs)};
}

// Instance map -> polygons -> GeoJSON -> polygons -> instance map.
Outcome polygon_roundtrip() {
  std::size_t differing = 0;
  std::size_t maps_bad = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const int w = 8 + static_cast<int>(seed % 17);
    const int h = 8 + static_cast<int>(seed % 11);
    const InstanceMap m = ft::random_blobs(w, h, 8, seed);
    const auto polys = parse_geojson(to_geojson(instances_to_polygons(m)));
    const InstanceMap back = polygons_to_instance_map(polys, w, h);
    std::size_t d = 0;
    for (std::size_t i = 0; i < m.size(); ++i) d += m[i] != back[i] ? 1 : 0;
    differing += d;
    maps_bad += d != 0 ? 1 : 0;
  }
  return {differing == 0, fmt("200 maps, %zu maps differ, %zu differing pixels", maps_bad, differing)};
}

Scene bench_scene(std::uint64_t seed, int n_fields = 12) {
  SceneSpec spec;
  spec.seed = seed;
  spec.n_fields = n_fields;
  return generate(spec);
}

// Predictions equal to ground truth score exactly 1 on every metric.
Outcome perfect_predictor() {
  std::vector<EvalExample> ex;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Scene sc = bench_scene(500 + s);
    ex.push_back({"s" + std::to_string(s), sc.border, sc.interior, sc.nolabel, sc.border, sc.interior});
  }
  const MetricsReport r = evaluate_examples(ex, EvalConfig{});
  const double vals[8] = {r.border.f1.value,   r.border.accuracy.value,   r.border.miou,   r.border.p_at_iou.value,
                          r.interior.f1.value, r.interior.accuracy.value, r.interior.miou, r.interior.p_at_iou.value};
  int ones = 0;
  for (double v : vals) ones += v == 1.0 ? 1 : 0;
  return {ones == 8, fmt("%d of 8 metrics exactly 1.0 over 10 scenes", ones)};
}

// Dropping instances lowers interior F1 and recall; with no jitter every
// survivor matches.
Outcome degradation_monotone() {
  const double drops[3] = {0.0, 0.2, 0.5};
  double f1s[3];
  double recalls[3];
  bool tp_ok = true;
  for (int k = 0; k < 3; ++k) {
    std::vector<EvalExample> ex;
    std::uint64_t tp = 0;
    std::uint64_t fn = 0;
    std::size_t survivors = 0;
    for (std::uint64_t s = 0; s < 10; ++s) {
      const Scene sc = bench_scene(700 + s);
      const Degraded d = degrade(sc.instances, drops[k], 0, 31 + s);
      survivors += d.kept.size();
      const auto m = match_instances(d.instances, sc.instances, sc.nolabel, 0.95);
      tp += m.tp;
      fn += m.fn;
      ex.push_back({"s", sc.border, sc.interior, sc.nolabel, border_of(d.instances), interior_of(d.instances)});
    }
    EvalConfig cfg;
    cfg.border_head = false;
    f1s[k] = evaluate_examples(ex, cfg).interior.f1.value;
    recalls[k] = 1.0 - static_cast<double>(fn) / static_cast<double>(tp + fn);
    tp_ok = tp_ok && tp == survivors;
  }
  const bool pass = f1s[0] > f1s[1] && f1s[1] > f1s[2] && recalls[0] > recalls[1] && recalls[1] > recalls[2] && tp_ok;
  return {pass, fmt("F1 %.4f > %.4f > %.4f, recall %.3f > %.3f > %.3f, tp==survivors %s", f1s[0], f1s[1], f1s[2],
                    recalls[0], recalls[1], recalls[2], tp_ok ? "yes" : "no")};
}

// An all-ones no-label mask changes nothing; errors outside the labelled
// region are not counted.
Outcome masking() {
  bool equal = true;
  bool outside_ignored = true;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Scene sc = bench_scene(900 + s);
    Xorshift64Star rng(s);
    const BinaryMask noisy_b = ft::random_mask(224, 224, 0.1, rng);
    const BinaryMask noisy_i = ft::random_mask(224, 224, 0.4, rng);
    const NoLabelMask ones(224, 224, std::uint8_t{1});
    const MetricsReport a = evaluate_examples(std::vector<EvalExample>{{"x", sc.border, sc.interior, ones, noisy_b, noisy_i}}, EvalConfig{});
    // Reference computed with the no-label mask dropped entirely.
    const ConfusionCounts plain = pixel_confusion(noisy_i, sc.interior);
    const auto plain_match = match_instances(head_instances(noisy_i, false, Connectivity::kFour, 0),
                                             head_instances(sc.interior, false, Connectivity::kFour, 0), 0.95);
    equal = equal && a.interior.pixels == plain && a.interior.instance_tp == plain_match.tp &&
            a.interior.instance_fp == plain_match.fp && a.interior.instance_fn == plain_match.fn;

    // Left half labelled; corrupt the prediction only on the right half.
    const NoLabelMask left = make_grid<std::uint8_t, NoLabelMaskTraits>(224, 224, [](int, int c) { return c < 112 ? 1 : 0; });
    auto corrupt = [&](const BinaryMask& m) {
      return make_grid<std::uint8_t, BinaryMaskTraits>(224, 224, [&](int r, int c) {
        return static_cast<std::uint8_t>(c < 112 ? m.at(r, c) : 1 - m.at(r, c));
      });
    };
    const MetricsReport clean = evaluate_examples(std::vector<EvalExample>{{"x", sc.border, sc.interior, left, sc.border, sc.interior}}, EvalConfig{});
    const MetricsReport dirty = evaluate_examples(
        std::vector<EvalExample>{{"x", sc.border, sc.interior, left, corrupt(sc.border), corrupt(sc.interior)}}, EvalConfig{});
    outside_ignored = outside_ignored && clean.interior.pixels == dirty.interior.pixels &&
                      clean.border.pixels == dirty.border.pixels && dirty.interior.pixels.fp == 0 &&
                      dirty.interior.pixels.fn == 0;
  }
  return {equal && outside_ignored,
          fmt("all-ones mask equals unmasked: %s; outside errors ignored: %s", equal ? "yes" : "no",
              outside_ignored ? "yes" : "no")};
}

// Frozen benchmark: 20 synthetic scenes (seeds 1000..1019, 12 fields each,
// noise 0.02), default parameters, recovery at IoU >= 0.5.
constexpr double kCwPinnedRecovery = 0.9125;

Outcome cw_regression() {
  std::uint64_t tp = 0;
  std::uint64_t total = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    SceneSpec spec;
    spec.seed = 1000 + s;
    spec.noise_std = 0.02;
    const Scene sc = generate(spec);
    const Delineation d = delineate(sc.tile(), CWParams{});
    const auto m = match_instances(d.instances, sc.instances, 0.5);
    tp += m.tp;
    total += m.tp + m.fn;
  }
  const double frac = static_cast<double>(tp) / static_cast<double>(total);
  return {std::abs(frac - kCwPinnedRecovery) <= 0.02,
          fmt("recovered %llu/%llu = %.4f, pinned %.4f +/- 0.02", static_cast<unsigned long long>(tp),
              static_cast<unsigned long long>(total), frac, kCwPinnedRecovery)};
}

// 5000 entries split 80/10/10, byte-identical for the same seed.
Outcome split_determinism() {
  std::vector<ManifestEntry> entries(5000);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    ManifestEntry& e = entries[i];
    e.id = fmt("r_%05zu", i);
    e.region = "r";
    e.tile = e.id + ".tile.fbt";
    e.border = e.id + ".border.fbt";
    e.interior = e.id + ".interior.fbt";
    e.nolabel = e.id + ".nolabel.fbt";
  }
  const DatasetManifest a = random_split(entries, SplitRatios{}, 2024);
  const DatasetManifest b = random_split(entries, SplitRatios{}, 2024);
  const DatasetManifest c = random_split(entries, SplitRatios{}, 2025);
  const auto n = [&](Split s) { return a.in_split(s).size(); };
  const std::size_t tr = n(Split::kTrain);
  const std::size_t va = n(Split::kVal);
  const std::size_t te = n(Split::kTest);
  const bool same = manifest_to_jsonl(a) == manifest_to_jsonl(b);
  const bool differs = manifest_to_jsonl(a) != manifest_to_jsonl(c);
  return {tr == 4000 && va == 500 && te == 500 && same && differs,
          fmt("train %zu val %zu test %zu, same seed identical: %s, other seed differs: %s", tr, va, te,
              same ? "yes" : "no", differs ? "yes" : "no")};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"metric-conformance", metric_conformance}, {"matching-optimality", matching_optimality},
      {"polygon-roundtrip", polygon_roundtrip},   {"perfect-predictor", perfect_predictor},
      {"degradation-monotone", degradation_monotone}, {"nolabel-masking", masking},
      {"cw-regression", cw_regression},           {"split-determinism", split_determinism},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
