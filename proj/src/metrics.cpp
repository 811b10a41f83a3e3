#include "fieldseg/metrics.hpp"

#include <algorithm>
#include <unordered_map>

namespace fieldseg {
namespace {

__extension__ using u128 = unsigned __int128;

template <typename Include>
ConfusionCounts count_pixels(const BinaryMask& pred, const BinaryMask& gt, Include&& include) {
  if (!pred.same_shape(gt)) fail(ErrorCode::kDimensionMismatch, "pixel_confusion: pred/gt shape mismatch");
  ConfusionCounts c;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!include(i)) continue;
    const bool p = pred[i] != 0;
    const bool g = gt[i] != 0;
    if (p && g) ++c.tp;
    else if (p) ++c.fp;
    else if (g) ++c.fn;
    else ++c.tn;
  }
  return c;
}

constexpr std::uint64_t pair_key(std::uint32_t pred, std::uint32_t gt) noexcept {
  return (static_cast<std::uint64_t>(pred) << 32) | gt;
}

template <typename Include>
InstanceMatchResult match_impl(const InstanceMap& pred, const InstanceMap& gt, double iou_threshold,
                               Include&& include) {
  if (!pred.same_shape(gt)) fail(ErrorCode::kDimensionMismatch, "match_instances: pred/gt shape mismatch");
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0))
    fail(ErrorCode::kInvalidArgument, "match_instances: iou threshold must be in (0, 1]");

  std::unordered_map<std::uint32_t, std::uint64_t> pred_area;
  std::unordered_map<std::uint32_t, std::uint64_t> gt_area;
  std::unordered_map<std::uint64_t, std::uint64_t> overlap;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!include(i)) continue;
    const std::uint32_t p = pred[i];
    const std::uint32_t g = gt[i];
    if (p != 0) ++pred_area[p];
    if (g != 0) ++gt_area[g];
    if (p != 0 && g != 0) ++overlap[pair_key(p, g)];
  }

  std::vector<InstanceMatch> candidates;
  for (const auto& [key, inter] : overlap) {
    const auto p = static_cast<std::uint32_t>(key >> 32);
    const auto g = static_cast<std::uint32_t>(key & 0xFFFFFFFFu);
    const std::uint64_t uni = pred_area[p] + gt_area[g] - inter;
    const double value = static_cast<double>(inter) / static_cast<double>(uni);
    if (value >= iou_threshold) candidates.push_back({p, g, inter, uni, value});
  }
  // Exact ordering by cross-multiplied integer ratios.
  std::sort(candidates.begin(), candidates.end(), [](const InstanceMatch& a, const InstanceMatch& b) {
    const u128 lhs = static_cast<u128>(a.intersection) * b.union_area;
    const u128 rhs = static_cast<u128>(b.intersection) * a.union_area;
    if (lhs != rhs) return lhs > rhs;
    if (a.gt_id != b.gt_id) return a.gt_id < b.gt_id;
    return a.pred_id < b.pred_id;
  });

  InstanceMatchResult result;
  std::unordered_map<std::uint32_t, bool> pred_used;
  std::unordered_map<std::uint32_t, bool> gt_used;
  for (const auto& m : candidates) {
    if (pred_used[m.pred_id] || gt_used[m.gt_id]) continue;
    pred_used[m.pred_id] = true;
    gt_used[m.gt_id] = true;
    result.matches.push_back(m);
  }
  result.tp = result.matches.size();
  result.fp = pred_area.size() - result.tp;
  result.fn = gt_area.size() - result.tp;
  return result;
}

}  // namespace

ConfusionCounts pixel_confusion(const BinaryMask& pred, const BinaryMask& gt, const NoLabelMask& nolabel) {
  if (!pred.same_shape(nolabel)) fail(ErrorCode::kDimensionMismatch, "pixel_confusion: nolabel shape mismatch");
  return count_pixels(pred, gt, [&](std::size_t i) { return nolabel[i] != 0; });
}

ConfusionCounts pixel_confusion(const BinaryMask& pred, const BinaryMask& gt) {
  return count_pixels(pred, gt, [](std::size_t) { return true; });
}

MetricValue f1(const ConfusionCounts& c) noexcept {
  const std::uint64_t den = 2 * c.tp + c.fp + c.fn;
  if (den == 0) return {0.0, false};
  return {static_cast<double>(2 * c.tp) / static_cast<double>(den), true};
}

MetricValue accuracy(const ConfusionCounts& c) noexcept {
  const std::uint64_t den = c.total();
  if (den == 0) return {0.0, false};
  return {static_cast<double>(c.tp + c.tn) / static_cast<double>(den), true};
}

double iou(const ConfusionCounts& c) noexcept {
  const std::uint64_t den = c.tp + c.fp + c.fn;
  if (den == 0) return 1.0;
  return static_cast<double>(c.tp) / static_cast<double>(den);
}

double miou(std::span<const ConfusionCounts> per_image) {
  if (per_image.empty()) fail(ErrorCode::kEmptyInput, "miou: no images");
  double sum = 0.0;
  for (const auto& c : per_image) sum += iou(c);
  return sum / static_cast<double>(per_image.size());
}

InstanceMatchResult match_instances(const InstanceMap& pred, const InstanceMap& gt,
                                    const NoLabelMask& nolabel, double iou_threshold) {
  if (!pred.same_shape(nolabel)) fail(ErrorCode::kDimensionMismatch, "match_instances: nolabel shape mismatch");
  return match_impl(pred, gt, iou_threshold, [&](std::size_t i) { return nolabel[i] != 0; });
}

InstanceMatchResult match_instances(const InstanceMap& pred, const InstanceMap& gt, double iou_threshold) {
  return match_impl(pred, gt, iou_threshold, [](std::size_t) { return true; });
}

PrecisionValue precision_at_iou(const InstanceMatchResult& r) noexcept {
  const std::uint64_t den = r.tp + r.fp;
  if (den == 0) {
    return r.fn > 0 ? PrecisionValue{0.0, PrecisionStatus::kFlaggedZero}
                    : PrecisionValue{0.0, PrecisionStatus::kExcluded};
  }
  return {static_cast<double>(r.tp) / static_cast<double>(den), PrecisionStatus::kDefined};
}

}  // namespace fieldseg
