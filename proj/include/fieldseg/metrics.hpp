#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fieldseg/raster.hpp"

namespace fieldseg {

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  std::uint64_t total() const noexcept { return tp + fp + fn + tn; }
  ConfusionCounts& operator+=(const ConfusionCounts& o) noexcept {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
  }
  bool operator==(const ConfusionCounts&) const = default;
};

/// A ratio whose denominator may be zero; undefined values carry 0.
struct MetricValue {
  double value = 0.0;
  bool defined = true;
  bool operator==(const MetricValue&) const = default;
};

/// Counts over pixels with nolabel == 1.
ConfusionCounts pixel_confusion(const BinaryMask& pred, const BinaryMask& gt,
                                const NoLabelMask& nolabel);
/// Counts over every pixel.
ConfusionCounts pixel_confusion(const BinaryMask& pred, const BinaryMask& gt);

/// 2tp / (2tp + fp + fn).
MetricValue f1(const ConfusionCounts& c) noexcept;
/// (tp + tn) / total.
MetricValue accuracy(const ConfusionCounts& c) noexcept;
/// tp / (tp + fp + fn); an image with nothing to disagree about scores 1.
double iou(const ConfusionCounts& c) noexcept;
/// Mean of per-image iou(); throws kEmptyInput on an empty list.
double miou(std::span<const ConfusionCounts> per_image);

struct InstanceMatch {
  std::uint32_t pred_id = 0;
  std::uint32_t gt_id = 0;
  std::uint64_t intersection = 0;
  std::uint64_t union_area = 0;
  double iou = 0.0;
  bool operator==(const InstanceMatch&) const = default;
};

struct InstanceMatchResult {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::vector<InstanceMatch> matches;
};

/// Pairwise overlap of instances restricted to labelled pixels, then greedy
/// one-to-one matching of pairs with iou >= iou_threshold in descending iou
/// (ties: smaller gt id, then smaller pred id). Instances with no labelled
/// pixels are ignored on both sides.
InstanceMatchResult match_instances(const InstanceMap& pred, const InstanceMap& gt,
                                    const NoLabelMask& nolabel, double iou_threshold = 0.95);
InstanceMatchResult match_instances(const InstanceMap& pred, const InstanceMap& gt,
                                    double iou_threshold = 0.95);

enum class PrecisionStatus {
  kDefined,
  kFlaggedZero,  // no predictions but missed ground truth: counts as 0
  kExcluded,     // nothing predicted, nothing to find: left out of aggregates
};

struct PrecisionValue {
  double value = 0.0;
  PrecisionStatus status = PrecisionStatus::kDefined;
};

/// tp / (tp + fp) with the zero-denominator conventions above.
PrecisionValue precision_at_iou(const InstanceMatchResult& r) noexcept;

}  // namespace fieldseg
