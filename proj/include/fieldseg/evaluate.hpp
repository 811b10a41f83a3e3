#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fieldseg/instance.hpp"
#include "fieldseg/metrics.hpp"
#include "fieldseg/pipeline.hpp"

namespace fieldseg {

struct EvalConfig {
  float threshold = 0.5F;  // applied to f32 probability predictions
  double iou_threshold = 0.95;
  Connectivity connectivity = Connectivity::kFour;
  std::size_t min_instance_area = 0;
  bool border_head = true;
  bool interior_head = true;
  std::string name = "fieldseg";

  void validate() const;
};

/// One test image: ground truth plus (possibly absent) binarised predictions.
struct EvalExample {
  std::string id;
  BinaryMask gt_border;
  BinaryMask gt_interior;
  NoLabelMask nolabel;
  std::optional<BinaryMask> pred_border;
  std::optional<BinaryMask> pred_interior;
};

struct HeadReport {
  bool applicable = false;
  ConfusionCounts pixels;         // pooled over all labelled pixels
  MetricValue f1;                 // from pooled counts
  MetricValue accuracy;           // from pooled counts
  double miou = 0.0;              // mean of per-image iou
  MetricValue p_at_iou;           // mean over non-excluded images
  std::size_t flagged_zero_images = 0;
  std::size_t excluded_images = 0;
  std::uint64_t instance_tp = 0;  // pooled matching counts
  std::uint64_t instance_fp = 0;
  std::uint64_t instance_fn = 0;

  bool operator==(const HeadReport&) const = default;
};

struct MetricsReport {
  std::string name;
  std::size_t n_images = 0;
  double threshold = 0.5;
  double iou_threshold = 0.95;
  HeadReport border;
  HeadReport interior;

  bool operator==(const MetricsReport&) const = default;
};

/// Instances of a head's binary mask. The interior head labels the connected
/// components of the mask; the border head labels the components of its
/// complement (the regions the border lines enclose).
InstanceMap head_instances(const BinaryMask& mask, bool border_head, Connectivity conn, std::size_t min_area);

/// Per-image pixel confusion, then instance matching between head_instances of
/// prediction and ground truth, all restricted to nolabel == 1. A head is
/// evaluated when enabled in the config; every enabled head needs a
/// prediction on every example (kMissingPrediction otherwise).
MetricsReport evaluate_examples(std::span<const EvalExample> examples, const EvalConfig& config,
                                unsigned threads = 1);

/// Predictions live in `predictions_dir` as <id>.border.fbt and
/// <id>.interior.fbt, either f32 probability rasters (thresholded) or binary
/// masks (used as is). All missing files are reported in one error.
MetricsReport evaluate_manifest(const DatasetManifest& manifest, Split split,
                                const std::filesystem::path& predictions_dir, const EvalConfig& config,
                                unsigned threads = 1);

std::filesystem::path prediction_path(const std::filesystem::path& dir, const std::string& id, bool border_head);

/// Loads a prediction file as a binary mask (thresholding f32 rasters).
BinaryMask load_prediction(const std::filesystem::path& path, float threshold);

std::string report_to_json(const MetricsReport& report);
MetricsReport parse_report_json(const std::string& text);

/// Fixed-width table: one row per report, border and interior column groups
/// of F1, accuracy, mIoU and P@IoU. Non-applicable heads print "n/a".
std::string render_table(std::span<const MetricsReport> reports);

}  // namespace fieldseg
