#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "fieldseg/baseline.hpp"
#include "fieldseg/evaluate.hpp"
#include "fieldseg/pipeline.hpp"

namespace fieldseg {

enum class ReportFormat { kJson, kTable };

/// Everything a CLI run can be configured with. File keys (sections become a
/// dotted prefix):
///   inputs, labels, workdir, predictions, manifest, tile_size, ratios, seed,
///   threshold, connectivity, iou_threshold, min_instance_area, format, name,
///   cw.gaussian_sigma, cw.canny_low, cw.canny_high, cw.min_field_area,
///   cw.max_field_area, cw.homogeneity_max_std, cw.seed_min_distance
struct RunConfig {
  std::vector<std::string> inputs;  // "<path>@<YYYY-MM-DD>"
  std::string labels;
  std::string workdir;
  std::string predictions;
  std::string manifest;
  int tile_size = 224;
  SplitRatios ratios;
  std::uint64_t seed = 0;
  float threshold = 0.5F;
  Connectivity connectivity = Connectivity::kFour;
  double iou_threshold = 0.95;
  std::size_t min_instance_area = 0;
  ReportFormat format = ReportFormat::kTable;
  std::string name = "fieldseg";
  CWParams cw;

  /// Ratios sum to one, non-empty paths are pairwise distinct, numeric
  /// fields in range. Throws kConfig.
  void validate() const;
  EvalConfig eval_config() const;
};

/// Key/value text: `key = value` lines, `[section]` headers, `#` comments.
/// Values are quoted strings, numbers, true/false, or flat arrays of those.
/// Returns raw values keyed by dotted name; duplicate keys are kConfig errors.
std::map<std::string, std::vector<std::string>> parse_kv(const std::string& text);

/// Applies parsed keys onto `config`; unknown keys and bad values are kConfig.
void apply_kv(RunConfig& config, const std::map<std::string, std::vector<std::string>>& kv);

RunConfig load_config(const std::filesystem::path& path);

ReportFormat parse_report_format(const std::string& text);

}  // namespace fieldseg
