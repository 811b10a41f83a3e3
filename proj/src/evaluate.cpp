#include "fieldseg/evaluate.hpp"

#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fieldseg/parallel.hpp"
#include "fieldseg/tile_io.hpp"

namespace fieldseg {
namespace {

using ojson = nlohmann::ordered_json;

struct ImageHead {
  ConfusionCounts pixels;
  InstanceMatchResult match;
  PrecisionValue precision;
};

ImageHead evaluate_head(const BinaryMask& pred, const BinaryMask& gt, const NoLabelMask& nolabel, bool border_head,
                        const EvalConfig& config) {
  ImageHead out;
  out.pixels = pixel_confusion(pred, gt, nolabel);
  const InstanceMap pred_inst = head_instances(pred, border_head, config.connectivity, config.min_instance_area);
  const InstanceMap gt_inst = head_instances(gt, border_head, config.connectivity, config.min_instance_area);
  out.match = match_instances(pred_inst, gt_inst, nolabel, config.iou_threshold);
  out.precision = precision_at_iou(out.match);
  return out;
}

HeadReport aggregate(const std::vector<ImageHead>& images) {
  HeadReport r;
  r.applicable = true;
  std::vector<ConfusionCounts> per_image;
  per_image.reserve(images.size());
  double p_sum = 0.0;
  std::size_t p_count = 0;
  for (const auto& im : images) {
    r.pixels += im.pixels;
    per_image.push_back(im.pixels);
    r.instance_tp += im.match.tp;
    r.instance_fp += im.match.fp;
    r.instance_fn += im.match.fn;
    switch (im.precision.status) {
      case PrecisionStatus::kDefined:
        p_sum += im.precision.value;
        ++p_count;
        break;
      case PrecisionStatus::kFlaggedZero:
        ++r.flagged_zero_images;
        ++p_count;
        break;
      case PrecisionStatus::kExcluded:
        ++r.excluded_images;
        break;
    }
  }
  r.f1 = f1(r.pixels);
  r.accuracy = accuracy(r.pixels);
  r.miou = miou(per_image);
  r.p_at_iou = p_count == 0 ? MetricValue{0.0, false} : MetricValue{p_sum / static_cast<double>(p_count), true};
  return r;
}

ojson head_to_json(const HeadReport& h) {
  ojson j;
  j["applicable"] = h.applicable;
  if (!h.applicable) return j;
  j["f1"] = h.f1.value;
  j["f1_defined"] = h.f1.defined;
  j["accuracy"] = h.accuracy.value;
  j["accuracy_defined"] = h.accuracy.defined;
  j["miou"] = h.miou;
  j["p_at_iou"] = h.p_at_iou.value;
  j["p_at_iou_defined"] = h.p_at_iou.defined;
  j["flagged_zero_images"] = h.flagged_zero_images;
  j["excluded_images"] = h.excluded_images;
  j["pixels"] = {{"tp", h.pixels.tp}, {"fp", h.pixels.fp}, {"fn", h.pixels.fn}, {"tn", h.pixels.tn}};
  j["instances"] = {{"tp", h.instance_tp}, {"fp", h.instance_fp}, {"fn", h.instance_fn}};
  return j;
}

HeadReport head_from_json(const nlohmann::json& j) {
  HeadReport h;
  h.applicable = j.at("applicable").get<bool>();
  if (!h.applicable) return h;
  h.f1 = {j.at("f1").get<double>(), j.at("f1_defined").get<bool>()};
  h.accuracy = {j.at("accuracy").get<double>(), j.at("accuracy_defined").get<bool>()};
  h.miou = j.at("miou").get<double>();
  h.p_at_iou = {j.at("p_at_iou").get<double>(), j.at("p_at_iou_defined").get<bool>()};
  h.flagged_zero_images = j.at("flagged_zero_images").get<std::size_t>();
  h.excluded_images = j.at("excluded_images").get<std::size_t>();
  const auto& px = j.at("pixels");
  h.pixels = {px.at("tp").get<std::uint64_t>(), px.at("fp").get<std::uint64_t>(), px.at("fn").get<std::uint64_t>(),
              px.at("tn").get<std::uint64_t>()};
  const auto& in = j.at("instances");
  h.instance_tp = in.at("tp").get<std::uint64_t>();
  h.instance_fp = in.at("fp").get<std::uint64_t>();
  h.instance_fn = in.at("fn").get<std::uint64_t>();
  return h;
}

std::string cell(const MetricValue& v) {
  if (!v.defined) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v.value);
  return buf;
}

}  // namespace

void EvalConfig::validate() const {
  if (!(threshold >= 0.0F && threshold <= 1.0F)) fail(ErrorCode::kInvariant, "threshold must be in [0, 1]");
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) fail(ErrorCode::kInvariant, "iou_threshold must be in (0, 1]");
  if (!border_head && !interior_head) fail(ErrorCode::kInvariant, "at least one head must be evaluated");
}

InstanceMap head_instances(const BinaryMask& mask, bool border_head, Connectivity conn, std::size_t min_area) {
  return mask_to_instances(border_head ? invert(mask) : mask, conn, min_area);
}

MetricsReport evaluate_examples(std::span<const EvalExample> examples, const EvalConfig& config, unsigned threads) {
  config.validate();
  if (examples.empty()) fail(ErrorCode::kEmptyInput, "evaluate: no examples");

  std::string missing;
  for (const auto& ex : examples) {
    if (config.border_head && !ex.pred_border) missing += "\n  " + ex.id + " (border)";
    if (config.interior_head && !ex.pred_interior) missing += "\n  " + ex.id + " (interior)";
  }
  if (!missing.empty()) fail(ErrorCode::kMissingPrediction, "missing predictions:" + missing);

  std::vector<ImageHead> border(examples.size());
  std::vector<ImageHead> interior(examples.size());
  parallel_for(examples.size(), threads, [&](std::size_t i) {
    const EvalExample& ex = examples[i];
    if (config.border_head) border[i] = evaluate_head(*ex.pred_border, ex.gt_border, ex.nolabel, true, config);
    if (config.interior_head)
      interior[i] = evaluate_head(*ex.pred_interior, ex.gt_interior, ex.nolabel, false, config);
  });

  MetricsReport report;
  report.name = config.name;
  report.n_images = examples.size();
  report.threshold = config.threshold;
  report.iou_threshold = config.iou_threshold;
  if (config.border_head) report.border = aggregate(border);
  if (config.interior_head) report.interior = aggregate(interior);
  return report;
}

std::filesystem::path prediction_path(const std::filesystem::path& dir, const std::string& id, bool border_head) {
  return dir / (id + (border_head ? ".border.fbt" : ".interior.fbt"));
}

BinaryMask load_prediction(const std::filesystem::path& path, float threshold) {
  Record rec = read_tile(path);
  if (auto* mask = std::get_if<BinaryMask>(&rec)) return std::move(*mask);
  if (auto* raster = std::get_if<Raster>(&rec)) {
    if (raster->dtype() != DType::kF32 || raster->bands() != 1)
      fail(ErrorCode::kWrongRecordKind, path.string() + ": prediction raster must be single-band f32");
    return fieldseg::threshold(*raster, threshold);
  }
  fail(ErrorCode::kWrongRecordKind,
       path.string() + ": prediction must be a probability raster or binary mask, got " + to_string(kind_of(rec)));
}

MetricsReport evaluate_manifest(const DatasetManifest& manifest, Split split,
                                const std::filesystem::path& predictions_dir, const EvalConfig& config,
                                unsigned threads) {
  config.validate();
  const std::vector<ManifestEntry> entries = manifest.in_split(split);
  if (entries.empty())
    fail(ErrorCode::kEmptyInput, std::string("evaluate: no entries in split '") + to_string(split) + "'");

  std::string missing;
  for (const auto& e : entries) {
    for (bool border_head : {true, false}) {
      if (border_head ? !config.border_head : !config.interior_head) continue;
      const auto p = prediction_path(predictions_dir, e.id, border_head);
      if (!std::filesystem::exists(p)) missing += "\n  " + p.string();
    }
  }
  if (!missing.empty()) fail(ErrorCode::kMissingPrediction, "missing prediction files:" + missing);

  std::vector<std::optional<EvalExample>> loaded(entries.size());
  parallel_for(entries.size(), threads, [&](std::size_t i) {
    const ManifestEntry& e = entries[i];
    EvalExample ex{e.id, read_tile_as<BinaryMask>(manifest.resolve(e.border)),
                   read_tile_as<BinaryMask>(manifest.resolve(e.interior)),
                   read_tile_as<NoLabelMask>(manifest.resolve(e.nolabel)), std::nullopt, std::nullopt};
    if (config.border_head)
      ex.pred_border = load_prediction(prediction_path(predictions_dir, e.id, true), config.threshold);
    if (config.interior_head)
      ex.pred_interior = load_prediction(prediction_path(predictions_dir, e.id, false), config.threshold);
    for (const auto* m : {ex.pred_border ? &*ex.pred_border : nullptr, ex.pred_interior ? &*ex.pred_interior : nullptr}) {
      if (m != nullptr && !m->same_shape(ex.gt_border))
        fail(ErrorCode::kDimensionMismatch, "prediction for '" + e.id + "' does not match the label shape");
    }
    loaded[i] = std::move(ex);
  });

  std::vector<EvalExample> examples;
  examples.reserve(loaded.size());
  for (auto& ex : loaded) examples.push_back(std::move(*ex));
  return evaluate_examples(examples, config, threads);
}

std::string report_to_json(const MetricsReport& report) {
  ojson j;
  j["name"] = report.name;
  j["n_images"] = report.n_images;
  j["threshold"] = report.threshold;
  j["iou_threshold"] = report.iou_threshold;
  j["heads"]["border"] = head_to_json(report.border);
  j["heads"]["interior"] = head_to_json(report.interior);
  return j.dump(2) + "\n";
}

MetricsReport parse_report_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    MetricsReport r;
    r.name = j.at("name").get<std::string>();
    r.n_images = j.at("n_images").get<std::size_t>();
    r.threshold = j.at("threshold").get<double>();
    r.iou_threshold = j.at("iou_threshold").get<double>();
    r.border = head_from_json(j.at("heads").at("border"));
    r.interior = head_from_json(j.at("heads").at("interior"));
    return r;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kInvalidArgument, std::string("malformed report: ") + e.what());
  }
}

std::string render_table(std::span<const MetricsReport> reports) {
  std::size_t name_w = 6;
  for (const auto& r : reports) name_w = std::max(name_w, r.name.size());
  std::ostringstream out;
  auto pad = [](std::string s, std::size_t w) {
    if (s.size() < w) s.insert(0, w - s.size(), ' ');
    return s;
  };
  const std::vector<std::string> cols{"F1", "acc", "mIoU", "P@IoU"};
  out << std::string(name_w, ' ') << " | " << pad("border", 8 * 4 - 1) << " | " << pad("interior", 8 * 4 - 1) << "\n";
  out << std::string(name_w - 5, ' ') << "model |";
  for (int head = 0; head < 2; ++head) {
    for (const auto& c : cols) out << pad(c, 8);
    out << (head == 0 ? " |" : "");
  }
  out << "\n" << std::string(name_w + 2 + 8 * 4 + 2 + 8 * 4 + 1, '-') << "\n";
  for (const auto& r : reports) {
    out << std::string(name_w - r.name.size(), ' ') << r.name << " |";
    for (const HeadReport* h : {&r.border, &r.interior}) {
      if (h->applicable) {
        out << pad(cell(h->f1), 8) << pad(cell(h->accuracy), 8) << pad(cell({h->miou, true}), 8)
            << pad(cell(h->p_at_iou), 8);
      } else {
        for (int i = 0; i < 4; ++i) out << pad("n/a", 8);
      }
      out << (h == &r.border ? " |" : "");
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace fieldseg
