#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fieldseg/baseline.hpp"
#include "fieldseg/config.hpp"
#include "fieldseg/evaluate.hpp"
#include "fieldseg/instance.hpp"
#include "fieldseg/parallel.hpp"
#include "fieldseg/pipeline.hpp"
#include "fieldseg/rng.hpp"
#include "fieldseg/synthgen.hpp"
#include "fieldseg/tile_io.hpp"

namespace fs = std::filesystem;

namespace fieldseg {
namespace {

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfig:
      return 1;
    case ErrorCode::kInvariant:
      return 3;
    default:
      return 2;
  }
}

std::optional<std::string> config_path_from_args(int argc, const char* const* argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--config" && i + 1 < argc) return std::string(argv[i + 1]);
    if (a.rfind("--config=", 0) == 0) return a.substr(9);
  }
  if (const char* env = std::getenv("FIELDSEG_CONFIG"); env != nullptr && *env != '\0') return std::string(env);
  return std::nullopt;
}

void require(const std::string& value, const char* what) {
  if (value.empty()) fail(ErrorCode::kConfig, std::string(what) + " is required");
}

fs::path manifest_path(const RunConfig& c) {
  if (!c.manifest.empty()) return c.manifest;
  require(c.workdir, "--workdir or --manifest");
  return fs::path(c.workdir) / "manifest.jsonl";
}

std::string relative_to(const fs::path& file, const fs::path& base) {
  return fs::proximate(file, base.empty() ? fs::path(".") : base).generic_string();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot open for writing: " + path.string());
  out << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_record(const fs::path& path, const Record& record) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_tile(record, path);
}

DatedRaster parse_dated_input(const std::string& spec) {
  const auto at = spec.rfind('@');
  if (at == std::string::npos || at == 0)
    fail(ErrorCode::kConfig, "input '" + spec + "' must look like <path>@<YYYY-MM-DD>");
  Date date;
  try {
    date = parse_date(spec.substr(at + 1));
  } catch (const Error& e) {
    fail(ErrorCode::kConfig, "input '" + spec + "': " + e.what());
  }
  return {read_tile_as<Raster>(spec.substr(0, at)), date};
}

Frame frame_of(const Raster& reference) { return Frame{reference.width(), reference.height(), reference.geo()}; }

InstanceMap instances_in_frame(const std::vector<FieldPolygon>& polys, const Frame& frame) {
  std::vector<FieldPolygon> pixel;
  pixel.reserve(polys.size());
  for (const auto& p : polys) {
    if (is_degenerate(p)) continue;
    pixel.push_back(frame.geo ? to_pixel_space(p, *frame.geo) : p);
  }
  return polygons_to_instance_map(pixel, frame.width, frame.height);
}

struct LabelSet {
  BinaryMask border;
  BinaryMask interior;
  NoLabelMask nolabel;
  InstanceMap instances;
};

LabelSet rasterize(const std::vector<FieldPolygon>& polys, const Frame& frame, LabelMode mode) {
  LabelMasks m = labels_to_masks(polys, frame, mode);
  return {std::move(m.border), std::move(m.interior), std::move(m.nolabel), instances_in_frame(polys, frame)};
}

void write_labels(const fs::path& stem, const LabelSet& labels) {
  write_record(stem.string() + ".border.fbt", labels.border);
  write_record(stem.string() + ".interior.fbt", labels.interior);
  write_record(stem.string() + ".nolabel.fbt", labels.nolabel);
  write_record(stem.string() + ".instances.fbt", labels.instances);
}

LabelMode parse_label_mode(const std::string& s) {
  if (s == "full") return LabelMode::kFull;
  if (s == "partial") return LabelMode::kPartial;
  fail(ErrorCode::kConfig, "label mode must be 'full' or 'partial', got '" + s + "'");
}

// Options that mirror RunConfig fields; bound to the config so flags override
// whatever the file set.
struct Shared {
  std::string connectivity;
  std::string format;
  std::string ratios;
};

void add_eval_options(CLI::App* cmd, RunConfig& c, Shared& s) {
  cmd->add_option("--threshold", c.threshold, "Probability threshold for f32 predictions");
  cmd->add_option("--iou-threshold", c.iou_threshold, "IoU threshold for instance precision");
  cmd->add_option("--connectivity", s.connectivity, "four | eight");
  cmd->add_option("--min-instance-area", c.min_instance_area, "Drop predicted components smaller than this");
  cmd->add_option("--format", s.format, "json | table");
  cmd->add_option("--name", c.name, "Model name shown in the report");
}

void add_cw_options(CLI::App* cmd, RunConfig& c) {
  cmd->add_option("--gaussian-sigma", c.cw.gaussian_sigma);
  cmd->add_option("--canny-low", c.cw.canny_low);
  cmd->add_option("--canny-high", c.cw.canny_high);
  cmd->add_option("--min-field-area", c.cw.min_field_area);
  cmd->add_option("--max-field-area", c.cw.max_field_area);
  cmd->add_option("--homogeneity-max-std", c.cw.homogeneity_max_std);
  cmd->add_option("--seed-min-distance", c.cw.seed_min_distance);
}

void finish_shared(RunConfig& c, const Shared& s) {
  if (!s.connectivity.empty()) {
    try {
      c.connectivity = parse_connectivity(s.connectivity);
    } catch (const Error& e) {
      fail(ErrorCode::kConfig, e.what());
    }
  }
  if (!s.format.empty()) c.format = parse_report_format(s.format);
  if (!s.ratios.empty()) {
    std::vector<std::string> parts;
    std::stringstream ss(s.ratios);
    for (std::string p; std::getline(ss, p, ',');) parts.push_back(p);
    apply_kv(c, {{"ratios", parts}});
  }
  c.validate();
}

// ---------------------------------------------------------------------------

void cmd_composite(const RunConfig& c, const std::vector<std::string>& ranges, int year, std::ostream& out) {
  if (c.inputs.empty()) fail(ErrorCode::kConfig, "at least one --input is required");
  require(c.workdir, "--workdir");
  std::vector<DatedRaster> stack;
  for (const auto& in : c.inputs) stack.push_back(parse_dated_input(in));

  std::vector<DateRange> windows;
  if (!ranges.empty()) {
    for (const auto& r : ranges) {
      const auto colon = r.find(':');
      if (colon == std::string::npos) fail(ErrorCode::kConfig, "--range must be START:END, got '" + r + "'");
      try {
        windows.emplace_back(parse_date(r.substr(0, colon)), parse_date(r.substr(colon + 1)));
      } catch (const Error& e) {
        fail(ErrorCode::kConfig, "--range '" + r + "': " + e.what());
      }
    }
  } else {
    if (year == 0) fail(ErrorCode::kConfig, "either --year or --range is required");
    const auto seasons = seasonal_ranges(year);
    windows.assign(seasons.begin(), seasons.end());
  }

  for (std::size_t k = 0; k < windows.size(); ++k) {
    const fs::path path = fs::path(c.workdir) / ("composite_" + std::to_string(k + 1) + ".fbt");
    write_record(path, seasonal_median_composite(stack, windows[k]));
    out << path.generic_string() << "\n";
  }
}

void cmd_rasterize(const RunConfig& c, const std::string& reference, const std::string& mode, const std::string& out_stem,
                   std::ostream& out) {
  require(c.labels, "--labels");
  require(reference, "--reference");
  require(out_stem, "--out");
  const Raster ref = read_tile_as<Raster>(reference);
  const auto polys = read_geojson(c.labels);
  const LabelSet labels = rasterize(polys, frame_of(ref), parse_label_mode(mode));
  write_labels(out_stem, labels);
  out << "rasterized " << polys.size() << " polygons into " << out_stem << ".{border,interior,nolabel,instances}.fbt\n";
}

void cmd_tile(const RunConfig& c, const std::vector<std::string>& composites, const std::string& region,
              const std::string& mode, bool append, std::ostream& out) {
  if (composites.empty()) fail(ErrorCode::kConfig, "at least one --composite is required");
  require(c.workdir, "--workdir");
  std::vector<Raster> rasters;
  for (const auto& p : composites) rasters.push_back(read_tile_as<Raster>(p));
  const std::vector<TileTensor> tiles = tile_grid(rasters, c.tile_size);
  const auto origins = tile_origins(rasters.front().width(), rasters.front().height(), c.tile_size);

  std::optional<LabelSet> labels;
  if (!c.labels.empty()) labels = rasterize(read_geojson(c.labels), frame_of(rasters.front()), parse_label_mode(mode));

  const fs::path mpath = manifest_path(c);
  const fs::path base = mpath.parent_path();
  DatasetManifest manifest;
  manifest.base_dir = base;
  if (append && fs::exists(mpath)) manifest = read_manifest(mpath);

  const fs::path dir(c.workdir);
  for (std::size_t i = 0; i < tiles.size(); ++i) {
    const auto& o = origins[i];
    ManifestEntry e;
    e.id = region + "_" + std::to_string(o.row) + "_" + std::to_string(o.col);
    e.region = region;
    const fs::path tile_path = dir / "tiles" / (e.id + ".tile.fbt");
    write_record(tile_path, tiles[i]);
    e.tile = relative_to(tile_path, base);
    if (labels) {
      const int n = c.tile_size;
      const fs::path stem = dir / "labels" / e.id;
      write_labels(stem, {crop(labels->border, o.row, o.col, n, n), crop(labels->interior, o.row, o.col, n, n),
                          crop(labels->nolabel, o.row, o.col, n, n), crop(labels->instances, o.row, o.col, n, n)});
      e.border = relative_to(stem.string() + ".border.fbt", base);
      e.interior = relative_to(stem.string() + ".interior.fbt", base);
      e.nolabel = relative_to(stem.string() + ".nolabel.fbt", base);
      e.instances = relative_to(stem.string() + ".instances.fbt", base);
    }
    manifest.entries.push_back(std::move(e));
  }
  // Round-trip through the parser so duplicate ids from --append are caught.
  const std::string text = manifest_to_jsonl(manifest);
  parse_manifest(text, base);
  write_text(mpath, text);
  out << "wrote " << tiles.size() << " tiles to " << (dir / "tiles").generic_string() << "\n";
}

void cmd_split(const RunConfig& c, const std::string& out_path, std::ostream& out) {
  const fs::path in = manifest_path(c);
  const DatasetManifest m = read_manifest(in);
  DatasetManifest s = random_split(m.entries, c.ratios, c.seed);
  const fs::path target = out_path.empty() ? in : fs::path(out_path);
  if (fs::absolute(target).parent_path() != fs::absolute(in).parent_path())
    fail(ErrorCode::kConfig, "--out must live next to the input manifest so relative paths stay valid");
  write_manifest(target, s);
  const auto counts = split_counts(s.entries.size(), c.ratios);
  out << "train " << counts.train << " val " << counts.val << " test " << counts.test << "\n";
}

struct SynthOptions {
  int count = 10;
  int fields = 12;
  int field_min = 16;
  int field_max = 48;
  int timesteps = 3;
  int bands = 3;
  double noise = 0.01;
  int gap = 2;
  std::string split = "test";
  std::string perfect;
  unsigned threads = 1;
};

void cmd_synth(const RunConfig& c, const SynthOptions& o, std::ostream& out) {
  require(c.workdir, "--workdir");
  if (o.count <= 0) fail(ErrorCode::kConfig, "--count must be positive");
  const Split split = parse_split(o.split);
  const fs::path dir(c.workdir);
  const fs::path mpath = manifest_path(c);
  const fs::path base = mpath.parent_path();

  std::vector<ManifestEntry> entries(static_cast<std::size_t>(o.count));
  parallel_for(entries.size(), o.threads, [&](std::size_t i) {
    SceneSpec spec;
    spec.seed = splitmix64(c.seed + i);
    spec.width = spec.height = c.tile_size;
    spec.n_fields = o.fields;
    spec.field_size_min = o.field_min;
    spec.field_size_max = o.field_max;
    spec.timesteps = o.timesteps;
    spec.bands = o.bands;
    spec.noise_std = o.noise;
    spec.boundary_gap = o.gap;
    const Scene scene = generate(spec);

    char name[32];
    std::snprintf(name, sizeof name, "synth_%05zu", i);
    ManifestEntry& e = entries[i];
    e.id = name;
    e.region = "synthetic";
    e.split = split;
    const fs::path tile_path = dir / "tiles" / (e.id + ".tile.fbt");
    write_record(tile_path, scene.tile());
    const fs::path stem = dir / "labels" / e.id;
    write_labels(stem, {scene.border, scene.interior, scene.nolabel, scene.instances});
    write_text(stem.string() + ".geojson", to_geojson(scene.polygons));
    e.tile = relative_to(tile_path, base);
    e.border = relative_to(stem.string() + ".border.fbt", base);
    e.interior = relative_to(stem.string() + ".interior.fbt", base);
    e.nolabel = relative_to(stem.string() + ".nolabel.fbt", base);
    e.instances = relative_to(stem.string() + ".instances.fbt", base);
    if (!o.perfect.empty()) {
      write_record(prediction_path(o.perfect, e.id, true), mask_to_raster(scene.border));
      write_record(prediction_path(o.perfect, e.id, false), mask_to_raster(scene.interior));
    }
  });

  DatasetManifest m;
  m.entries = std::move(entries);
  m.base_dir = base;
  write_manifest(mpath, m);
  out << "wrote " << o.count << " synthetic scenes; manifest " << mpath.generic_string() << "\n";
}

void cmd_delineate(const RunConfig& c, const std::string& split_name, unsigned threads, std::ostream& out) {
  require(c.predictions, "--predictions");
  const DatasetManifest m = read_manifest(manifest_path(c));
  const auto entries = m.in_split(parse_split(split_name));
  if (entries.empty()) fail(ErrorCode::kEmptyInput, "no entries in split '" + split_name + "'");
  fs::create_directories(c.predictions);
  parallel_for(entries.size(), threads, [&](std::size_t i) {
    const ManifestEntry& e = entries[i];
    const Delineation d = delineate(read_tile_as<TileTensor>(m.resolve(e.tile)), c.cw);
    write_record(prediction_path(c.predictions, e.id, true), d.border);
    write_record(fs::path(c.predictions) / (e.id + ".instances.fbt"), d.instances);
  });
  out << "delineated " << entries.size() << " tiles into " << c.predictions << "\n";
}

void emit_report(const MetricsReport& r, ReportFormat format, std::ostream& out) {
  if (format == ReportFormat::kJson) {
    out << report_to_json(r);
  } else {
    out << render_table(std::span<const MetricsReport>(&r, 1));
  }
}

void cmd_evaluate(const RunConfig& c, const std::string& split_name, const std::string& heads,
                  const std::string& report_out, unsigned threads, std::ostream& out) {
  require(c.predictions, "--predictions");
  EvalConfig ec = c.eval_config();
  if (heads == "border") {
    ec.interior_head = false;
  } else if (heads == "interior") {
    ec.border_head = false;
  } else if (heads != "both") {
    fail(ErrorCode::kConfig, "--heads must be both, border or interior");
  }
  const DatasetManifest m = read_manifest(manifest_path(c));
  const MetricsReport r = evaluate_manifest(m, parse_split(split_name), c.predictions, ec, threads);
  if (!report_out.empty()) write_text(report_out, report_to_json(r));
  emit_report(r, c.format, out);
}

void cmd_report(const std::vector<std::string>& files, const RunConfig& c, std::ostream& out) {
  if (files.empty()) fail(ErrorCode::kConfig, "at least one report file is required");
  std::vector<MetricsReport> reports;
  for (const auto& f : files) reports.push_back(parse_report_json(read_text(f)));
  if (c.format == ReportFormat::kJson) {
    for (const auto& r : reports) out << report_to_json(r);
  } else {
    out << render_table(reports);
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig config;
  Shared shared;
  try {
    if (auto path = config_path_from_args(argc, argv)) config = load_config(*path);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  }

  CLI::App app{"Agricultural field boundary toolkit: compositing, tiling, labels, splits, baseline and evaluation"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_flag;
  app.add_option("--config", config_flag, "Key/value config file (also FIELDSEG_CONFIG)");

  auto* composite = app.add_subcommand("composite", "Seasonal median composites from dated rasters");
  std::vector<std::string> ranges;
  int year = 0;
  composite->add_option("--input", config.inputs, "<path>@<YYYY-MM-DD>, repeatable");
  composite->add_option("--year", year, "Build the three seasonal composites of this year");
  composite->add_option("--range", ranges, "START:END date window, repeatable (overrides --year)");
  composite->add_option("--workdir", config.workdir);

  auto* rast = app.add_subcommand("rasterize-labels", "Burn GeoJSON field polygons into label masks");
  std::string reference;
  std::string label_mode = "full";
  std::string out_stem;
  rast->add_option("--labels", config.labels, "GeoJSON polygons");
  rast->add_option("--reference", reference, "Raster defining the frame and georeference");
  rast->add_option("--mode", label_mode, "full | partial");
  rast->add_option("--out", out_stem, "Output path stem");

  auto* tile = app.add_subcommand("tile", "Cut composites (and labels) into tiles and write a manifest");
  std::vector<std::string> composites;
  std::string region = "region";
  bool append = false;
  tile->add_option("--composite", composites, "Composite raster, one per timestep in order");
  tile->add_option("--labels", config.labels, "GeoJSON polygons in the composites' CRS");
  tile->add_option("--mode", label_mode, "full | partial");
  tile->add_option("--region", region);
  tile->add_option("--tile-size", config.tile_size);
  tile->add_option("--workdir", config.workdir);
  tile->add_option("--manifest", config.manifest);
  tile->add_flag("--append", append, "Add entries to an existing manifest");

  auto* split = app.add_subcommand("split", "Seeded train/val/test assignment");
  std::string split_out;
  split->add_option("--manifest", config.manifest);
  split->add_option("--workdir", config.workdir);
  split->add_option("--seed", config.seed);
  split->add_option("--ratios", shared.ratios, "train,val,test");
  split->add_option("--out", split_out, "Write here instead of in place");

  auto* synth = app.add_subcommand("synth", "Generate synthetic rectangle-field scenes");
  SynthOptions so;
  synth->add_option("--workdir", config.workdir);
  synth->add_option("--manifest", config.manifest);
  synth->add_option("--seed", config.seed);
  synth->add_option("--tile-size", config.tile_size);
  synth->add_option("--count", so.count);
  synth->add_option("--fields", so.fields);
  synth->add_option("--field-min", so.field_min);
  synth->add_option("--field-max", so.field_max);
  synth->add_option("--timesteps", so.timesteps);
  synth->add_option("--bands", so.bands);
  synth->add_option("--noise", so.noise);
  synth->add_option("--gap", so.gap);
  synth->add_option("--split", so.split, "Split assigned to every scene");
  synth->add_option("--perfect-predictions", so.perfect, "Also write ground truth as probability predictions here");
  synth->add_option("--threads", so.threads);

  auto* delin = app.add_subcommand("delineate", "Canny + watershed baseline over a manifest split");
  std::string split_name = "test";
  unsigned threads = 1;
  delin->add_option("--manifest", config.manifest);
  delin->add_option("--workdir", config.workdir);
  delin->add_option("--predictions", config.predictions);
  delin->add_option("--split", split_name);
  delin->add_option("--threads", threads);
  add_cw_options(delin, config);

  auto* eval = app.add_subcommand("evaluate", "Score predictions against a manifest split");
  std::string heads = "both";
  std::string report_out;
  eval->add_option("--manifest", config.manifest);
  eval->add_option("--workdir", config.workdir);
  eval->add_option("--predictions", config.predictions);
  eval->add_option("--split", split_name);
  eval->add_option("--heads", heads, "both | border | interior");
  eval->add_option("--out", report_out, "Also write the JSON report here");
  eval->add_option("--threads", threads);
  add_eval_options(eval, config, shared);

  auto* report = app.add_subcommand("report", "Render saved JSON reports as a table");
  std::vector<std::string> report_files;
  report->add_option("reports", report_files, "JSON reports from evaluate --out");
  report->add_option("--format", shared.format, "json | table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 1;
  }

  try {
    finish_shared(config, shared);
    if (*composite) cmd_composite(config, ranges, year, out);
    else if (*rast) cmd_rasterize(config, reference, label_mode, out_stem, out);
    else if (*tile) cmd_tile(config, composites, region, label_mode, append, out);
    else if (*split) cmd_split(config, split_out, out);
    else if (*synth) cmd_synth(config, so, out);
    else if (*delin) cmd_delineate(config, split_name, threads, out);
    else if (*eval) cmd_evaluate(config, split_name, heads, report_out, threads, out);
    else if (*report) cmd_report(report_files, config, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace fieldseg
