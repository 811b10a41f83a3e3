#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "fieldseg/baseline.hpp"
#include "fieldseg/evaluate.hpp"
#include "fieldseg/instance.hpp"
#include "fieldseg/metrics.hpp"
#include "fieldseg/pipeline.hpp"
#include "fieldseg/synthgen.hpp"
#include "fieldseg/tile_io.hpp"

namespace py = pybind11;
using namespace fieldseg;

namespace {

template <typename T>
using CArray = py::array_t<T, py::array::c_style | py::array::forcecast>;

template <typename G>
G to_grid(const CArray<typename G::value_type>& a) {
  if (a.ndim() != 2) throw py::value_error("expected a 2-D array");
  const auto h = static_cast<int>(a.shape(0));
  const auto w = static_cast<int>(a.shape(1));
  std::vector<typename G::value_type> data(a.data(), a.data() + a.size());
  return G(w, h, std::move(data));
}

template <typename G>
py::array_t<typename G::value_type> from_grid(const G& g) {
  py::array_t<typename G::value_type> out({g.height(), g.width()});
  std::copy(g.data().begin(), g.data().end(), out.mutable_data());
  return out;
}

// (H, W) or (H, W, bands) float32.
Raster to_raster(const CArray<float>& a) {
  if (a.ndim() != 2 && a.ndim() != 3) throw py::value_error("expected a (H, W) or (H, W, bands) array");
  const int bands = a.ndim() == 3 ? static_cast<int>(a.shape(2)) : 1;
  std::vector<float> data(a.data(), a.data() + a.size());
  return Raster(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)), bands, std::move(data));
}

py::array from_raster(const Raster& r) {
  std::vector<py::ssize_t> shape{r.height(), r.width()};
  if (r.bands() > 1) shape.push_back(r.bands());
  return std::visit(
      [&](const auto& v) -> py::array {
        using T = typename std::decay_t<decltype(v)>::value_type;
        py::array_t<T> out(shape);
        std::copy(v.begin(), v.end(), out.mutable_data());
        return out;
      },
      r.samples());
}

// (N, N, bands, timesteps) float32.
TileTensor to_tile(const CArray<float>& a) {
  if (a.ndim() != 4 || a.shape(0) != a.shape(1)) throw py::value_error("expected an (N, N, bands, timesteps) array");
  std::vector<float> data(a.data(), a.data() + a.size());
  return TileTensor(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(2)), static_cast<int>(a.shape(3)),
                    std::move(data));
}

py::array_t<float> from_tile(const TileTensor& t) {
  py::array_t<float> out({t.size(), t.size(), t.bands(), t.timesteps()});
  std::copy(t.data().begin(), t.data().end(), out.mutable_data());
  return out;
}

py::dict counts_dict(const ConfusionCounts& c) {
  py::dict d;
  d["tp"] = c.tp;
  d["fp"] = c.fp;
  d["fn"] = c.fn;
  d["tn"] = c.tn;
  return d;
}

ConfusionCounts counts_from(const py::dict& d) {
  auto get = [&](const char* k) { return d.contains(k) ? d[k].cast<std::uint64_t>() : std::uint64_t{0}; };
  return {get("tp"), get("fp"), get("fn"), get("tn")};
}

CWParams cw_from(const py::dict& d) {
  CWParams p;
  for (const auto& [key, value] : d) {
    const auto k = key.cast<std::string>();
    if (k == "gaussian_sigma") p.gaussian_sigma = value.cast<double>();
    else if (k == "canny_low") p.canny_low = value.cast<double>();
    else if (k == "canny_high") p.canny_high = value.cast<double>();
    else if (k == "min_field_area") p.min_field_area = value.cast<int>();
    else if (k == "max_field_area") p.max_field_area = value.cast<int>();
    else if (k == "homogeneity_max_std") p.homogeneity_max_std = value.cast<double>();
    else if (k == "seed_min_distance") p.seed_min_distance = value.cast<double>();
    else throw py::key_error("unknown CWParams field: " + k);
  }
  return p;
}

}  // namespace

PYBIND11_MODULE(_fieldseg, m) {
  m.doc() = "Field boundary toolkit core";

  py::register_exception<Error>(m, "FieldsegError", PyExc_ValueError);

  // FBT1 I/O ---------------------------------------------------------------
  m.def("read_tile", [](const std::filesystem::path& path) -> py::tuple {
    Record rec = read_tile(path);
    const std::string kind = to_string(kind_of(rec));
    py::object arr = std::visit(
        [](const auto& r) -> py::object {
          using R = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<R, Raster>) return from_raster(r);
          else if constexpr (std::is_same_v<R, TileTensor>) return from_tile(r);
          else return from_grid(r);
        },
        rec);
    return py::make_tuple(kind, arr);
  }, py::arg("path"), "Returns (kind, array).");
  m.def("write_raster", [](const std::filesystem::path& path, const CArray<float>& a) { write_tile(to_raster(a), path); },
        py::arg("path"), py::arg("array"), "Writes an f32 raster, e.g. a probability map.");
  m.def("write_tile", [](const std::filesystem::path& path, const CArray<float>& a) { write_tile(to_tile(a), path); },
        py::arg("path"), py::arg("array"));
  m.def("write_mask", [](const std::filesystem::path& path, const CArray<std::uint8_t>& a) {
    write_tile(to_grid<BinaryMask>(a), path);
  }, py::arg("path"), py::arg("array"));
  m.def("write_nolabel", [](const std::filesystem::path& path, const CArray<std::uint8_t>& a) {
    write_tile(to_grid<NoLabelMask>(a), path);
  }, py::arg("path"), py::arg("array"));
  m.def("write_instances", [](const std::filesystem::path& path, const CArray<std::uint32_t>& a) {
    write_tile(to_grid<InstanceMap>(a), path);
  }, py::arg("path"), py::arg("array"));

  // raster / instance ops ----------------------------------------------------
  m.def("threshold", [](const CArray<float>& prob, float t) { return from_grid(threshold(to_raster(prob), t)); },
        py::arg("prob"), py::arg("t") = 0.5F);
  m.def("extract_instances", [](const CArray<std::uint8_t>& mask, const std::string& conn) {
    return from_grid(extract_instances(to_grid<BinaryMask>(mask), parse_connectivity(conn)));
  }, py::arg("mask"), py::arg("connectivity") = "four");
  m.def("mask_to_instances", [](const CArray<std::uint8_t>& mask, const std::string& conn, std::size_t min_area) {
    return from_grid(mask_to_instances(to_grid<BinaryMask>(mask), parse_connectivity(conn), min_area));
  }, py::arg("mask"), py::arg("connectivity") = "four", py::arg("min_area") = 0);
  m.def("polygonize", [](const CArray<std::uint32_t>& map) {
    return to_geojson(instances_to_polygons(to_grid<InstanceMap>(map)));
  }, py::arg("instances"), "GeoJSON text of the instance outlines (pixel space).");
  m.def("rasterize", [](const std::string& geojson, int width, int height) {
    const auto polys = parse_geojson(geojson);
    return from_grid(polygons_to_instance_map(polys, width, height));
  }, py::arg("geojson"), py::arg("width"), py::arg("height"));
  m.def("border_of", [](const CArray<std::uint32_t>& map) { return from_grid(border_of(to_grid<InstanceMap>(map))); });
  m.def("interior_of", [](const CArray<std::uint32_t>& map) { return from_grid(interior_of(to_grid<InstanceMap>(map))); });

  // metrics ------------------------------------------------------------------
  m.def("pixel_confusion", [](const CArray<std::uint8_t>& pred, const CArray<std::uint8_t>& gt,
                              std::optional<CArray<std::uint8_t>> nolabel) {
    const auto p = to_grid<BinaryMask>(pred);
    const auto g = to_grid<BinaryMask>(gt);
    return counts_dict(nolabel ? pixel_confusion(p, g, to_grid<NoLabelMask>(*nolabel)) : pixel_confusion(p, g));
  }, py::arg("pred"), py::arg("gt"), py::arg("nolabel") = py::none());
  m.def("f1", [](const py::dict& c) { return f1(counts_from(c)).value; });
  m.def("accuracy", [](const py::dict& c) { return accuracy(counts_from(c)).value; });
  m.def("miou", [](const std::vector<py::dict>& per_image) {
    std::vector<ConfusionCounts> cs;
    for (const auto& d : per_image) cs.push_back(counts_from(d));
    return miou(cs);
  });
  m.def("match_instances", [](const CArray<std::uint32_t>& pred, const CArray<std::uint32_t>& gt,
                              std::optional<CArray<std::uint8_t>> nolabel, double iou_threshold) {
    const auto p = to_grid<InstanceMap>(pred);
    const auto g = to_grid<InstanceMap>(gt);
    const auto r = nolabel ? match_instances(p, g, to_grid<NoLabelMask>(*nolabel), iou_threshold)
                           : match_instances(p, g, iou_threshold);
    py::dict d;
    d["tp"] = r.tp;
    d["fp"] = r.fp;
    d["fn"] = r.fn;
    py::list matches;
    for (const auto& mt : r.matches) matches.append(py::make_tuple(mt.pred_id, mt.gt_id, mt.iou));
    d["matches"] = matches;
    const auto prec = precision_at_iou(r);
    d["precision"] = prec.value;
    d["precision_status"] = prec.status == PrecisionStatus::kDefined       ? "defined"
                            : prec.status == PrecisionStatus::kFlaggedZero ? "flagged_zero"
                                                                           : "excluded";
    return d;
  }, py::arg("pred"), py::arg("gt"), py::arg("nolabel") = py::none(), py::arg("iou_threshold") = 0.95);
  m.def("evaluate", [](const std::filesystem::path& manifest, const std::filesystem::path& predictions,
                       const std::string& split, float threshold, double iou_threshold, const std::string& heads,
                       unsigned threads) {
    EvalConfig c;
    c.threshold = threshold;
    c.iou_threshold = iou_threshold;
    c.border_head = heads != "interior";
    c.interior_head = heads != "border";
    py::gil_scoped_release release;
    return report_to_json(evaluate_manifest(read_manifest(manifest), parse_split(split), predictions, c, threads));
  }, py::arg("manifest"), py::arg("predictions"), py::arg("split") = "test", py::arg("threshold") = 0.5F,
     py::arg("iou_threshold") = 0.95, py::arg("heads") = "both", py::arg("threads") = 1,
     "Returns the report as JSON text.");

  // baseline -----------------------------------------------------------------
  m.def("canny", [](const CArray<float>& img, double low, double high, double sigma) {
    return from_grid(canny(to_raster(img), low, high, sigma));
  }, py::arg("image"), py::arg("low"), py::arg("high"), py::arg("sigma"));
  m.def("watershed", [](const CArray<float>& relief, const CArray<std::uint32_t>& seeds) {
    return from_grid(watershed(to_raster(relief), to_grid<InstanceMap>(seeds)));
  }, py::arg("relief"), py::arg("seeds"));
  m.def("delineate", [](const CArray<float>& tile, const py::dict& params) {
    const Delineation d = delineate(to_tile(tile), cw_from(params));
    return py::make_tuple(from_grid(d.border), from_grid(d.instances));
  }, py::arg("tile"), py::arg("params") = py::dict(), "Returns (border, instances).");

  // pipeline -----------------------------------------------------------------
  m.def("split_counts", [](std::size_t n, double train, double val, double test) {
    const auto c = split_counts(n, {train, val, test});
    return py::make_tuple(c.train, c.val, c.test);
  }, py::arg("n"), py::arg("train") = 0.8, py::arg("val") = 0.1, py::arg("test") = 0.1);
  m.def("split_manifest", [](const std::filesystem::path& in, const std::filesystem::path& out, std::uint64_t seed,
                             double train, double val, double test) {
    const DatasetManifest src = read_manifest(in);
    write_manifest(out, random_split(src.entries, {train, val, test}, seed));
  }, py::arg("manifest"), py::arg("out"), py::arg("seed"), py::arg("train") = 0.8, py::arg("val") = 0.1,
     py::arg("test") = 0.1);

  // synthgen -----------------------------------------------------------------
  m.def("generate_scene", [](std::uint64_t seed, int size, int n_fields, int field_min, int field_max, double noise,
                             int gap) {
    SceneSpec s;
    s.seed = seed;
    s.width = s.height = size;
    s.n_fields = n_fields;
    s.field_size_min = field_min;
    s.field_size_max = field_max;
    s.noise_std = noise;
    s.boundary_gap = gap;
    const Scene scene = generate(s);
    py::dict d;
    d["tile"] = from_tile(scene.tile());
    d["instances"] = from_grid(scene.instances);
    d["border"] = from_grid(scene.border);
    d["interior"] = from_grid(scene.interior);
    d["nolabel"] = from_grid(scene.nolabel);
    d["geojson"] = to_geojson(scene.polygons);
    return d;
  }, py::arg("seed"), py::arg("size") = 224, py::arg("n_fields") = 12, py::arg("field_min") = 16,
     py::arg("field_max") = 48, py::arg("noise") = 0.01, py::arg("gap") = 2);
  m.def("degrade", [](const CArray<std::uint32_t>& instances, double drop_fraction, int jitter, std::uint64_t seed) {
    const Degraded d = degrade(to_grid<InstanceMap>(instances), drop_fraction, jitter, seed);
    return py::make_tuple(from_grid(d.instances), d.dropped, d.kept);
  }, py::arg("instances"), py::arg("drop_fraction"), py::arg("jitter_px") = 0, py::arg("seed") = 0,
     "Returns (instances, dropped_ids, kept_ids).");
}
