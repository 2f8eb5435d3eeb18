#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "annoreg/annotations.hpp"
#include "annoreg/cli.hpp"
#include "annoreg/error.hpp"
#include "annoreg/field.hpp"
#include "annoreg/geometry.hpp"
#include "annoreg/manifest_io.hpp"
#include "annoreg/mask.hpp"
#include "annoreg/mask_io.hpp"
#include "annoreg/metrics.hpp"
#include "annoreg/split.hpp"
#include "annoreg/stats.hpp"
#include "annoreg/synth.hpp"
#include "annoreg/tissue.hpp"

namespace py = pybind11;
using namespace annoreg;

namespace {

ClassLabel class_arg(const std::string& name) {
  const auto c = class_from_name(name);
  if (!c) throw ValidationError("unknown class \"" + name + "\"");
  return *c;
}

py::dict wilcoxon_dict(const WilcoxonResult& r) {
  py::dict d;
  d["p_value"] = r.p_value;
  d["method"] = r.method == WilcoxonMethod::Exact ? "exact" : "normal";
  d["n_nonzero"] = r.n_nonzero;
  d["w_plus"] = r.w_plus;
  d["ties"] = r.ties;
  return d;
}

WilcoxonMethod method_arg(const std::string& m) {
  if (m == "auto") return WilcoxonMethod::Auto;
  if (m == "exact") return WilcoxonMethod::Exact;
  if (m == "normal") return WilcoxonMethod::Normal;
  throw ValidationError("method must be auto, exact or normal");
}

// Runs a command and raises with its diagnostics on a nonzero exit.
template <typename Fn>
int run_command(Fn&& fn, bool check) {
  std::ostringstream err;
  const int code = fn(err);
  if (check && code != cli::kExitOk) {
    throw py::value_error("exit code " + std::to_string(code) + ": " + err.str());
  }
  return code;
}

// Same, with the GIL released while the command runs.
template <typename Fn>
int run_released(Fn&& fn, bool check) {
  std::ostringstream err;
  int code = 0;
  {
    py::gil_scoped_release release;
    code = fn(err);
  }
  if (check && code != cli::kExitOk) {
    throw py::value_error("exit code " + std::to_string(code) + ": " + err.str());
  }
  return code;
}

cli::Common common_arg(std::optional<std::filesystem::path> config, std::vector<std::string> set,
                       unsigned jobs) {
  cli::Common c;
  c.config = std::move(config);
  c.set = std::move(set);
  c.jobs = jobs;
  return c;
}

}  // namespace

PYBIND11_MODULE(_annoreg, m) {
  m.doc() = "Annotation transfer, tiling and evaluation for registered slide pairs";
  m.attr("__version__") = ANNOREG_VERSION;

  auto base = py::register_exception<Error>(m, "AnnoregError", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  py::register_exception<UndefinedError>(m, "UndefinedError", base.ptr());

  // Annotations and warping work on canonical GeoJSON text.
  m.def("canonical_annotations", [](const std::string& geojson, const std::string& slide_id) {
    return serialize_annotations(parse_annotations(geojson, slide_id));
  }, py::arg("geojson"), py::arg("slide_id") = "");
  m.def("polygon_area", [](const std::vector<std::pair<double, double>>& ring) {
    Polygon p;
    for (auto [x, y] : ring) p.outer.push_back({x, y});
    return polygon_area(p);
  });
  m.def("point_in_polygon", [](double x, double y, const std::vector<std::pair<double, double>>& ring) {
    Polygon p;
    for (auto [px, py_] : ring) p.outer.push_back({px, py_});
    return point_in_polygon({x, y}, p);
  });

  py::class_<DeformationField>(m, "DeformationField")
      .def_static("zeros", &DeformationField::zeros)
      .def_static("constant", &DeformationField::constant)
      .def_static("from_bytes", [](py::bytes b) { return load_field(std::string(b)); })
      .def_static("load", &load_field_file)
      .def("to_bytes", [](const DeformationField& f) { return py::bytes(save_field(f)); })
      .def("save", [](const DeformationField& f, const std::filesystem::path& p) { save_field_file(f, p); })
      .def_readonly("grid_w", &DeformationField::grid_w)
      .def_readonly("grid_h", &DeformationField::grid_h)
      .def_readonly("spacing_um", &DeformationField::spacing_um)
      .def("displace", [](const DeformationField& f, double x, double y) {
        const auto p = displace_point(f, {x, y});
        return std::make_pair(p.x, p.y);
      })
      .def("__eq__", [](const DeformationField& a, const DeformationField& b) { return a == b; });

  m.def("warp_annotations", [](const std::string& geojson, const DeformationField& f,
                               const std::string& target_slide) {
    return serialize_annotations(warp_annotation_set(f, parse_annotations(geojson), target_slide));
  }, py::arg("geojson"), py::arg("field"), py::arg("target_slide"));

  py::class_<BinaryMask>(m, "BinaryMask")
      .def(py::init<int, int, double>())
      .def_property_readonly("width", &BinaryMask::width)
      .def_property_readonly("height", &BinaryMask::height)
      .def_property_readonly("resolution_um", &BinaryMask::resolution_um)
      .def("__getitem__", [](const BinaryMask& b, std::pair<int, int> xy) {
        if (xy.first < 0 || xy.second < 0 || xy.first >= b.width() || xy.second >= b.height()) {
          throw py::index_error("pixel out of range");
        }
        return b.at(xy.first, xy.second);
      })
      .def("__setitem__", [](BinaryMask& b, std::pair<int, int> xy, bool v) {
        if (xy.first < 0 || xy.second < 0 || xy.first >= b.width() || xy.second >= b.height()) {
          throw py::index_error("pixel out of range");
        }
        b.set(xy.first, xy.second, v);
      })
      .def("count", &BinaryMask::count)
      .def("to_bytes", [](const BinaryMask& b) {
        return py::bytes(reinterpret_cast<const char*>(b.bits().data()), b.bits().size());
      })
      .def("to_png", [](const BinaryMask& b) { return py::bytes(encode_mask_png(b)); })
      .def_static("from_png", [](py::bytes png, double res) { return decode_mask_png(std::string(png), res); })
      .def_static("load", &load_mask)
      .def("save", [](const BinaryMask& b, const std::filesystem::path& p) { save_mask(b, p); })
      .def("__eq__", [](const BinaryMask& a, const BinaryMask& b) { return a == b; });

  m.def("rasterize_class", [](const std::string& geojson, const std::string& cls, double res,
                              int width, int height) {
    return rasterize_class(parse_annotations(geojson), class_arg(cls), res, width, height);
  }, py::arg("geojson"), py::arg("class_name"), py::arg("resolution_um"), py::arg("width"),
     py::arg("height"));
  m.def("component_areas", [](const BinaryMask& b) { return connected_components(b).areas; });
  m.def("remove_small_components", &remove_small_components);
  m.def("remove_edge_components", &remove_edge_components, py::arg("mask"),
        py::arg("edge_fraction") = 0.10, py::arg("area_fraction") = 0.50);
  m.def("clean_tissue_mask", &clean_tissue_mask, py::arg("raw"), py::arg("min_area_px"),
        py::arg("edge_fraction") = 0.10, py::arg("area_fraction") = 0.50);
  m.def("exclude_control_tissue", &exclude_control_tissue);
  m.def("mask_dice", &mask_dice);
  m.def("mask_jaccard", &mask_jaccard);

  // Metrics and statistics.
  m.def("auroc", [](const std::vector<int>& labels, const std::vector<double>& scores) {
    return auroc(labels, scores);
  });
  m.def("youden_threshold", [](const std::vector<int>& labels, const std::vector<double>& scores) {
    const auto y = youden_threshold(labels, scores);
    py::dict d;
    d["threshold"] = y.threshold;
    d["j"] = y.j;
    d["sensitivity"] = y.sensitivity;
    d["specificity"] = y.specificity;
    return d;
  });
  m.def("confusion_metrics", [](std::uint64_t tp, std::uint64_t fp, std::uint64_t tn, std::uint64_t fn) {
    const auto c = confusion_metrics(ConfusionCounts{tp, fp, tn, fn});
    py::dict d;
    d["accuracy"] = c.accuracy;
    d["f1"] = c.f1;
    d["specificity"] = c.specificity;
    d["sensitivity"] = c.sensitivity;
    d["precision"] = c.precision;
    return d;
  }, py::arg("tp"), py::arg("fp"), py::arg("tn"), py::arg("fn"));
  m.def("wilcoxon_signed_rank", [](const std::vector<double>& a, const std::vector<double>& b,
                                   const std::string& method) {
    return wilcoxon_dict(wilcoxon_signed_rank(a, b, method_arg(method)));
  }, py::arg("a"), py::arg("b"), py::arg("method") = "auto");
  m.def("bh_adjust", [](const std::vector<double>& p) { return bh_adjust(p); });
  m.def("spearman", [](const std::vector<double>& x, const std::vector<double>& y) {
    return spearman(x, y);
  });
  m.def("bootstrap_mean_ci", [](const std::vector<double>& v, int n_boot, double alpha,
                                std::uint64_t seed) {
    const auto ci = bootstrap_mean_ci(v, n_boot, alpha, seed);
    return py::make_tuple(ci.mean, ci.ci_low, ci.ci_high);
  }, py::arg("values"), py::arg("n_boot") = 10000, py::arg("alpha") = 0.05, py::arg("seed") = 0);

  m.def("stratified_split", [](const std::string& cases_csv, std::uint64_t seed,
                               std::size_t test_count, int n_folds, double tune_fraction) {
    const auto cases = parse_cases(cases_csv);
    return serialize_split(stratified_split(cases, {test_count, n_folds, tune_fraction}, seed));
  }, py::arg("cases_csv"), py::arg("seed"), py::arg("test_count") = 54, py::arg("n_folds") = 5,
     py::arg("tune_fraction") = 0.15);

  m.def("synth_case", [](std::uint64_t seed, std::uint64_t index, double dice_lo, double dice_hi,
                         double max_displacement_um) {
    SynthSpec s;
    s.seed = seed;
    s.dice_lo = dice_lo;
    s.dice_hi = dice_hi;
    s.max_displacement_um = max_displacement_um;
    const SynthCase c = gen_case(s, index);
    py::dict d;
    d["case_id"] = c.record.case_id;
    d["he_annotations"] = serialize_annotations(c.he_annotations);
    d["ihc_annotations"] = serialize_annotations(c.ihc_annotations);
    d["field"] = c.field;
    d["he_tissue"] = c.he_tissue;
    d["ihc_tissue"] = c.ihc_tissue;
    d["achieved_dice"] = c.achieved_dice;
    return d;
  }, py::arg("seed") = 1, py::arg("index") = 0, py::arg("dice_lo") = 0.80,
     py::arg("dice_hi") = 0.86, py::arg("max_displacement_um") = 40.0);

  // Command wrappers; check=True raises ValueError on a nonzero exit code.
  using Path = std::filesystem::path;
  using OptPath = std::optional<Path>;
  using Sets = std::vector<std::string>;
  m.def("warp", [](Path annotations, Path field, std::string target, Path out, OptPath config,
                   Sets set, bool check) {
    cli::WarpArgs a{std::move(annotations), std::move(field), std::move(target), std::move(out)};
    return run_command([&](std::ostream& e) { return cli::cmd_warp(a, common_arg(config, set, 1), e); }, check);
  }, py::arg("annotations"), py::arg("field"), py::arg("target_slide"), py::arg("out"),
     py::arg("config") = py::none(), py::arg("set") = Sets{}, py::arg("check") = true);
  m.def("pipeline", [](Path cases, Path out, OptPath config, Sets set, unsigned jobs, bool check) {
    cli::PipelineArgs a{std::move(cases), std::move(out), false};
    return run_released([&](std::ostream& e) { return cli::cmd_pipeline(a, common_arg(config, set, jobs), e); }, check);
  }, py::arg("cases"), py::arg("out"), py::arg("config") = py::none(), py::arg("set") = Sets{},
     py::arg("jobs") = 0, py::arg("check") = true);
  m.def("evaluate", [](Path manifest, Path predictions, std::optional<double> threshold,
                       std::string ground_truth, OptPath masks, Path out, OptPath config, Sets set,
                       bool check) {
    cli::EvaluateArgs a;
    a.manifest = std::move(manifest);
    a.predictions = std::move(predictions);
    a.threshold = threshold;
    a.calibrate = !threshold.has_value();
    a.ground_truth = std::move(ground_truth);
    a.masks = std::move(masks);
    a.out = std::move(out);
    return run_command([&](std::ostream& e) { return cli::cmd_evaluate(a, common_arg(config, set, 1), e); }, check);
  }, py::arg("manifest"), py::arg("predictions"), py::arg("threshold") = py::none(),
     py::arg("ground_truth") = "label_ihc", py::arg("masks") = py::none(), py::arg("out"),
     py::arg("config") = py::none(), py::arg("set") = Sets{}, py::arg("check") = true);
  m.def("compare", [](Path a_path, Path b_path, Path out, bool check) {
    cli::CompareArgs a{std::move(a_path), std::move(b_path), std::move(out)};
    return run_command([&](std::ostream& e) { return cli::cmd_compare(a, {}, e); }, check);
  }, py::arg("a"), py::arg("b"), py::arg("out"), py::arg("check") = true);
  m.def("synth", [](Path spec, Path out, unsigned jobs, bool check) {
    cli::SynthArgs a;
    a.spec = std::move(spec);
    a.out = std::move(out);
    return run_released([&](std::ostream& e) { return cli::cmd_synth(a, common_arg({}, {}, jobs), e); }, check);
  }, py::arg("spec"), py::arg("out"), py::arg("jobs") = 0, py::arg("check") = true);
}
