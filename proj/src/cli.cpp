#include "annoreg/cli.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <set>

#include <json.hpp>

#include "annoreg/annotations.hpp"
#include "annoreg/error.hpp"
#include "annoreg/field.hpp"
#include "annoreg/io.hpp"
#include "annoreg/manifest_io.hpp"
#include "annoreg/mask_io.hpp"
#include "annoreg/metrics_io.hpp"
#include "annoreg/parallel.hpp"
#include "annoreg/rng.hpp"
#include "annoreg/split.hpp"

#ifndef ANNOREG_VERSION
#define ANNOREG_VERSION "0.0.0"
#endif

namespace annoreg::cli {

using json = nlohmann::ordered_json;

namespace {

template <typename Fn>
int guarded(std::ostream& err, std::string_view command, Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    err << "annoreg " << command << ": error: " << e.what() << '\n';
    return kExitInput;
  }
}

std::string digest_of(const fs::path& p) {
  try {
    return sha256_hex(read_file(p));
  } catch (const Error&) {
    return "unreadable";
  }
}

using Inputs = std::vector<std::pair<std::string, fs::path>>;

json sidecar(std::string_view command, const RunConfig& cfg, const Inputs& inputs) {
  json j;
  j["tool"] = "annoreg";
  j["version"] = ANNOREG_VERSION;
  j["command"] = command;
  j["config"] = config_json(cfg);
  j["seed"] = cfg.seed;
  json in = json::object();
  for (const auto& [role, path] : inputs) {
    in[role] = {{"file", path.filename().string()}, {"sha256", digest_of(path)}};
  }
  j["inputs"] = std::move(in);
  return j;
}

void write_json(const fs::path& p, const json& j) { write_file(p, j.dump(2) + "\n"); }

fs::path file_sidecar(const fs::path& out) {
  fs::path p = out;
  p += ".run.json";
  return p;
}

unsigned resolve_jobs(unsigned jobs) {
  return jobs == 0 ? std::max(1u, std::thread::hardware_concurrency()) : jobs;
}

}  // namespace

RunConfig effective_config(const Common& c) {
  RunConfig cfg;
  if (c.config) cfg = parse_config(read_file(*c.config));
  for (const auto& kv : c.set) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("--set expects key=value, got '" + kv + "'");
    }
    set_config_value(cfg, trim(std::string_view(kv).substr(0, eq)),
                     std::string_view(kv).substr(eq + 1));
  }
  validate_config(cfg);
  return cfg;
}

// ---------------------------------------------------------------- warp

int cmd_warp(const WarpArgs& args, const Common& common, std::ostream& err) {
  return guarded(err, "warp", [&] {
    const RunConfig cfg = effective_config(common);
    const AnnotationSet source = load_annotations(args.annotations);
    const DeformationField field = load_field_file(args.field);
    const std::string target = args.target_slide.empty() ? source.slide_id : args.target_slide;
    save_annotations(warp_annotation_set(field, source, target), args.out);
    write_json(file_sidecar(args.out),
               sidecar("warp", cfg, {{"annotations", args.annotations}, {"field", args.field}}));
    return kExitOk;
  });
}

// ---------------------------------------------------------------- pipeline

namespace {

struct CaseInput {
  CaseRecord record;
  fs::path he_annotations;
  std::optional<fs::path> ihc_annotations;
  fs::path field;
  fs::path he_tissue_mask;
  fs::path ihc_tissue_mask;
};

std::vector<CaseInput> parse_case_manifest(const fs::path& path) {
  const CsvTable t = parse_csv(read_file(path), "case manifest");
  const fs::path root = path.parent_path();
  const auto c_id = t.column("case_id");
  const auto c_he = t.column("he_slide_id");
  const auto c_ihc = t.column("ihc_slide_id");
  const auto c_hea = t.column("he_annotations");
  const auto c_ihca = t.column("ihc_annotations");
  const auto c_field = t.column("field");
  const auto c_het = t.column("he_tissue_mask");
  const auto c_ihct = t.column("ihc_tissue_mask");
  const auto c_score = t.column("ki67_score");
  auto resolve = [&](const std::string& cell) {
    const fs::path p(cell);
    return p.is_absolute() ? p : root / p;
  };
  std::vector<CaseInput> out;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    CaseInput c;
    c.record.case_id = trim(row[c_id]);
    c.record.he_slide_id = trim(row[c_he]);
    c.record.ihc_slide_id = trim(row[c_ihc]);
    const std::string score = trim(row[c_score]);
    if (!score.empty() && score != "NA") c.record.ki67_score = parse_double(score, "ki67_score");
    try {
      validate_case(c.record);
    } catch (const ValidationError& e) {
      throw ValidationError("case manifest line " + std::to_string(t.line_numbers[i]) + ": " +
                            e.what());
    }
    if (!seen.insert(c.record.case_id).second) {
      throw ValidationError("case manifest: duplicate case_id " + c.record.case_id);
    }
    c.he_annotations = resolve(trim(row[c_hea]));
    const std::string ihc = trim(row[c_ihca]);
    if (!ihc.empty()) c.ihc_annotations = resolve(ihc);
    c.field = resolve(trim(row[c_field]));
    c.he_tissue_mask = resolve(trim(row[c_het]));
    c.ihc_tissue_mask = resolve(trim(row[c_ihct]));
    out.push_back(std::move(c));
  }
  return out;
}

struct CaseResult {
  bool ok = false;
  TileManifest manifest;
  json summary;
  std::string error;
};

fs::path mask_path(const fs::path& out, const std::string& slide, LabelColumn c) {
  return out / "masks" / (slide + "." + std::string(label_column_name(c)) + ".png");
}

CaseResult run_case(const CaseInput& in, const RunConfig& cfg, const fs::path& out) {
  const fs::path dir = out / "cases" / in.record.case_id;
  AnnotationSet he = load_annotations(in.he_annotations);
  std::optional<AnnotationSet> ihc;
  if (in.ihc_annotations) {
    ihc = load_annotations(*in.ihc_annotations);
    ihc->slide_id = in.record.ihc_slide_id;
  }
  const DeformationField field = load_field_file(in.field);
  const BinaryMask he_raw = load_mask(in.he_tissue_mask);
  const BinaryMask ihc_raw = load_mask(in.ihc_tissue_mask);
  for (const BinaryMask* m : {&he_raw, &ihc_raw}) {
    if (std::abs(m->resolution_um() - cfg.tissue_resolution_um) > 1e-9) {
      throw ValidationError("tissue mask resolution " + format_shortest(m->resolution_um()) +
                            " um/px differs from tissue_resolution_um " +
                            format_shortest(cfg.tissue_resolution_um));
    }
  }

  const BinaryMask he_clean =
      clean_tissue_mask(he_raw, cfg.sp_min_area_px, cfg.edge_fraction, cfg.edge_area_fraction);
  const BinaryMask ihc_clean =
      clean_tissue_mask(ihc_raw, cfg.sp_min_area_px, cfg.edge_fraction, cfg.edge_area_fraction);
  const BinaryMask tissue = exclude_control_tissue(he_clean, ihc_clean);

  const AnnotationSet registered = warp_annotation_set(field, he, in.record.ihc_slide_id);
  const ExtentUm extent{ihc_raw.width() * ihc_raw.resolution_um(),
                        ihc_raw.height() * ihc_raw.resolution_um()};
  TileManifest manifest = build_manifest(in.record, ihc ? &*ihc : nullptr, &registered, tissue,
                                         extent, tiling_params(cfg));

  const int mw = mask_pixels_for_extent(extent.width, cfg.mask_resolution_um);
  const int mh = mask_pixels_for_extent(extent.height, cfg.mask_resolution_um);
  const ClassLabel cancer = ClassLabel::InvasiveCancer;
  const BinaryMask registered_mask =
      rasterize_class(registered, cancer, cfg.mask_resolution_um, mw, mh);

  json summary;
  summary["case_id"] = in.record.case_id;
  summary["ihc_slide_id"] = in.record.ihc_slide_id;
  summary["n_tiles"] = manifest.records.size();
  std::size_t pos_ihc = 0, pos_reg = 0;
  for (const auto& r : manifest.records) {
    pos_ihc += r.label_ihc.value_or(0);
    pos_reg += r.label_registered.value_or(0);
  }
  summary["positive_label_ihc"] = ihc ? json(pos_ihc) : json(nullptr);
  summary["positive_label_registered"] = pos_reg;
  summary["annotation_dice"] = nullptr;
  summary["annotation_jaccard"] = nullptr;

  save_mask(registered_mask, mask_path(out, in.record.ihc_slide_id, LabelColumn::Registered));
  if (ihc) {
    const BinaryMask ihc_mask = rasterize_class(*ihc, cancer, cfg.mask_resolution_um, mw, mh);
    summary["annotation_dice"] = mask_dice(ihc_mask, registered_mask);
    summary["annotation_jaccard"] = mask_jaccard(ihc_mask, registered_mask);
    save_mask(ihc_mask, mask_path(out, in.record.ihc_slide_id, LabelColumn::Ihc));
  }
  save_manifest(manifest, dir / "manifest.csv");
  save_annotations(registered, dir / "registered.geojson");
  save_mask(tissue, dir / "tissue.png");
  write_json(dir / "summary.json", summary);

  CaseResult r;
  r.ok = true;
  r.manifest = std::move(manifest);
  r.summary = std::move(summary);
  return r;
}

std::optional<CaseResult> resume_case(const CaseInput& in, const fs::path& out) {
  const fs::path dir = out / "cases" / in.record.case_id;
  if (!fs::exists(dir / "summary.json") || !fs::exists(dir / "manifest.csv")) return std::nullopt;
  CaseResult r;
  r.ok = true;
  r.manifest = load_manifest(dir / "manifest.csv");
  r.summary = json::parse(read_file(dir / "summary.json"));
  return r;
}

std::string format_json_number(const json& v) {
  return v.is_null() ? std::string("NA") : format_shortest(v.get<double>());
}

}  // namespace

int cmd_pipeline(const PipelineArgs& args, const Common& common, std::ostream& err) {
  return guarded(err, "pipeline", [&] {
    const RunConfig cfg = effective_config(common);
    const std::vector<CaseInput> cases = parse_case_manifest(args.cases);
    std::vector<CaseResult> results(cases.size());
    parallel_for(cases.size(), resolve_jobs(common.jobs), [&](std::size_t i) {
      if (args.resume) {
        if (auto r = resume_case(cases[i], args.out)) {
          results[i] = std::move(*r);
          return;
        }
      }
      try {
        results[i] = run_case(cases[i], cfg, args.out);
      } catch (const std::exception& e) {
        results[i].ok = false;
        results[i].error = e.what();
      }
    });

    TileManifest merged;
    std::string log;
    std::string agreement = "case_id,slide_id,dice,jaccard\n";
    std::size_t failed = 0;
    for (std::size_t i = 0; i < cases.size(); ++i) {
      const auto& c = cases[i].record;
      const auto& r = results[i];
      if (!r.ok) {
        ++failed;
        log += "case " + c.case_id + ": FAILED: " + r.error + "\n";
        err << "annoreg pipeline: case " << c.case_id << " failed: " << r.error << '\n';
        continue;
      }
      if (merged.records.empty()) {
        merged.tile_size_px = r.manifest.tile_size_px;
        merged.stride_px = r.manifest.stride_px;
        merged.tile_resolution_um = r.manifest.tile_resolution_um;
      }
      merged.records.insert(merged.records.end(), r.manifest.records.begin(),
                            r.manifest.records.end());
      log += "case " + c.case_id + ": ok slide=" + c.ihc_slide_id +
             " tiles=" + std::to_string(r.manifest.records.size()) +
             " annotation_dice=" + format_json_number(r.summary["annotation_dice"]) + "\n";
      agreement += c.case_id + ',' + c.ihc_slide_id + ',' +
                   format_json_number(r.summary["annotation_dice"]) + ',' +
                   format_json_number(r.summary["annotation_jaccard"]) + '\n';
    }
    merged.tile_size_px = cfg.tile_size_px;
    merged.stride_px = cfg.stride_px;
    merged.tile_resolution_um = cfg.tile_resolution_um;
    sort_and_check_manifest(merged);
    log += "summary: " + std::to_string(cases.size() - failed) + " of " +
           std::to_string(cases.size()) + " cases succeeded, " +
           std::to_string(merged.records.size()) + " tiles\n";

    save_manifest(merged, args.out / "manifest.csv");
    write_file(args.out / "pipeline.log", log);
    write_file(args.out / "annotation_agreement.csv", agreement);
    Inputs inputs{{"cases", args.cases}};
    for (const auto& c : cases) {
      const std::string id = c.record.case_id;
      inputs.emplace_back(id + "/he_annotations", c.he_annotations);
      if (c.ihc_annotations) inputs.emplace_back(id + "/ihc_annotations", *c.ihc_annotations);
      inputs.emplace_back(id + "/field", c.field);
      inputs.emplace_back(id + "/he_tissue_mask", c.he_tissue_mask);
      inputs.emplace_back(id + "/ihc_tissue_mask", c.ihc_tissue_mask);
    }
    json side = sidecar("pipeline", cfg, inputs);
    side["failed_cases"] = failed;
    write_json(args.out / "run.json", side);
    return failed == 0 ? kExitOk : kExitPartial;
  });
}

// ---------------------------------------------------------------- evaluate

int cmd_evaluate(const EvaluateArgs& args, const Common& common, std::ostream& err) {
  return guarded(err, "evaluate", [&] {
    const RunConfig cfg = effective_config(common);
    if (args.threshold.has_value() == args.calibrate) {
      throw ValidationError("evaluate: pass exactly one of --threshold or --calibrate");
    }
    const LabelColumn column = parse_label_column(args.ground_truth);
    const TileManifest manifest = load_manifest(args.manifest);
    const std::vector<TileScore> scores =
        ensemble_average(parse_predictions(read_file(args.predictions)));
    Inputs inputs{{"manifest", args.manifest}, {"predictions", args.predictions}};

    ReportParams params;
    params.ground_truth = column;
    params.mask = prediction_mask_params(cfg);
    json threshold_info;
    if (args.threshold) {
      if (!(*args.threshold >= 0.0 && *args.threshold <= 1.0)) {
        throw ValidationError("evaluate: threshold must lie in [0, 1]");
      }
      params.threshold = *args.threshold;
      threshold_info["source"] = "fixed";
    } else {
      const fs::path cm = args.calibrate_manifest.value_or(args.manifest);
      const fs::path cp = args.calibrate_predictions.value_or(args.predictions);
      if (args.calibrate_manifest) inputs.emplace_back("calibrate_manifest", cm);
      if (args.calibrate_predictions) inputs.emplace_back("calibrate_predictions", cp);
      const auto pooled = pool_tiles(load_manifest(cm),
                                     ensemble_average(parse_predictions(read_file(cp))), column);
      const YoudenResult y = youden_threshold(pooled.labels, pooled.scores);
      params.threshold = y.threshold;
      threshold_info["source"] = "youden";
      threshold_info["j"] = y.j;
      threshold_info["sensitivity"] = y.sensitivity;
      threshold_info["specificity"] = y.specificity;
    }
    threshold_info["threshold"] = params.threshold;

    std::map<std::string, BinaryMask> truth;
    if (args.masks) {
      std::set<std::string> slides;
      for (const auto& r : manifest.records) slides.insert(r.slide_id);
      for (const auto& s : slides) {
        const fs::path p = *args.masks / (s + "." + std::string(label_column_name(column)) + ".png");
        if (fs::exists(p)) {
          truth.emplace(s, load_mask(p));
          inputs.emplace_back("mask/" + s, p);
        }
      }
    }

    std::map<std::string, SlideArtifacts> artifacts;
    const auto slides = slide_report(manifest, scores, params, args.masks ? &truth : nullptr,
                                     &artifacts);
    const auto summary = aggregate_report(slides, cfg.n_boot, 0.05, cfg.seed);

    write_file(args.out / "slide_metrics.csv", serialize_slide_metrics(slides));
    write_file(args.out / "aggregate.csv", serialize_aggregate(summary));
    write_file(args.out / "threshold.txt", "threshold = " + format_shortest(params.threshold) + "\n");

    // Overlays compare ground truth (first) with the prediction mask (second);
    // without a class mask the truth is painted from the labelled tiles.
    std::map<std::string, std::vector<TileCall>> label_calls;
    for (const auto& r : manifest.records) {
      const auto& l = column == LabelColumn::Ihc ? r.label_ihc : r.label_registered;
      label_calls[r.slide_id].push_back({r.tile_x, r.tile_y, l.value_or(0) == 1});
    }
    PredictionMaskParams paint = params.mask;
    paint.tile_size_px = manifest.tile_size_px;
    paint.tile_resolution_um = manifest.tile_resolution_um;
    for (const auto& [slide, art] : artifacts) {
      const BinaryMask& pred = art.prediction;
      BinaryMask gt;
      if (art.ground_truth) {
        gt = *art.ground_truth;
      } else {
        paint.mask_resolution_um = pred.resolution_um();
        gt = paint_tiles(label_calls[slide],
                         {pred.width() * pred.resolution_um(), pred.height() * pred.resolution_um()},
                         paint);
      }
      save_rgb(overlay_rgb(gt, pred), args.out / "overlays" / (slide + ".png"));
      save_mask(pred, args.out / "prediction_masks" / (slide + ".png"));
    }

    json side = sidecar("evaluate", cfg, inputs);
    side["ground_truth"] = label_column_name(column);
    side["threshold"] = threshold_info;
    write_json(args.out / "run.json", side);
    return kExitOk;
  });
}

// ---------------------------------------------------------------- compare

int cmd_compare(const CompareArgs& args, const Common& common, std::ostream& err) {
  return guarded(err, "compare", [&] {
    const RunConfig cfg = effective_config(common);
    const auto a = parse_slide_metrics(read_file(args.a));
    const auto b = parse_slide_metrics(read_file(args.b));
    const auto rows = compare_slide_metrics(a, b);
    write_file(args.out, serialize_comparison(rows));
    write_json(file_sidecar(args.out), sidecar("compare", cfg, {{"a", args.a}, {"b", args.b}}));
    return kExitOk;
  });
}

// ---------------------------------------------------------------- split

int cmd_split(const SplitArgs& args, const Common& common, std::ostream& err) {
  return guarded(err, "split", [&] {
    RunConfig cfg = effective_config(common);
    if (args.seed) cfg.seed = *args.seed;
    const auto cases = parse_cases(read_file(args.cases));
    const auto split = stratified_split(cases, args.params, cfg.seed);
    write_file(args.out, serialize_split(split));
    json side = sidecar("split", cfg, {{"cases", args.cases}});
    side["test_count"] = args.params.test_count;
    side["n_folds"] = args.params.n_folds;
    side["tune_fraction"] = args.params.tune_fraction;
    side["median_score"] =
        std::isnan(split.median_score) ? json(nullptr) : json(split.median_score);
    write_json(file_sidecar(args.out), side);
    return kExitOk;
  });
}

// ---------------------------------------------------------------- synth

CohortSpec parse_cohort_spec(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("synth spec: ") + e.what(), e.byte);
  }
  if (!j.is_object()) throw ValidationError("synth spec: expected a JSON object");
  CohortSpec c;
  SynthSpec& s = c.spec;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "n_cases") c.n_cases = v.get<int>();
      else if (key == "seed") s.seed = v.get<std::uint64_t>();
      else if (key == "slide_extent_um") s.slide_extent = {v.at(0).get<double>(), v.at(1).get<double>()};
      else if (key == "n_regions") s.n_regions = v.get<int>();
      else if (key == "dice_band") {
        s.dice_lo = v.at(0).get<double>();
        s.dice_hi = v.at(1).get<double>();
      }
      else if (key == "max_displacement_um") s.max_displacement_um = v.get<double>();
      else if (key == "score_noise_sigma") s.score_noise_sigma = v.get<double>();
      else if (key == "field_spacing_um") s.field_spacing_um = v.get<double>();
      else if (key == "tissue_resolution_um") s.tissue_resolution_um = v.get<double>();
      else if (key == "mask_resolution_um") s.mask_resolution_um = v.get<double>();
      else if (key == "control_patches") s.control_patches = v.get<int>();
      else if (key == "dropout_prob") s.dropout_prob = v.get<double>();
      else if (key == "salt_pixels") s.salt_pixels = v.get<int>();
      else throw ValidationError("synth spec: unknown member '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("synth spec: ") + e.what());
  }
  if (c.n_cases < 1) throw ValidationError("synth spec: n_cases must be >= 1");
  validate_synth_spec(s);
  return c;
}

std::string write_synth_case(const SynthCase& c, const SynthSpec& spec, std::uint64_t index,
                             const fs::path& root) {
  const std::string id = c.record.case_id;
  const fs::path dir = root / id;
  save_annotations(c.he_annotations, dir / "he.geojson");
  save_annotations(c.ihc_annotations, dir / "ihc.geojson");
  save_field_file(c.field, dir / "field.wdf");
  save_mask(c.he_tissue, dir / "he_tissue.png");
  save_mask(c.ihc_tissue, dir / "ihc_tissue.png");

  double max_disp = 0.0;
  for (std::size_t k = 0; k < c.field.dx.size(); ++k) {
    max_disp = std::max(max_disp, std::hypot(double{c.field.dx[k]}, double{c.field.dy[k]}));
  }
  json t;
  t["case_id"] = id;
  t["case_index"] = index;
  t["case_seed"] = derive_seed(spec.seed, index);
  t["spec"] = {{"seed", spec.seed},
               {"slide_extent_um", {spec.slide_extent.width, spec.slide_extent.height}},
               {"n_regions", spec.n_regions},
               {"dice_band", {spec.dice_lo, spec.dice_hi}},
               {"max_displacement_um", spec.max_displacement_um},
               {"score_noise_sigma", spec.score_noise_sigma},
               {"field_spacing_um", spec.field_spacing_um},
               {"tissue_resolution_um", spec.tissue_resolution_um},
               {"mask_resolution_um", spec.mask_resolution_um},
               {"control_patches", spec.control_patches},
               {"dropout_prob", spec.dropout_prob},
               {"salt_pixels", spec.salt_pixels}};
  t["he_slide_id"] = c.record.he_slide_id;
  t["ihc_slide_id"] = c.record.ihc_slide_id;
  t["ki67_score"] = c.record.ki67_score ? json(*c.record.ki67_score) : json(nullptr);
  t["achieved_dice"] = c.achieved_dice;
  t["perturbation"] = c.perturbation;
  t["search_iterations"] = c.search_iterations;
  t["dropped_regions"] = c.dropped_regions;
  t["field_grid"] = {c.field.grid_w, c.field.grid_h};
  t["field_max_displacement_um"] = max_disp * c.field.spacing_um;
  write_json(dir / "truth.json", t);

  const std::string rel = id + "/";
  return id + ',' + c.record.he_slide_id + ',' + c.record.ihc_slide_id + ',' + rel +
         "he.geojson," + rel + "ihc.geojson," + rel + "field.wdf," + rel + "he_tissue.png," +
         rel + "ihc_tissue.png," +
         (c.record.ki67_score ? format_shortest(*c.record.ki67_score) : std::string());
}

int cmd_synth(const SynthArgs& args, const Common& common, std::ostream& err) {
  return guarded(err, "synth", [&] {
    RunConfig cfg = effective_config(common);
    if (args.manifest) {
      if (args.seed) cfg.seed = *args.seed;
      const TileManifest manifest = load_manifest(*args.manifest);
      const auto column = parse_label_column(args.label_column);
      auto gen = gen_predictions(manifest, column, args.auroc, cfg.seed, args.n_models);
      PredictionTable table =
          args.gamma == 1.0 ? std::move(gen.table) : recalibrate_scores(gen.table, args.gamma);
      write_file(args.out, serialize_predictions(table));
      json side = sidecar("synth", cfg, {{"manifest", *args.manifest}});
      side["auroc_target"] = args.auroc;
      side["gamma"] = args.gamma;
      side["label_column"] = label_column_name(column);
      side["n_models"] = args.n_models;
      side["sigma"] = gen.sigma;
      side["pooled_auroc"] = gen.pooled_auroc;
      write_json(file_sidecar(args.out), side);
      return kExitOk;
    }
    if (!args.spec) throw ValidationError("synth: pass --spec or --manifest");
    CohortSpec cohort = parse_cohort_spec(read_file(*args.spec));
    if (args.seed) cohort.spec.seed = *args.seed;
    cfg.seed = cohort.spec.seed;

    const auto n = static_cast<std::size_t>(cohort.n_cases);
    std::vector<std::string> rows(n);
    std::vector<std::string> errors(n);
    parallel_for(n, resolve_jobs(common.jobs), [&](std::size_t i) {
      try {
        const SynthCase c = gen_case(cohort.spec, i);
        rows[i] = write_synth_case(c, cohort.spec, i, args.out);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    });
    for (const auto& e : errors) {
      if (!e.empty()) throw ValidationError(e);
    }
    std::string csv = std::string(kCaseManifestHeader) + "\n";
    for (const auto& r : rows) csv += r + "\n";
    write_file(args.out / "cases.csv", csv);
    json side = sidecar("synth", cfg, {{"spec", *args.spec}});
    side["n_cases"] = cohort.n_cases;
    write_json(args.out / "run.json", side);
    return kExitOk;
  });
}

// ---------------------------------------------------------------- overlay

int cmd_overlay(const OverlayArgs& args, const Common& common, std::ostream& err) {
  return guarded(err, "overlay", [&] {
    const RunConfig cfg = effective_config(common);
    const BinaryMask a = load_mask(args.a);
    const BinaryMask b = load_mask(args.b);
    save_rgb(overlay_rgb(a, b), args.out);
    write_json(file_sidecar(args.out), sidecar("overlay", cfg, {{"a", args.a}, {"b", args.b}}));
    return kExitOk;
  });
}

}  // namespace annoreg::cli
