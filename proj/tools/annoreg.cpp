#include <iostream>

#include <CLI11.hpp>

#include "annoreg/cli.hpp"

namespace {

void add_common(CLI::App* cmd, annoreg::cli::Common& c) {
  cmd->add_option("--config", c.config, "key = value run configuration file");
  cmd->add_option("--set", c.set, "override one config value (key=value), repeatable");
  cmd->add_option("--jobs", c.jobs, "worker threads (0 = all cores)");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace annoreg::cli;
  CLI::App app{"Annotation transfer, tiling and evaluation for registered slide pairs"};
  app.set_version_flag("--version", std::string(ANNOREG_VERSION));
  app.require_subcommand(1);

  Common common;
  int code = kExitOk;

  WarpArgs warp;
  auto* w = app.add_subcommand("warp", "warp annotations through a deformation field");
  w->add_option("--annotations", warp.annotations)->required();
  w->add_option("--field", warp.field)->required();
  w->add_option("--target-slide", warp.target_slide, "slide id of the output (default: input id)");
  w->add_option("--out", warp.out)->required();
  add_common(w, common);
  w->callback([&] { code = cmd_warp(warp, common, std::cerr); });

  PipelineArgs pipe;
  auto* p = app.add_subcommand("pipeline", "clean, exclude control tissue, warp, tile and label");
  p->add_option("--cases", pipe.cases, "case manifest CSV")->required();
  p->add_option("--out", pipe.out)->required();
  p->add_flag("--resume", pipe.resume, "skip cases whose outputs already exist");
  add_common(p, common);
  p->callback([&] { code = cmd_pipeline(pipe, common, std::cerr); });

  EvaluateArgs ev;
  auto* e = app.add_subcommand("evaluate", "per-slide metrics, bootstrap CIs and overlays");
  e->add_option("--manifest", ev.manifest)->required();
  e->add_option("--predictions", ev.predictions)->required();
  auto* thr = e->add_option("--threshold", ev.threshold);
  auto* cal = e->add_flag("--calibrate", ev.calibrate, "pick the Youden-optimal threshold");
  thr->excludes(cal);
  e->add_option("--calibrate-manifest", ev.calibrate_manifest)->needs(cal);
  e->add_option("--calibrate-predictions", ev.calibrate_predictions)->needs(cal);
  e->add_option("--ground-truth", ev.ground_truth, "label_ihc or label_registered")
      ->capture_default_str();
  e->add_option("--masks", ev.masks, "directory with <slide>.<column>.png class masks");
  e->add_option("--out", ev.out)->required();
  add_common(e, common);
  e->callback([&] { code = cmd_evaluate(ev, common, std::cerr); });

  CompareArgs cmp;
  auto* c = app.add_subcommand("compare", "paired Wilcoxon tests with BH adjustment");
  c->add_option("--a", cmp.a)->required();
  c->add_option("--b", cmp.b)->required();
  c->add_option("--out", cmp.out)->required();
  add_common(c, common);
  c->callback([&] { code = cmd_compare(cmp, common, std::cerr); });

  SplitArgs sp;
  auto* s = app.add_subcommand("split", "stratified patient-level split");
  s->add_option("--cases", sp.cases)->required();
  s->add_option("--seed", sp.seed);
  s->add_option("--out", sp.out)->required();
  s->add_option("--test-count", sp.params.test_count)->capture_default_str();
  s->add_option("--folds", sp.params.n_folds)->capture_default_str();
  s->add_option("--tune-fraction", sp.params.tune_fraction)->capture_default_str();
  add_common(s, common);
  s->callback([&] { code = cmd_split(sp, common, std::cerr); });

  SynthArgs sy;
  auto* y = app.add_subcommand("synth", "synthetic cohort (--spec) or predictions (--manifest)");
  auto* spec = y->add_option("--spec", sy.spec, "cohort spec JSON");
  auto* man = y->add_option("--manifest", sy.manifest, "tile manifest to score");
  spec->excludes(man);
  y->add_option("--out", sy.out)->required();
  y->add_option("--seed", sy.seed);
  y->add_option("--auroc", sy.auroc)->capture_default_str();
  y->add_option("--gamma", sy.gamma, "score -> score^gamma recalibration")->capture_default_str();
  y->add_option("--label-column", sy.label_column)->capture_default_str();
  y->add_option("--models", sy.n_models)->capture_default_str();
  add_common(y, common);
  y->callback([&] { code = cmd_synth(sy, common, std::cerr); });

  OverlayArgs ov;
  auto* o = app.add_subcommand("overlay", "agreement overlay of two masks");
  o->add_option("--a", ov.a)->required();
  o->add_option("--b", ov.b)->required();
  o->add_option("--out", ov.out)->required();
  add_common(o, common);
  o->callback([&] { code = cmd_overlay(ov, common, std::cerr); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err);
    return rc == 0 ? 0 : kExitInput;
  }
  return code;
}
