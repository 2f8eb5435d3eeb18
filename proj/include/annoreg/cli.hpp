#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "annoreg/config.hpp"
#include "annoreg/split.hpp"
#include "annoreg/synth.hpp"

namespace annoreg::cli {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitPartial = 3;

/// Settings shared by every command: optional config file plus `key=value` overrides.
struct Common {
  std::optional<fs::path> config;
  std::vector<std::string> set;
  unsigned jobs = 0;  // 0 = hardware concurrency
};

/// Config file (when given) with overrides applied on top.
RunConfig effective_config(const Common& c);

struct WarpArgs {
  fs::path annotations;
  fs::path field;
  std::string target_slide;
  fs::path out;
};

struct PipelineArgs {
  fs::path cases;
  fs::path out;
  bool resume = false;  // reuse cases whose outputs already exist
};

struct EvaluateArgs {
  fs::path manifest;
  fs::path predictions;
  std::optional<double> threshold;
  bool calibrate = false;
  std::optional<fs::path> calibrate_manifest;
  std::optional<fs::path> calibrate_predictions;
  std::string ground_truth = "label_ihc";
  std::optional<fs::path> masks;  // directory holding <slide>.<column>.png
  fs::path out;
};

struct CompareArgs {
  fs::path a;
  fs::path b;
  fs::path out;
};

struct SplitArgs {
  fs::path cases;
  std::optional<std::uint64_t> seed;
  fs::path out;
  SplitParams params;
};

struct SynthArgs {
  std::optional<fs::path> spec;  // cohort mode
  fs::path out;
  // Prediction mode (when `manifest` is set).
  std::optional<fs::path> manifest;
  double auroc = 0.95;
  double gamma = 1.0;
  std::string label_column = "label_ihc";
  int n_models = 10;
  std::optional<std::uint64_t> seed;
};

struct OverlayArgs {
  fs::path a;
  fs::path b;
  fs::path out;
};

int cmd_warp(const WarpArgs& args, const Common& common, std::ostream& err);
int cmd_pipeline(const PipelineArgs& args, const Common& common, std::ostream& err);
int cmd_evaluate(const EvaluateArgs& args, const Common& common, std::ostream& err);
int cmd_compare(const CompareArgs& args, const Common& common, std::ostream& err);
int cmd_split(const SplitArgs& args, const Common& common, std::ostream& err);
int cmd_synth(const SynthArgs& args, const Common& common, std::ostream& err);
int cmd_overlay(const OverlayArgs& args, const Common& common, std::ostream& err);

struct CohortSpec {
  SynthSpec spec;
  int n_cases = 3;
};

/// JSON object with optional members n_cases, seed, slide_extent_um [w, h],
/// n_regions, dice_band [lo, hi], max_displacement_um, score_noise_sigma,
/// field_spacing_um, tissue_resolution_um, mask_resolution_um,
/// control_patches, dropout_prob, salt_pixels. Unknown members are rejected.
CohortSpec parse_cohort_spec(std::string_view json);

/// Writes one generated case under `dir` (annotations, field, raw tissue
/// masks, truth.json) and returns its case-manifest CSV row with paths
/// relative to the cohort root.
std::string write_synth_case(const SynthCase& c, const SynthSpec& spec, std::uint64_t index,
                             const fs::path& root);

/// Header of the pipeline case manifest.
inline constexpr std::string_view kCaseManifestHeader =
    "case_id,he_slide_id,ihc_slide_id,he_annotations,ihc_annotations,field,he_tissue_mask,"
    "ihc_tissue_mask,ki67_score";

}  // namespace annoreg::cli
