#pragma once

#include <cstdint>
#include <string>

#include "annoreg/field.hpp"
#include "annoreg/mask.hpp"
#include "annoreg/metrics.hpp"
#include "annoreg/tissue.hpp"
#include "annoreg/types.hpp"

namespace annoreg {

/// Parameters of one synthetic slide pair.
struct SynthSpec {
  std::uint64_t seed = 1;
  ExtentUm slide_extent{6000.0, 5000.0};
  int n_regions = 4;
  double dice_lo = 0.80;  // band for rasterized IHC-vs-registered annotation Dice
  double dice_hi = 0.86;
  double max_displacement_um = 40.0;
  double score_noise_sigma = 0.25;
  double field_spacing_um = 100.0;
  double tissue_resolution_um = 3.64;
  double mask_resolution_um = 7.264;  // resolution at which the Dice band is measured
  int control_patches = 2;            // extra IHC-only tissue fragments
  double dropout_prob = 0.0;          // chance of dropping each IHC cancer region
  int salt_pixels = 12;               // isolated specks added to each raw tissue mask
};

/// Throws ValidationError on a broken SynthSpec invariant.
void validate_synth_spec(const SynthSpec& spec);

struct SynthCase {
  CaseRecord record;
  AnnotationSet he_annotations;   // H&E frame
  AnnotationSet ihc_annotations;  // IHC frame
  DeformationField field;         // H&E -> IHC
  BinaryMask he_tissue;           // raw, tissue resolution
  BinaryMask ihc_tissue;
  double achieved_dice = 1.0;
  double perturbation = 0.0;      // radial/translation strength found by the search
  int search_iterations = 0;
  int dropped_regions = 0;
};

/// Iteration cap of the Dice-band search.
inline constexpr int kDiceSearchMaxIterations = 200;

/// One synthetic case. Streams derive from (spec.seed, case_index), so cases
/// of a cohort are independent of generation order. Throws ValidationError
/// when the Dice band cannot be reached.
SynthCase gen_case(const SynthSpec& spec, std::uint64_t case_index = 0);

/// Number of Gaussian bumps summed by gen_smooth_field.
inline constexpr int kFieldBumps = 3;
/// Lower bound on bump width, as a fraction of max(grid_w, grid_h) nodes.
inline constexpr double kFieldMinSigmaFraction = 0.2;

/// Sum of kFieldBumps Gaussian bumps whose amplitudes add up to at most
/// max_displacement_um / spacing_um field pixels, which bounds the sup norm.
/// Each bump's slope is at most amplitude / (sigma * sqrt(e)).
DeformationField gen_smooth_field(std::uint64_t seed, std::uint32_t grid_w, std::uint32_t grid_h,
                                  double spacing_um, double max_displacement_um);

/// Scores = clip(label + sigma * N(0,1), 0, 1) per base model, with sigma
/// bisected until the pooled AUROC of the ensemble mean is within 0.01 of
/// `auroc_target`. A target of 0.5 yields label-independent uniform scores.
/// Throws ValidationError when the target is unreachable.
struct GeneratedPredictions {
  PredictionTable table;
  double sigma = 0.0;
  double pooled_auroc = 0.0;
};

GeneratedPredictions gen_predictions(const TileManifest& manifest, LabelColumn label_column,
                                     double auroc_target, std::uint64_t seed, int n_models = 10);

/// Applies score -> score^gamma to every base-model score; gamma > 1 lowers
/// scores (fewer positives at a fixed threshold) without changing rankings.
PredictionTable recalibrate_scores(const PredictionTable& t, double gamma);

/// Star-convex blob: a circle whose radius is modulated by low harmonics.
Ring star_blob(PointUm center, double radius, double amplitude, int vertices,
               std::uint64_t seed, std::uint64_t stream);

}  // namespace annoreg
