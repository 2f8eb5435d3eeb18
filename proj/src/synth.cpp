#include "annoreg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "annoreg/error.hpp"
#include "annoreg/io.hpp"
#include "annoreg/rng.hpp"

namespace annoreg {

namespace {

// Sub-stream ids under derive_seed(spec.seed, case_index).
enum Stream : std::uint64_t {
  kLayout = 0,
  kField = 1,
  kPerturb = 2,
  kDropout = 3,
  kArtefacts = 4,
  kMeta = 5,
  kBlobShapes = 100,
};

struct Harmonics {
  double a[3];
  double b[3];
  double norm;  // sum of |coefficients|, bounds |h|

  double operator()(double theta) const {
    double h = 0.0;
    for (int m = 0; m < 3; ++m) {
      h += a[m] * std::cos((m + 2) * theta) + b[m] * std::sin((m + 2) * theta);
    }
    return norm > 0.0 ? h / norm : 0.0;
  }
};

Harmonics draw_harmonics(Rng& rng) {
  Harmonics h{};
  for (int m = 0; m < 3; ++m) {
    h.a[m] = rng.uniform(-1.0, 1.0);
    h.b[m] = rng.uniform(-1.0, 1.0);
    h.norm += std::abs(h.a[m]) + std::abs(h.b[m]);
  }
  return h;
}

}  // namespace

void validate_synth_spec(const SynthSpec& spec) {
  if (!(spec.slide_extent.width > 0.0 && spec.slide_extent.height > 0.0)) {
    throw ValidationError("synth: slide extent must be positive");
  }
  if (spec.n_regions < 0) throw ValidationError("synth: n_regions must be >= 0");
  if (!(spec.dice_lo >= 0.0 && spec.dice_hi <= 1.0 && spec.dice_lo <= spec.dice_hi)) {
    throw ValidationError("synth: dice band must satisfy 0 <= lo <= hi <= 1");
  }
  if (!(spec.max_displacement_um >= 0.0) || !std::isfinite(spec.max_displacement_um)) {
    throw ValidationError("synth: max_displacement_um must be finite and >= 0");
  }
  if (!(spec.score_noise_sigma >= 0.0) || !std::isfinite(spec.score_noise_sigma)) {
    throw ValidationError("synth: score_noise_sigma must be finite and >= 0");
  }
  if (!(spec.field_spacing_um > 0.0 && spec.tissue_resolution_um > 0.0 &&
        spec.mask_resolution_um > 0.0)) {
    throw ValidationError("synth: spacings and resolutions must be positive");
  }
  if (!(spec.dropout_prob >= 0.0 && spec.dropout_prob <= 1.0)) {
    throw ValidationError("synth: dropout_prob must lie in [0, 1]");
  }
  if (spec.control_patches < 0 || spec.salt_pixels < 0) {
    throw ValidationError("synth: counts must be >= 0");
  }
}

Ring star_blob(PointUm center, double radius, double amplitude, int vertices,
               std::uint64_t seed, std::uint64_t stream) {
  Rng rng(seed, stream);
  const Harmonics h = draw_harmonics(rng);
  const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  Ring ring;
  ring.reserve(static_cast<std::size_t>(vertices));
  for (int k = 0; k < vertices; ++k) {
    const double theta = 2.0 * std::numbers::pi * k / vertices;
    const double r = radius * (1.0 + amplitude * h(theta + phase));
    ring.push_back({center.x + r * std::cos(theta), center.y + r * std::sin(theta)});
  }
  return ring;
}

DeformationField gen_smooth_field(std::uint64_t seed, std::uint32_t grid_w, std::uint32_t grid_h,
                                  double spacing_um, double max_displacement_um) {
  if (grid_w < 2 || grid_h < 2 || !(spacing_um > 0.0) || !(max_displacement_um >= 0.0)) {
    throw ValidationError("gen_smooth_field: parameters must be positive");
  }
  DeformationField f = DeformationField::zeros(grid_w, grid_h, spacing_um);
  if (max_displacement_um == 0.0) return f;

  // Amplitudes sum to slightly less than the bound so float rounding of the
  // stored planes cannot push a node past it.
  const double bound_px = max_displacement_um / spacing_um * (1.0 - 1e-6);
  const double extent = std::max(grid_w, grid_h);
  Rng rng(seed);
  struct Bump {
    double cx, cy, sigma, ax, ay;
  };
  Bump bumps[kFieldBumps];
  double weights[kFieldBumps];
  double weight_sum = 0.0;
  for (int k = 0; k < kFieldBumps; ++k) {
    weights[k] = rng.uniform(0.5, 1.0);
    weight_sum += weights[k];
  }
  for (int k = 0; k < kFieldBumps; ++k) {
    const double amplitude = bound_px * weights[k] / weight_sum;
    const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
    bumps[k] = {rng.uniform(0.0, grid_w - 1.0), rng.uniform(0.0, grid_h - 1.0),
                extent * rng.uniform(kFieldMinSigmaFraction, 2.0 * kFieldMinSigmaFraction),
                amplitude * std::cos(angle), amplitude * std::sin(angle)};
  }
  for (std::uint32_t j = 0; j < grid_h; ++j) {
    for (std::uint32_t i = 0; i < grid_w; ++i) {
      double dx = 0.0, dy = 0.0;
      for (const auto& b : bumps) {
        const double r2 = (i - b.cx) * (i - b.cx) + (j - b.cy) * (j - b.cy);
        const double g = std::exp(-r2 / (2.0 * b.sigma * b.sigma));
        dx += b.ax * g;
        dy += b.ay * g;
      }
      f.dx[f.index(i, j)] = static_cast<float>(dx);
      f.dy[f.index(i, j)] = static_cast<float>(dy);
    }
  }
  return f;
}

namespace {

// Radial reshaping plus translation of one region, scaled by `strength`.
Polygon perturb_region(const Polygon& p, double strength, const Harmonics& h, double shift_angle) {
  PointUm c{0.0, 0.0};
  for (const auto& v : p.outer) {
    c.x += v.x;
    c.y += v.y;
  }
  c.x /= static_cast<double>(p.outer.size());
  c.y /= static_cast<double>(p.outer.size());
  double mean_r = 0.0;
  for (const auto& v : p.outer) mean_r += std::hypot(v.x - c.x, v.y - c.y);
  mean_r /= static_cast<double>(p.outer.size());

  const double shift = 0.5 * strength * mean_r;
  const PointUm t{shift * std::cos(shift_angle), shift * std::sin(shift_angle)};
  auto move = [&](const Ring& ring) {
    Ring out;
    out.reserve(ring.size());
    for (const auto& v : ring) {
      const double theta = std::atan2(v.y - c.y, v.x - c.x);
      const double scale = 1.0 + 0.6 * strength * h(theta);
      out.push_back({c.x + (v.x - c.x) * scale + t.x, c.y + (v.y - c.y) * scale + t.y});
    }
    return out;
  };
  Polygon out;
  out.outer = move(p.outer);
  for (const auto& hole : p.holes) out.holes.push_back(move(hole));
  return out;
}

void sprinkle(BinaryMask& m, int count, Rng& rng) {
  auto isolated = [&](int x, int y, bool value) {
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int nx = x + dx, ny = y + dy;
        if (nx < 0 || ny < 0 || nx >= m.width() || ny >= m.height()) continue;
        if (m.at(nx, ny) != value) return false;
      }
    }
    return true;
  };
  for (int k = 0; k < count; ++k) {
    const int x = static_cast<int>(rng.below(static_cast<std::uint64_t>(m.width())));
    const int y = static_cast<int>(rng.below(static_cast<std::uint64_t>(m.height())));
    // Alternate salt (isolated foreground) and pepper (isolated hole).
    const bool salt = (k % 2) == 0;
    if (isolated(x, y, !salt)) m.set(x, y, salt);
  }
}

}  // namespace

SynthCase gen_case(const SynthSpec& spec, std::uint64_t case_index) {
  validate_synth_spec(spec);
  const std::uint64_t base = derive_seed(spec.seed, case_index);
  const double w = spec.slide_extent.width;
  const double h = spec.slide_extent.height;
  const double short_side = std::min(w, h);

  SynthCase out;
  out.record.case_id = "case" + std::to_string(case_index);
  out.record.he_slide_id = out.record.case_id + "-HE";
  out.record.ihc_slide_id = out.record.case_id + "-KI67";
  {
    Rng meta(base, kMeta);
    const bool missing = meta.bernoulli(0.08);
    const double score = std::round(meta.uniform(1.0, 80.0) * 10.0) / 10.0;
    if (!missing) out.record.ki67_score = score;
  }

  // Layout in the H&E frame.
  Rng layout(base, kLayout);
  const PointUm tissue_center{0.42 * w, 0.5 * h};
  const double tissue_radius = 0.3 * short_side;
  out.he_annotations.slide_id = out.record.he_slide_id;
  for (int k = 0; k < spec.n_regions; ++k) {
    const double rho = 0.45 * tissue_radius * std::sqrt(layout.uniform());
    const double phi = layout.uniform(0.0, 2.0 * std::numbers::pi);
    const double radius = layout.uniform(0.06, 0.10) * short_side;
    const PointUm c{tissue_center.x + rho * std::cos(phi), tissue_center.y + rho * std::sin(phi)};
    Polygon p;
    p.outer = star_blob(c, radius, 0.25, 48, base, kBlobShapes + static_cast<std::uint64_t>(k));
    out.he_annotations.regions.push_back({ClassLabel::InvasiveCancer, std::move(p)});
  }
  Polygon tissue;
  tissue.outer = star_blob(tissue_center, tissue_radius, 0.1, 96, base, kBlobShapes - 1);

  // Field and registered annotations.
  const auto grid_w = static_cast<std::uint32_t>(std::ceil(w / spec.field_spacing_um)) + 1;
  const auto grid_h = static_cast<std::uint32_t>(std::ceil(h / spec.field_spacing_um)) + 1;
  out.field = gen_smooth_field(derive_seed(base, kField), grid_w, grid_h, spec.field_spacing_um,
                               spec.max_displacement_um);
  const AnnotationSet registered =
      warp_annotation_set(out.field, out.he_annotations, out.record.ihc_slide_id);

  // IHC annotations: dropout, then a Dice-band search over perturbation strength.
  std::vector<bool> dropped(registered.regions.size(), false);
  if (spec.dropout_prob > 0.0) {
    Rng drop(base, kDropout);
    for (std::size_t k = 0; k < dropped.size(); ++k) {
      dropped[k] = drop.bernoulli(spec.dropout_prob);
      out.dropped_regions += dropped[k] ? 1 : 0;
    }
  }
  std::vector<Harmonics> harmonics;
  std::vector<double> shift_angles;
  {
    Rng perturb(base, kPerturb);
    for (std::size_t k = 0; k < registered.regions.size(); ++k) {
      harmonics.push_back(draw_harmonics(perturb));
      shift_angles.push_back(perturb.uniform(0.0, 2.0 * std::numbers::pi));
    }
  }
  auto make_ihc = [&](double strength) {
    AnnotationSet a;
    a.slide_id = registered.slide_id;
    for (std::size_t k = 0; k < registered.regions.size(); ++k) {
      if (dropped[k]) continue;
      const auto& region = registered.regions[k];
      a.regions.push_back(
          {region.label, strength == 0.0 ? region.polygon
                                         : perturb_region(region.polygon, strength, harmonics[k],
                                                          shift_angles[k])});
    }
    return a;
  };
  const int mw = mask_pixels_for_extent(w, spec.mask_resolution_um);
  const int mh = mask_pixels_for_extent(h, spec.mask_resolution_um);
  const BinaryMask registered_mask =
      rasterize_class(registered, ClassLabel::InvasiveCancer, spec.mask_resolution_um, mw, mh);
  auto dice_at = [&](const AnnotationSet& a) {
    ++out.search_iterations;
    return mask_dice(registered_mask, rasterize_class(a, ClassLabel::InvasiveCancer,
                                                       spec.mask_resolution_um, mw, mh));
  };
  auto in_band = [&](double d) { return d >= spec.dice_lo && d <= spec.dice_hi; };

  constexpr double kMaxStrength = 1.5;
  double best_gap = 2.0;
  double closest = 0.0;
  auto track = [&](double d) {
    const double gap = d > spec.dice_hi ? d - spec.dice_hi : spec.dice_lo - d;
    if (gap < best_gap) {
      best_gap = gap;
      closest = d;
    }
  };
  auto fail = [&](const std::string& why) {
    std::ostringstream msg;
    msg << "synth case " << case_index << ": annotation Dice band [" << spec.dice_lo << ", "
        << spec.dice_hi << "] unreachable (" << why << "; closest achieved Dice " << closest
        << " after " << out.search_iterations << " evaluations)";
    throw ValidationError(msg.str());
  };

  double strength = 0.0;
  AnnotationSet ihc = make_ihc(0.0);
  double dice = dice_at(ihc);
  track(dice);
  if (!in_band(dice)) {
    if (dice < spec.dice_lo) fail("Dice without perturbation is already below the band");
    // Grow the strength geometrically until Dice drops to or below the band.
    double lo = 0.0;
    double hi = 0.02;
    while (true) {
      ihc = make_ihc(hi);
      dice = dice_at(ihc);
      track(dice);
      strength = hi;
      if (dice <= spec.dice_hi || hi >= kMaxStrength) break;
      lo = hi;
      hi = std::min(kMaxStrength, hi * 2.0);
    }
    if (dice > spec.dice_hi) fail("maximum perturbation keeps Dice above the band");
    // Bisect between a strength above the band and one below it.
    while (!in_band(dice)) {
      if (out.search_iterations >= kDiceSearchMaxIterations) fail("iteration cap reached");
      strength = 0.5 * (lo + hi);
      ihc = make_ihc(strength);
      dice = dice_at(ihc);
      track(dice);
      (dice > spec.dice_hi ? lo : hi) = strength;
    }
  }
  out.ihc_annotations = std::move(ihc);
  out.achieved_dice = dice;
  out.perturbation = strength;

  // Tissue masks at tissue resolution.
  const double tres = spec.tissue_resolution_um;
  const int tw = mask_pixels_for_extent(w, tres);
  const int th = mask_pixels_for_extent(h, tres);
  AnnotationSet he_tissue{out.record.he_slide_id, {{ClassLabel::Tissue, tissue}}};
  AnnotationSet ihc_tissue =
      warp_annotation_set(out.field, he_tissue, out.record.ihc_slide_id);
  Rng artefacts(base, kArtefacts);
  for (int k = 0; k < spec.control_patches; ++k) {
    const PointUm c{0.85 * w, h * (k + 1) / (spec.control_patches + 1.0)};
    Polygon patch;
    patch.outer = star_blob(c, 0.035 * short_side, 0.1, 32, base,
                            kBlobShapes + 1000 + static_cast<std::uint64_t>(k));
    ihc_tissue.regions.push_back({ClassLabel::Tissue, std::move(patch)});
  }
  out.he_tissue = rasterize_class(he_tissue, ClassLabel::Tissue, tres, tw, th);
  out.ihc_tissue = rasterize_class(ihc_tissue, ClassLabel::Tissue, tres, tw, th);
  sprinkle(out.he_tissue, spec.salt_pixels, artefacts);
  sprinkle(out.ihc_tissue, spec.salt_pixels, artefacts);
  return out;
}

GeneratedPredictions gen_predictions(const TileManifest& manifest, LabelColumn label_column,
                                     double auroc_target, std::uint64_t seed, int n_models) {
  if (manifest.records.empty()) throw ValidationError("gen_predictions: empty manifest");
  if (n_models < 1) throw ValidationError("gen_predictions: n_models must be >= 1");
  if (!(auroc_target >= 0.5 && auroc_target <= 1.0)) {
    throw ValidationError("gen_predictions: auroc_target must lie in [0.5, 1]");
  }
  std::vector<int> labels;
  for (const auto& r : manifest.records) {
    const auto& l = label_column == LabelColumn::Ihc ? r.label_ihc : r.label_registered;
    if (!l) {
      throw ValidationError("gen_predictions: manifest lacks " +
                            std::string(label_column_name(label_column)));
    }
    labels.push_back(*l);
  }
  const std::size_t n = labels.size();
  const auto models = static_cast<std::size_t>(n_models);

  GeneratedPredictions out;
  out.table.rows.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = manifest.records[i];
    out.table.rows[i] = {r.slide_id, r.tile_x, r.tile_y, std::vector<double>(models)};
  }

  // Fixed noise draws per model stream, shared by every sigma tried.
  std::vector<std::vector<double>> noise(models, std::vector<double>(n));
  for (std::size_t m = 0; m < models; ++m) {
    Rng rng(seed, m);
    for (auto& z : noise[m]) z = rng.normal();
  }

  if (auroc_target == 0.5) {
    for (std::size_t m = 0; m < models; ++m) {
      Rng rng(seed, models + m);
      for (std::size_t i = 0; i < n; ++i) out.table.rows[i].scores[m] = rng.uniform();
    }
    out.sigma = std::numeric_limits<double>::infinity();
    std::vector<double> mean(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (double s : out.table.rows[i].scores) mean[i] += s / static_cast<double>(models);
    }
    out.pooled_auroc = auroc(labels, mean).value_or(0.5);
    return out;
  }

  std::vector<double> mean(n);
  auto fill = [&](double sigma) {
    for (std::size_t i = 0; i < n; ++i) {
      double sum = 0.0;
      for (std::size_t m = 0; m < models; ++m) {
        const double s = std::clamp(labels[i] + sigma * noise[m][i], 0.0, 1.0);
        out.table.rows[i].scores[m] = s;
        sum += s;
      }
      mean[i] = sum / static_cast<double>(models);
    }
    const auto a = auroc(labels, mean);
    if (!a) throw ValidationError("gen_predictions: manifest labels contain a single class");
    return *a;
  };

  double lo = 0.0, hi = 0.5;
  double achieved = fill(hi);
  while (achieved > auroc_target && hi < 64.0) {
    lo = hi;
    hi *= 2.0;
    achieved = fill(hi);
  }
  double sigma = hi;
  if (auroc_target == 1.0) {
    sigma = 0.0;
    achieved = fill(0.0);
  } else {
    for (int it = 0; it < 60 && std::abs(achieved - auroc_target) > 1e-3; ++it) {
      sigma = 0.5 * (lo + hi);
      achieved = fill(sigma);
      (achieved > auroc_target ? lo : hi) = sigma;
    }
  }
  if (std::abs(achieved - auroc_target) > 0.01) {
    throw ValidationError("gen_predictions: AUROC target " + format_shortest(auroc_target) +
                          " unreachable; achieved " + format_shortest(achieved));
  }
  out.sigma = sigma;
  out.pooled_auroc = achieved;
  return out;
}

PredictionTable recalibrate_scores(const PredictionTable& t, double gamma) {
  if (!(gamma > 0.0)) throw ValidationError("recalibrate_scores: gamma must be positive");
  PredictionTable out = t;
  for (auto& row : out.rows) {
    for (auto& s : row.scores) s = std::pow(s, gamma);
  }
  return out;
}

}  // namespace annoreg
