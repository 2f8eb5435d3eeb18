#include "annoreg/config.hpp"

#include <cmath>

#include "annoreg/error.hpp"
#include "annoreg/io.hpp"

namespace annoreg {

const std::vector<std::string_view>& config_keys() {
  static const std::vector<std::string_view> keys = {
      "tile_size_px",        "stride_px",           "tile_resolution_um",
      "mask_resolution_um",  "tissue_resolution_um", "min_tissue_fraction",
      "min_cancer_fraction", "edge_fraction",       "edge_area_fraction",
      "sp_min_area_px",      "n_boot",              "seed",
  };
  return keys;
}

namespace {

std::uint64_t parse_unsigned(std::string_view text, std::string_view key) {
  const long long v = parse_int(text, key);
  if (v < 0) throw ValidationError("config: " + std::string(key) + " must be >= 0");
  return static_cast<std::uint64_t>(v);
}

int parse_small_int(std::string_view text, std::string_view key) {
  const long long v = parse_int(text, key);
  if (v < 0 || v > 1'000'000'000) {
    throw ValidationError("config: " + std::string(key) + " out of range");
  }
  return static_cast<int>(v);
}

}  // namespace

void set_config_value(RunConfig& c, std::string_view key, std::string_view value) {
  const std::string v = trim(value);
  try {
    if (key == "tile_size_px") c.tile_size_px = parse_small_int(v, key);
    else if (key == "stride_px") c.stride_px = parse_small_int(v, key);
    else if (key == "tile_resolution_um") c.tile_resolution_um = parse_double(v, key);
    else if (key == "mask_resolution_um") c.mask_resolution_um = parse_double(v, key);
    else if (key == "tissue_resolution_um") c.tissue_resolution_um = parse_double(v, key);
    else if (key == "min_tissue_fraction") c.min_tissue_fraction = parse_double(v, key);
    else if (key == "min_cancer_fraction") c.min_cancer_fraction = parse_double(v, key);
    else if (key == "edge_fraction") c.edge_fraction = parse_double(v, key);
    else if (key == "edge_area_fraction") c.edge_area_fraction = parse_double(v, key);
    else if (key == "sp_min_area_px") c.sp_min_area_px = parse_unsigned(v, key);
    else if (key == "n_boot") c.n_boot = parse_small_int(v, key);
    else if (key == "seed") c.seed = parse_unsigned(v, key);
    else throw ValidationError("config: unknown key '" + std::string(key) + "'");
  } catch (const ParseError& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
}

RunConfig parse_config(std::string_view text, RunConfig c) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    set_config_value(c, trim(std::string_view(stripped).substr(0, eq)),
                     std::string_view(stripped).substr(eq + 1));
    if (end == text.size()) break;
  }
  validate_config(c);
  return c;
}

std::string serialize_config(const RunConfig& c) {
  std::string out;
  auto line = [&](std::string_view k, const std::string& v) {
    out += k;
    out += " = ";
    out += v;
    out += '\n';
  };
  line("tile_size_px", std::to_string(c.tile_size_px));
  line("stride_px", std::to_string(c.stride_px));
  line("tile_resolution_um", format_shortest(c.tile_resolution_um));
  line("mask_resolution_um", format_shortest(c.mask_resolution_um));
  line("tissue_resolution_um", format_shortest(c.tissue_resolution_um));
  line("min_tissue_fraction", format_shortest(c.min_tissue_fraction));
  line("min_cancer_fraction", format_shortest(c.min_cancer_fraction));
  line("edge_fraction", format_shortest(c.edge_fraction));
  line("edge_area_fraction", format_shortest(c.edge_area_fraction));
  line("sp_min_area_px", std::to_string(c.sp_min_area_px));
  line("n_boot", std::to_string(c.n_boot));
  line("seed", std::to_string(c.seed));
  return out;
}

void validate_config(const RunConfig& c) {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (c.tile_size_px <= 0 || c.stride_px <= 0) {
    throw ValidationError("config: tile_size_px and stride_px must be positive");
  }
  if (!positive(c.tile_resolution_um) || !positive(c.mask_resolution_um) ||
      !positive(c.tissue_resolution_um)) {
    throw ValidationError("config: resolutions must be positive");
  }
  if (!unit(c.min_tissue_fraction) || !unit(c.min_cancer_fraction) || !unit(c.edge_fraction) ||
      !unit(c.edge_area_fraction)) {
    throw ValidationError("config: fractions must lie in [0, 1]");
  }
  if (c.n_boot < 1) throw ValidationError("config: n_boot must be >= 1");
}

TilingParams tiling_params(const RunConfig& c) {
  TilingParams p;
  p.tile_size_px = c.tile_size_px;
  p.stride_px = c.stride_px;
  p.tile_resolution_um = c.tile_resolution_um;
  p.min_tissue_fraction = c.min_tissue_fraction;
  p.min_cancer_fraction = c.min_cancer_fraction;
  return p;
}

PredictionMaskParams prediction_mask_params(const RunConfig& c) {
  PredictionMaskParams p;
  p.tile_size_px = c.tile_size_px;
  p.tile_resolution_um = c.tile_resolution_um;
  p.mask_resolution_um = c.mask_resolution_um;
  p.min_area_px = c.sp_min_area_px;
  return p;
}

nlohmann::ordered_json config_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["tile_size_px"] = c.tile_size_px;
  j["stride_px"] = c.stride_px;
  j["tile_resolution_um"] = c.tile_resolution_um;
  j["mask_resolution_um"] = c.mask_resolution_um;
  j["tissue_resolution_um"] = c.tissue_resolution_um;
  j["min_tissue_fraction"] = c.min_tissue_fraction;
  j["min_cancer_fraction"] = c.min_cancer_fraction;
  j["edge_fraction"] = c.edge_fraction;
  j["edge_area_fraction"] = c.edge_area_fraction;
  j["sp_min_area_px"] = c.sp_min_area_px;
  j["n_boot"] = c.n_boot;
  j["seed"] = c.seed;
  return j;
}

}  // namespace annoreg
