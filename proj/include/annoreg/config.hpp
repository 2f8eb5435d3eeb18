#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "annoreg/metrics.hpp"
#include "annoreg/tissue.hpp"

namespace annoreg {

struct RunConfig {
  int tile_size_px = 598;
  int stride_px = 598;
  double tile_resolution_um = 0.454;
  double mask_resolution_um = 7.264;
  double tissue_resolution_um = 3.64;
  double min_tissue_fraction = 0.5;
  double min_cancer_fraction = 0.5;
  double edge_fraction = 0.10;
  double edge_area_fraction = 0.50;
  std::uint64_t sp_min_area_px = 4;
  int n_boot = 10000;
  std::uint64_t seed = 0;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Field names in canonical order.
const std::vector<std::string_view>& config_keys();

/// Sets one field from text; throws ValidationError on unknown keys or bad values.
void set_config_value(RunConfig& c, std::string_view key, std::string_view value);

/// Parses `key = value` lines; `#` starts a comment.
RunConfig parse_config(std::string_view text, RunConfig base = {});

/// Canonical `key = value` text, one line per field in config_keys() order.
std::string serialize_config(const RunConfig& c);

void validate_config(const RunConfig& c);

TilingParams tiling_params(const RunConfig& c);
PredictionMaskParams prediction_mask_params(const RunConfig& c);

nlohmann::ordered_json config_json(const RunConfig& c);

}  // namespace annoreg
