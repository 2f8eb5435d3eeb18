#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "annoreg/tissue.hpp"

namespace annoreg {

inline constexpr std::string_view kManifestHeader =
    "slide_id,tile_x,tile_y,tissue_fraction,label_ihc,label_registered";

/// CSV with kManifestHeader, fractions with 6 decimals, empty label cells
/// for absent annotation sources.
std::string serialize_manifest(const TileManifest& m);

/// Geometry fields of the result keep their defaults; they are not part of
/// the CSV and travel in the run sidecar instead.
TileManifest parse_manifest(std::string_view csv);

TileManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const TileManifest& m, const std::filesystem::path& path);

}  // namespace annoreg
