#include "annoreg/manifest_io.hpp"

#include "annoreg/error.hpp"
#include "annoreg/io.hpp"

namespace annoreg {

namespace {

std::string label_cell(const std::optional<int>& label) {
  return label ? std::to_string(*label) : std::string();
}

std::optional<int> parse_label(const std::string& cell, std::size_t line) {
  const std::string t = trim(cell);
  if (t.empty()) return std::nullopt;
  if (t == "0") return 0;
  if (t == "1") return 1;
  throw ParseError("manifest line " + std::to_string(line) + ": label must be 0, 1 or empty");
}

}  // namespace

std::string serialize_manifest(const TileManifest& m) {
  std::string out(kManifestHeader);
  out += '\n';
  for (const auto& r : m.records) {
    out += r.slide_id;
    out += ',';
    out += std::to_string(r.tile_x);
    out += ',';
    out += std::to_string(r.tile_y);
    out += ',';
    out += format_fixed(r.tissue_fraction, 6);
    out += ',';
    out += label_cell(r.label_ihc);
    out += ',';
    out += label_cell(r.label_registered);
    out += '\n';
  }
  return out;
}

TileManifest parse_manifest(std::string_view csv) {
  const CsvTable table = parse_csv(csv, "manifest");
  const auto c_slide = table.column("slide_id");
  const auto c_x = table.column("tile_x");
  const auto c_y = table.column("tile_y");
  const auto c_frac = table.column("tissue_fraction");
  const auto c_ihc = table.column("label_ihc");
  const auto c_reg = table.column("label_registered");

  TileManifest m;
  m.records.reserve(table.rows.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const auto line = table.line_numbers[i];
    TileRecord r;
    r.slide_id = trim(row[c_slide]);
    if (r.slide_id.empty()) {
      throw ParseError("manifest line " + std::to_string(line) + ": empty slide_id");
    }
    r.tile_x = parse_int(row[c_x], "tile_x");
    r.tile_y = parse_int(row[c_y], "tile_y");
    r.tissue_fraction = parse_double(row[c_frac], "tissue_fraction");
    if (!(r.tissue_fraction >= 0.0 && r.tissue_fraction <= 1.0)) {
      throw ParseError("manifest line " + std::to_string(line) +
                       ": tissue_fraction outside [0,1]");
    }
    r.label_ihc = parse_label(row[c_ihc], line);
    r.label_registered = parse_label(row[c_reg], line);
    m.records.push_back(std::move(r));
  }
  return m;
}

TileManifest load_manifest(const std::filesystem::path& path) {
  try {
    return parse_manifest(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void save_manifest(const TileManifest& m, const std::filesystem::path& path) {
  write_file(path, serialize_manifest(m));
}

}  // namespace annoreg
