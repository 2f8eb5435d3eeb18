#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "annoreg/mask.hpp"

namespace annoreg {

// Masks are 8-bit grayscale PNGs (0 background, 255 foreground) with a
// sidecar `<stem>.txt` holding `resolution_um = <value>`.

std::string encode_mask_png(const BinaryMask& m);
/// Any nonzero gray value is foreground.
BinaryMask decode_mask_png(std::string_view png, double resolution_um);

std::string encode_rgb_png(const RgbImage& img);

std::filesystem::path mask_sidecar_path(const std::filesystem::path& png_path);
std::string format_mask_sidecar(double resolution_um);
double parse_mask_sidecar(std::string_view text);

void save_mask(const BinaryMask& m, const std::filesystem::path& png_path);
BinaryMask load_mask(const std::filesystem::path& png_path);

void save_rgb(const RgbImage& img, const std::filesystem::path& png_path);

}  // namespace annoreg
