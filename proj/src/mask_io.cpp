#include "annoreg/mask_io.hpp"

#include <png.h>

#include <cstring>
#include <vector>

#include "annoreg/error.hpp"
#include "annoreg/io.hpp"

namespace annoreg {

namespace {

std::string encode(int width, int height, png_uint_32 format, const std::uint8_t* pixels) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = format;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&image, nullptr, &size, 0, pixels, 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw Error("PNG encode failed: " + msg);
  }
  std::string out(size, '\0');
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, pixels, 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw Error("PNG encode failed: " + msg);
  }
  out.resize(size);
  return out;
}

}  // namespace

std::string encode_mask_png(const BinaryMask& m) {
  std::vector<std::uint8_t> gray(m.size());
  for (std::size_t i = 0; i < gray.size(); ++i) gray[i] = m.bits()[i] ? 255 : 0;
  return encode(m.width(), m.height(), PNG_FORMAT_GRAY, gray.data());
}

std::string encode_rgb_png(const RgbImage& img) {
  return encode(img.width, img.height, PNG_FORMAT_RGB, img.rgb.data());
}

BinaryMask decode_mask_png(std::string_view bytes, double resolution_um) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw ParseError("PNG decode failed: " + msg);
  }
  image.format = PNG_FORMAT_GRAY;
  const int width = static_cast<int>(image.width);
  const int height = static_cast<int>(image.height);
  std::vector<std::uint8_t> gray(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, gray.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw ParseError("PNG decode failed: " + msg);
  }
  BinaryMask mask(width, height, resolution_um);
  for (std::size_t i = 0; i < mask.size(); ++i) mask.bits()[i] = gray[i] != 0 ? 1 : 0;
  return mask;
}

std::filesystem::path mask_sidecar_path(const std::filesystem::path& png_path) {
  auto p = png_path;
  p.replace_extension(".txt");
  return p;
}

std::string format_mask_sidecar(double resolution_um) {
  return "resolution_um = " + format_shortest(resolution_um) + "\n";
}

double parse_mask_sidecar(std::string_view text) {
  for (const auto& raw : split(text, '\n')) {
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    if (trim(line.substr(0, eq)) == "resolution_um") {
      const double res = parse_double(line.substr(eq + 1), "resolution_um");
      if (!(res > 0.0)) throw ValidationError("resolution_um must be positive");
      return res;
    }
  }
  throw ParseError("mask sidecar without resolution_um");
}

void save_mask(const BinaryMask& m, const std::filesystem::path& png_path) {
  write_file(png_path, encode_mask_png(m));
  write_file(mask_sidecar_path(png_path), format_mask_sidecar(m.resolution_um()));
}

BinaryMask load_mask(const std::filesystem::path& png_path) {
  const double res = parse_mask_sidecar(read_file(mask_sidecar_path(png_path)));
  try {
    return decode_mask_png(read_file(png_path), res);
  } catch (const ParseError& e) {
    throw ParseError(png_path.string() + ": " + e.what());
  }
}

void save_rgb(const RgbImage& img, const std::filesystem::path& png_path) {
  write_file(png_path, encode_rgb_png(img));
}

}  // namespace annoreg
