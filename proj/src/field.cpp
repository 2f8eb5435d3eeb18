#include "annoreg/field.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <sstream>

#include "annoreg/error.hpp"
#include "annoreg/io.hpp"

static_assert(std::endian::native == std::endian::little,
              "WDF1 encoding assumes a little-endian host");

namespace annoreg {

DeformationField DeformationField::zeros(std::uint32_t w, std::uint32_t h,
                                         double spacing_um) {
  return constant(w, h, spacing_um, 0.0f, 0.0f);
}

DeformationField DeformationField::constant(std::uint32_t w, std::uint32_t h,
                                            double spacing_um, float dx, float dy) {
  DeformationField f;
  f.grid_w = w;
  f.grid_h = h;
  f.spacing_um = spacing_um;
  f.dx.assign(static_cast<std::size_t>(w) * h, dx);
  f.dy.assign(static_cast<std::size_t>(w) * h, dy);
  return f;
}

void validate_field(const DeformationField& f) {
  if (f.grid_w < 2 || f.grid_h < 2) {
    throw ValidationError("deformation field grid must be at least 2x2");
  }
  if (!(f.spacing_um > 0.0) || !std::isfinite(f.spacing_um)) {
    throw ValidationError("deformation field spacing_um must be positive");
  }
  const std::size_t n = static_cast<std::size_t>(f.grid_w) * f.grid_h;
  if (f.dx.size() != n || f.dy.size() != n) {
    throw ValidationError("deformation field planes do not match grid size");
  }
  auto check = [&](const std::vector<float>& plane, const char* name) {
    for (std::size_t k = 0; k < n; ++k) {
      if (!std::isfinite(plane[k])) {
        throw ValidationError(std::string("non-finite ") + name + " at grid index (" +
                              std::to_string(k % f.grid_w) + ", " +
                              std::to_string(k / f.grid_w) + ")");
      }
    }
  };
  check(f.dx, "dx");
  check(f.dy, "dy");
}

namespace {

constexpr std::size_t kHeaderSize = 4 + 4 + 4 + 8;

template <typename T>
T read_le(std::string_view bytes, std::size_t offset) {
  T v;
  std::memcpy(&v, bytes.data() + offset, sizeof(T));
  return v;
}

template <typename T>
void append_le(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

}  // namespace

DeformationField load_field(std::string_view bytes) {
  if (bytes.size() < kHeaderSize) {
    throw ParseError("deformation field truncated: header needs " +
                     std::to_string(kHeaderSize) + " bytes, have " +
                     std::to_string(bytes.size()));
  }
  if (bytes.substr(0, 4) != kFieldMagic) {
    throw ParseError("deformation field has bad magic (expected WDF1)");
  }
  DeformationField f;
  f.grid_w = read_le<std::uint32_t>(bytes, 4);
  f.grid_h = read_le<std::uint32_t>(bytes, 8);
  f.spacing_um = read_le<double>(bytes, 12);
  const std::uint64_t n = static_cast<std::uint64_t>(f.grid_w) * f.grid_h;
  const std::uint64_t expected = n * 2 * sizeof(float);
  const std::uint64_t have = bytes.size() - kHeaderSize;
  if (have < expected) {
    throw ParseError("deformation field truncated: payload has " +
                         std::to_string(have) + " bytes, expected " +
                         std::to_string(expected),
                     bytes.size());
  }
  if (have > expected) {
    throw ParseError("deformation field has " + std::to_string(have - expected) +
                         " trailing bytes",
                     kHeaderSize + expected);
  }
  f.dx.resize(n);
  f.dy.resize(n);
  std::memcpy(f.dx.data(), bytes.data() + kHeaderSize, n * sizeof(float));
  std::memcpy(f.dy.data(), bytes.data() + kHeaderSize + n * sizeof(float),
              n * sizeof(float));
  validate_field(f);
  return f;
}

std::string save_field(const DeformationField& f) {
  validate_field(f);
  std::string out;
  out.reserve(kHeaderSize + f.dx.size() * 2 * sizeof(float));
  out.append(kFieldMagic);
  append_le(out, f.grid_w);
  append_le(out, f.grid_h);
  append_le(out, f.spacing_um);
  out.append(reinterpret_cast<const char*>(f.dx.data()), f.dx.size() * sizeof(float));
  out.append(reinterpret_cast<const char*>(f.dy.data()), f.dy.size() * sizeof(float));
  return out;
}

DeformationField parse_text_field(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw ParseError("text field: missing header line");
  const auto header = split(trim(line), ' ');
  std::vector<std::string> parts;
  for (const auto& h : header) {
    if (!h.empty()) parts.push_back(h);
  }
  if (parts.size() != 3) {
    throw ParseError("text field: header must be `grid_w grid_h spacing_um`");
  }
  const long long w = parse_int(parts[0], "grid_w");
  const long long h = parse_int(parts[1], "grid_h");
  if (w < 2 || h < 2 || w > (1 << 20) || h > (1 << 20)) {
    throw ValidationError("text field: grid must be at least 2x2");
  }
  DeformationField f;
  f.grid_w = static_cast<std::uint32_t>(w);
  f.grid_h = static_cast<std::uint32_t>(h);
  f.spacing_um = parse_double(parts[2], "spacing_um");
  const std::size_t n = static_cast<std::size_t>(w * h);
  std::vector<float> values;
  values.reserve(2 * n);
  std::string token;
  while (in >> token) {
    values.push_back(static_cast<float>(parse_double(token, "displacement")));
  }
  if (values.size() != 2 * n) {
    throw ParseError("text field: expected " + std::to_string(2 * n) +
                     " displacement values, found " + std::to_string(values.size()));
  }
  f.dx.assign(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(n));
  f.dy.assign(values.begin() + static_cast<std::ptrdiff_t>(n), values.end());
  validate_field(f);
  return f;
}

DeformationField load_field_file(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  try {
    if (bytes.size() >= 4 && std::string_view(bytes).substr(0, 4) == kFieldMagic) {
      return load_field(bytes);
    }
    return parse_text_field(bytes);
  } catch (const Error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void save_field_file(const DeformationField& f, const std::filesystem::path& path) {
  write_file(path, save_field(f));
}

PointUm interpolate_displacement(const DeformationField& f, double u, double v) {
  const double max_u = static_cast<double>(f.grid_w - 1);
  const double max_v = static_cast<double>(f.grid_h - 1);
  u = std::clamp(u, 0.0, max_u);
  v = std::clamp(v, 0.0, max_v);
  const auto i0 = std::min(static_cast<std::uint32_t>(u), f.grid_w - 2);
  const auto j0 = std::min(static_cast<std::uint32_t>(v), f.grid_h - 2);
  const double fu = u - i0;
  const double fv = v - j0;

  // Nested lerps reproduce constant planes exactly.
  auto sample = [&](const std::vector<float>& plane) {
    const double d00 = plane[f.index(i0, j0)];
    const double d10 = plane[f.index(i0 + 1, j0)];
    const double d01 = plane[f.index(i0, j0 + 1)];
    const double d11 = plane[f.index(i0 + 1, j0 + 1)];
    const double top = d00 + fu * (d10 - d00);
    const double bottom = d01 + fu * (d11 - d01);
    return top + fv * (bottom - top);
  };
  return {sample(f.dx), sample(f.dy)};
}

PointUm displace_point(const DeformationField& f, PointUm pt) {
  const PointUm d = interpolate_displacement(f, pt.x / f.spacing_um, pt.y / f.spacing_um);
  return {pt.x + f.spacing_um * d.x, pt.y + f.spacing_um * d.y};
}

Polygon warp_polygon(const DeformationField& f, const Polygon& p) {
  auto warp_ring = [&](const Ring& ring) {
    Ring out;
    out.reserve(ring.size());
    for (const auto& pt : ring) out.push_back(displace_point(f, pt));
    return out;
  };
  Polygon out;
  out.outer = warp_ring(p.outer);
  out.holes.reserve(p.holes.size());
  for (const auto& hole : p.holes) out.holes.push_back(warp_ring(hole));
  return out;
}

AnnotationSet warp_annotation_set(const DeformationField& f, const AnnotationSet& a,
                                  std::string_view target_slide_id) {
  AnnotationSet out;
  out.slide_id = std::string(target_slide_id);
  out.regions.reserve(a.regions.size());
  for (const auto& region : a.regions) {
    out.regions.push_back({region.label, warp_polygon(f, region.polygon)});
  }
  return out;
}

}  // namespace annoreg
