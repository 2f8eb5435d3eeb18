#include "annoreg/types.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "annoreg/error.hpp"

namespace annoreg {

std::string_view class_name(ClassLabel c) {
  switch (c) {
    case ClassLabel::InvasiveCancer: return "Invasive cancer";
    case ClassLabel::DCIS: return "DCIS";
    case ClassLabel::LCIS: return "LCIS";
    case ClassLabel::NonMalignant: return "Non-malignant";
    case ClassLabel::Artefact: return "Artefact";
    case ClassLabel::LymphovascularInvasion: return "Lymphovascular invasion";
    case ClassLabel::Tissue: return "Tissue";
  }
  return "?";
}

namespace {

struct Alias {
  std::string_view name;
  ClassLabel label;
};

// Keys are lower-case with '_' and '-' folded to ' '.
constexpr Alias kAliases[] = {
    {"invasive cancer", ClassLabel::InvasiveCancer},
    {"ic", ClassLabel::InvasiveCancer},
    {"invasive carcinoma", ClassLabel::InvasiveCancer},
    {"dcis", ClassLabel::DCIS},
    {"ductal carcinoma in situ", ClassLabel::DCIS},
    {"lcis", ClassLabel::LCIS},
    {"lobular carcinoma in situ", ClassLabel::LCIS},
    {"non malignant", ClassLabel::NonMalignant},
    {"nonmalignant", ClassLabel::NonMalignant},
    {"artefact", ClassLabel::Artefact},
    {"artifact", ClassLabel::Artefact},
    {"lymphovascular invasion", ClassLabel::LymphovascularInvasion},
    {"lvi", ClassLabel::LymphovascularInvasion},
    {"tissue", ClassLabel::Tissue},
};

std::string fold_name(std::string_view name) {
  std::string out;
  out.reserve(name.size());
  bool pending_space = false;
  for (char ch : name) {
    auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c) || ch == '_' || ch == '-') {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

}  // namespace

std::optional<ClassLabel> class_from_name(std::string_view name) {
  const std::string key = fold_name(name);
  for (const auto& alias : kAliases) {
    if (alias.name == key) return alias.label;
  }
  return std::nullopt;
}

void validate_polygon(const Polygon& p, std::string_view context) {
  auto check_ring = [&](const Ring& ring, std::string_view what) {
    if (ring.size() < 3) {
      throw ValidationError(std::string(context) + ": " + std::string(what) +
                            " has " + std::to_string(ring.size()) +
                            " vertices (need at least 3)");
    }
    for (const auto& pt : ring) {
      if (!std::isfinite(pt.x) || !std::isfinite(pt.y)) {
        throw ValidationError(std::string(context) + ": " + std::string(what) +
                              " has a non-finite coordinate");
      }
    }
  };
  check_ring(p.outer, "outer ring");
  for (std::size_t i = 0; i < p.holes.size(); ++i) {
    check_ring(p.holes[i], "hole " + std::to_string(i));
  }
}

void validate_case(const CaseRecord& c) {
  if (c.case_id.empty()) throw ValidationError("case record with empty case_id");
  if (c.ki67_score && !(*c.ki67_score >= 0.0 && *c.ki67_score <= 100.0)) {
    throw ValidationError("case " + c.case_id + ": ki67_score outside [0,100]");
  }
}

}  // namespace annoreg
