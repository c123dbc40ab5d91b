#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "predictive/error.hpp"

namespace predictive {

/// Categorical observation (small integer code).
struct Label {
  std::int64_t value = 0;
  auto operator<=>(const Label&) const = default;
};

/// Opaque identity of a species/color drawn from a diffuse base measure.
/// Generated as (stream, counter) pairs so that distinct draws never collide.
struct AtomTag {
  std::uint64_t stream = 0;
  std::uint64_t counter = 0;
  auto operator<=>(const AtomTag&) const = default;
};

using RealVector = std::vector<double>;

/// A point of the sample space. The alternative in use is fixed per space.
using Point = std::variant<Label, double, RealVector, AtomTag>;

enum class PointKind { categorical, real, vector, tag };

inline PointKind kind_of(const Point& p) {
  return static_cast<PointKind>(p.index());
}

inline const char* to_string(PointKind k) {
  switch (k) {
    case PointKind::categorical: return "categorical";
    case PointKind::real: return "real";
    case PointKind::vector: return "vector";
    case PointKind::tag: return "tag";
  }
  return "?";
}

inline std::string describe(const Point& p) {
  struct V {
    std::string operator()(const Label& l) const { return std::to_string(l.value); }
    std::string operator()(double x) const { return std::to_string(x); }
    std::string operator()(const RealVector& v) const {
      std::string s = "(";
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(v[i]);
      }
      return s + ")";
    }
    std::string operator()(const AtomTag& t) const {
      return "tag:" + std::to_string(t.stream) + ":" + std::to_string(t.counter);
    }
  };
  return std::visit(V{}, p);
}

/// Scalar value of a point for distribution-function purposes.
/// Real scalars map to themselves, categorical labels to their integer code.
inline double scalar_value(const Point& p) {
  if (auto* x = std::get_if<double>(&p)) return *x;
  if (auto* l = std::get_if<Label>(&p)) return static_cast<double>(l->value);
  throw UnsupportedOperation(std::string("distribution function undefined on ") +
                             to_string(kind_of(p)) + " points");
}

inline bool is_scalar(PointKind k) {
  return k == PointKind::real || k == PointKind::categorical;
}

/// Kind, dimension and (for finite spaces) the enumerated support.
struct SampleSpace {
  PointKind kind = PointKind::real;
  std::size_t dimension = 1;
  std::optional<std::vector<Point>> support;

  bool contains(const Point& p) const {
    if (kind_of(p) != kind) return false;
    if (kind == PointKind::vector && std::get<RealVector>(p).size() != dimension) return false;
    if (support) {
      for (const auto& s : *support)
        if (s == p) return true;
      return false;
    }
    return true;
  }

  bool finite() const { return support.has_value(); }
};

inline std::vector<Point> labels(std::int64_t k) {
  std::vector<Point> out;
  out.reserve(static_cast<std::size_t>(k));
  for (std::int64_t i = 0; i < k; ++i) out.emplace_back(Label{i});
  return out;
}

}  // namespace predictive
