#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "predictive/error.hpp"
#include "predictive/random.hpp"

namespace predictive {

/// W: [0,1]^2 -> [0,1].
class Graphon {
 public:
  using Function = std::function<double(double, double)>;

  /// Checks the range (and symmetry, when claimed) on a validation grid.
  Graphon(Function w, bool symmetric, std::size_t grid = 33) : w_(std::move(w)), symmetric_(symmetric) {
    if (!w_) throw ConfigError("graphon: function required");
    if (grid < 2) grid = 2;
    for (std::size_t a = 0; a < grid; ++a) {
      for (std::size_t b = 0; b < grid; ++b) {
        const double u = static_cast<double>(a) / static_cast<double>(grid - 1);
        const double v = static_cast<double>(b) / static_cast<double>(grid - 1);
        const double x = w_(u, v);
        if (!(x >= 0.0 && x <= 1.0))
          throw ConfigError("graphon: W(" + std::to_string(u) + "," + std::to_string(v) + ") outside [0,1]");
        if (symmetric_ && std::fabs(x - w_(v, u)) > 1e-12)
          throw ConfigError("graphon: declared symmetric but W(u,v) != W(v,u)");
      }
    }
  }

  static Graphon constant(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("graphon: constant must lie in [0,1]");
    return Graphon([p](double, double) { return p; }, true);
  }

  double operator()(double u, double v) const { return w_(u, v); }
  bool symmetric() const noexcept { return symmetric_; }

 private:
  Function w_;
  bool symmetric_;
};

enum class GraphonMode { separate, joint };

/// n x n binary array, row-major.
struct BinaryArray {
  std::size_t n = 0;
  std::vector<std::uint8_t> cells;

  std::uint8_t operator()(std::size_t i, std::size_t j) const { return cells[i * n + j]; }
  std::uint8_t& operator()(std::size_t i, std::size_t j) { return cells[i * n + j]; }

  std::size_t ones() const {
    std::size_t s = 0;
    for (auto c : cells) s += c;
    return s;
  }
};

/// separate: X_{i,j} = 1{U_{i,j} < W(U_i, V_j)} with all uniforms independent.
/// joint: X_{i,j} = X_{j,i} = 1{U_{min,max} < W(U_i, U_j)}, zero diagonal.
inline BinaryArray graphon_sample(const Graphon& w, std::size_t n, GraphonMode mode, RandomSource& rng) {
  if (mode == GraphonMode::joint && !w.symmetric())
    throw ConfigError("graphon: joint mode requires a symmetric graphon");
  BinaryArray x{n, std::vector<std::uint8_t>(n * n, 0)};
  std::vector<double> u(n), v;
  for (auto& e : u) e = rng.uniform();
  if (mode == GraphonMode::separate) {
    v.resize(n);
    for (auto& e : v) e = rng.uniform();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) x(i, j) = rng.uniform() < w(u[i], v[j]) ? 1 : 0;
  } else {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) x(i, j) = x(j, i) = rng.uniform() < w(u[i], u[j]) ? 1 : 0;
  }
  return x;
}

}  // namespace predictive
