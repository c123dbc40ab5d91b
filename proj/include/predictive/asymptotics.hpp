#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "predictive/error.hpp"
#include "predictive/measure.hpp"
#include "predictive/special.hpp"

namespace predictive {

/// Running sum of m^2 Delta_m Delta_m^T, where Delta_m is the change of the
/// tracked vector (P_m on a grid, or a parameter) at step m.
struct UpdateAccumulator {
  std::size_t n = 0;
  std::vector<double> previous;
  std::vector<double> sum;  // dim x dim, row-major

  std::size_t dim() const noexcept { return previous.size(); }
};

/// Accumulator starting from the step-0 values (P_0 on the grid, or beta_0).
inline UpdateAccumulator make_accumulator(std::vector<double> initial) {
  const std::size_t d = initial.size();
  if (d == 0) throw ConfigError("accumulator: dimension must be >= 1");
  return UpdateAccumulator{0, std::move(initial), std::vector<double>(d * d, 0.0)};
}

inline UpdateAccumulator record_update(UpdateAccumulator acc, std::span<const double> values) {
  const std::size_t d = acc.dim();
  if (values.size() != d)
    throw ConfigError("accumulator: got " + std::to_string(values.size()) + " values, expected " + std::to_string(d));
  ++acc.n;
  const double m = static_cast<double>(acc.n);
  thread_local std::vector<double> scaled;
  scaled.resize(d);
  for (std::size_t i = 0; i < d; ++i) scaled[i] = m * (values[i] - acc.previous[i]);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) acc.sum[i * d + j] += scaled[i] * scaled[j];
  std::copy(values.begin(), values.end(), acc.previous.begin());
  return acc;
}

inline UpdateAccumulator record_update(UpdateAccumulator acc, const std::vector<double>& values) {
  return record_update(std::move(acc), std::span<const double>(values));
}

/// Sum of independent accumulators' running sums (for pooled diagnostics).
inline Eigen::MatrixXd pooled_sum(std::span<const UpdateAccumulator> accs) {
  if (accs.empty()) throw DomainError("pooled_sum of no accumulators");
  const auto d = static_cast<Eigen::Index>(accs.front().dim());
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(d, d);
  for (const auto& a : accs) {
    if (static_cast<Eigen::Index>(a.dim()) != d) throw ConfigError("pooled_sum: dimension mismatch");
    s += Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(a.sum.data(), d, d);
  }
  return s;
}

/// V_n = (1/n) sum_{m<=n} m^2 Delta_m Delta_m^T, symmetrized.
inline Eigen::MatrixXd vn(const UpdateAccumulator& acc) {
  if (acc.n == 0) throw DomainError("V_n requires at least one recorded update");
  const auto d = static_cast<Eigen::Index>(acc.dim());
  Eigen::MatrixXd v =
      Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(acc.sum.data(), d, d);
  v /= static_cast<double>(acc.n);
  return 0.5 * (v + v.transpose());
}

struct Interval {
  double center = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double v = 0.0;
  bool degenerate = false;  // V entry was zero
};

/// center +- z_{(1+level)/2} sqrt(V_n[i,i] / n), clipped to [0,1] when `clip`.
inline Interval credible_interval(const UpdateAccumulator& acc, double center, std::size_t index, double level,
                                  bool clip = true) {
  if (!(level > 0.0 && level < 1.0)) throw DomainError("credible level must lie in (0,1)");
  if (index >= acc.dim()) throw ConfigError("credible interval: index out of range");
  const double v = vn(acc)(static_cast<Eigen::Index>(index), static_cast<Eigen::Index>(index));
  Interval out{center, center, center, v, !(v > 0.0)};
  if (out.degenerate) return out;
  const double half = normal_quantile(0.5 + 0.5 * level) * std::sqrt(v / static_cast<double>(acc.n));
  out.lo = center - half;
  out.hi = center + half;
  if (clip) {
    out.lo = std::clamp(out.lo, 0.0, 1.0);
    out.hi = std::clamp(out.hi, 0.0, 1.0);
  }
  return out;
}

inline constexpr double kEigenvalueFloor = 1e-14;

/// N(center, V_n / n).
struct GaussianApprox {
  Eigen::VectorXd center;
  Eigen::MatrixXd covariance;
  std::size_t n = 0;
  bool singular = false;  // some eigenvalue of the covariance fell below the floor

  /// Covariance^{-1/2}; pseudo-inverse square root on the floored directions.
  Eigen::MatrixXd whitening() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(covariance);
    const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    Eigen::VectorXd inv = es.eigenvalues();
    for (Eigen::Index i = 0; i < inv.size(); ++i)
      inv(i) = inv(i) > kEigenvalueFloor * scale ? 1.0 / std::sqrt(inv(i)) : 0.0;
    return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
  }

  /// Covariance^{-1/2} (target - center); approximately N(0, I) under the model.
  Eigen::VectorXd whiten(const Eigen::VectorXd& target) const {
    if (target.size() != center.size()) throw ConfigError("whiten: dimension mismatch");
    return whitening() * (target - center);
  }
};

inline bool has_small_eigenvalue(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  return es.eigenvalues().minCoeff() <= kEigenvalueFloor * scale;
}

inline GaussianApprox gaussian_posterior(const UpdateAccumulator& acc, std::span<const double> center) {
  if (center.size() != acc.dim()) throw ConfigError("gaussian_posterior: center dimension mismatch");
  GaussianApprox g;
  g.center = Eigen::Map<const Eigen::VectorXd>(center.data(), static_cast<Eigen::Index>(center.size()));
  g.covariance = vn(acc) / static_cast<double>(acc.n);
  g.n = acc.n;
  g.singular = has_small_eigenvalue(g.covariance);
  return g;
}

inline GaussianApprox gaussian_posterior(const UpdateAccumulator& acc, const std::vector<double>& center) {
  return gaussian_posterior(acc, std::span<const double>(center));
}

/// Grid for Prop-2.6 style inference: strictly increasing, no atoms of P_0.
inline void validate_grid(std::span<const double> grid, const BaseMeasure& base) {
  if (grid.empty()) throw ConfigError("grid must not be empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(grid[i])) throw ConfigError("grid point " + std::to_string(i) + " is not finite");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw ConfigError("grid must be strictly increasing");
    if (!base) continue;
    double atom = 0.0;
    if (base.kind() == PointKind::real) {
      atom = base.mass(Point{grid[i]});
    } else if (base.kind() == PointKind::categorical && std::floor(grid[i]) == grid[i]) {
      atom = base.mass(Point{Label{static_cast<std::int64_t>(grid[i])}});
    }
    if (atom > 0.0)
      throw ConfigError("grid point " + std::to_string(grid[i]) + " is an atom of the base measure");
  }
}

}  // namespace predictive
