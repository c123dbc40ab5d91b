#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "predictive/engine.hpp"
#include "predictive/measure.hpp"
#include "predictive/rules/polya.hpp"

namespace predictive {

using ProbabilityKernel = std::function<AtomicMixture(const Point&)>;

/// alpha/(alpha+n) P_0 + 1/(alpha+n) sum_i K(. | x_i).
///
/// Kernel outputs are validated as measures on construction; diffuse parts of
/// different kernels are combined into a finite mixture base.
inline AtomicMixture kernel_ds_predict(const PolyaState& s, const ProbabilityKernel& kernel) {
  if (!(s.alpha > 0.0)) throw ConfigError("kernel dirichlet: alpha must be > 0");
  if (s.n == 0) return AtomicMixture::from_base(s.base);
  const double denom = s.alpha + static_cast<double>(s.n);
  std::vector<AtomicMixture::Atom> atoms;
  std::vector<std::pair<double, BaseMeasure>> diffuse;
  auto add_diffuse = [&diffuse](double w, const BaseMeasure& b) {
    if (w <= 0.0) return;
    for (auto& [dw, db] : diffuse)
      if (db == b) {
        dw += w;
        return;
      }
    diffuse.emplace_back(w, b);
  };
  add_diffuse(s.alpha / denom, s.base);
  for (const auto& x : s.draws) {
    const AtomicMixture k = kernel(x);
    for (const auto& [y, w] : k.atoms()) atoms.emplace_back(y, w / denom);
    add_diffuse(k.diffuse_weight() / denom, k.base());
  }
  double total = 0.0;
  for (const auto& [w, b] : diffuse) total += w;
  BaseMeasure base;
  if (total > 0.0) {
    for (auto& [w, b] : diffuse) w /= total;
    base = BaseMeasure::mixture(std::move(diffuse));
  }
  return AtomicMixture(std::move(atoms), total, std::move(base));
}

/// Kernel-based Dirichlet sequence; K(. | x) = delta_x recovers the Pólya rule.
class KernelDirichletRule : public MeasureRule<KernelDirichletRule> {
 public:
  using state_type = PolyaState;
  using observation_type = Point;

  KernelDirichletRule(double alpha, BaseMeasure base, ProbabilityKernel kernel)
      : polya_(alpha, std::move(base)), kernel_(std::move(kernel)) {
    if (!kernel_) throw ConfigError("kernel dirichlet: kernel required");
  }

  PolyaState initial_state() const { return polya_.initial_state(); }
  PolyaState update(PolyaState s, const Point& x) const { return polya_.update(std::move(s), x); }
  AtomicMixture predict(const PolyaState& s) const { return kernel_ds_predict(s, kernel_); }
  const SampleSpace& space() const { return polya_.space(); }
  std::string name() const { return "kernel-dirichlet"; }

 private:
  PolyaRule polya_;
  ProbabilityKernel kernel_;
};

}  // namespace predictive
