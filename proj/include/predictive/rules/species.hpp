#pragma once

#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "predictive/engine.hpp"
#include "predictive/measure.hpp"
#include "predictive/special.hpp"

namespace predictive {

/// Block sizes (n_1, ..., n_k) in order of appearance.
class PartitionCounts {
 public:
  PartitionCounts() = default;
  explicit PartitionCounts(std::vector<std::size_t> sizes) : sizes_(std::move(sizes)) {
    for (auto s : sizes_)
      if (s == 0) throw ConfigError("partition counts: empty block");
    n_ = std::accumulate(sizes_.begin(), sizes_.end(), std::size_t{0});
  }

  const std::vector<std::size_t>& sizes() const noexcept { return sizes_; }
  std::size_t n() const noexcept { return n_; }
  std::size_t k() const noexcept { return sizes_.size(); }
  std::size_t operator[](std::size_t j) const { return sizes_[j]; }

  /// n^{j+}: one more element in block j (j == k opens a new block).
  PartitionCounts incremented(std::size_t j) const {
    PartitionCounts out = *this;
    if (j == sizes_.size())
      out.sizes_.push_back(1);
    else
      ++out.sizes_.at(j);
    ++out.n_;
    return out;
  }

  bool operator==(const PartitionCounts&) const = default;

 private:
  std::vector<std::size_t> sizes_;
  std::size_t n_ = 0;
};

/// Block sizes of the partition of positions induced by ties in `xs`.
template <class T>
PartitionCounts partition_of(const std::vector<T>& xs) {
  std::vector<T> firsts;
  std::vector<std::size_t> sizes;
  for (const auto& x : xs) {
    std::size_t j = 0;
    while (j < firsts.size() && !(firsts[j] == x)) ++j;
    if (j == firsts.size()) {
      firsts.push_back(x);
      sizes.push_back(1);
    } else {
      ++sizes[j];
    }
  }
  return PartitionCounts(std::move(sizes));
}

/// Exchangeable partition probability function with a display name.
struct EppfSpec {
  std::string name;
  std::function<double(const PartitionCounts&)> p;

  double operator()(const PartitionCounts& c) const { return p(c); }
};

/// Predictive allocation probabilities: one per existing block plus a new one.
struct SpeciesWeights {
  std::vector<double> existing;
  double fresh = 0.0;
};

inline void check_pitman_yor(double alpha, double theta) {
  if (!(theta >= 0.0 && theta < 1.0)) throw ConfigError("pitman-yor: need 0 <= theta < 1");
  if (!(alpha > -theta)) throw ConfigError("pitman-yor: need alpha > -theta");
}

/// log p(n) for the two-parameter (alpha, theta) family:
///   prod_{i<k} (alpha + i theta) / (alpha+1)^{[n-1]} * prod_j (1-theta)^{[n_j - 1]}.
inline double log_eppf_py(const PartitionCounts& c, double alpha, double theta) {
  check_pitman_yor(alpha, theta);
  if (c.n() == 0) throw DomainError("eppf: n = 0");
  double lp = 0.0;
  for (std::size_t i = 1; i < c.k(); ++i) lp += std::log(alpha + static_cast<double>(i) * theta);
  lp -= log_rising(alpha + 1.0, static_cast<double>(c.n() - 1));
  for (auto nj : c.sizes()) lp += log_rising(1.0 - theta, static_cast<double>(nj - 1));
  return lp;
}

inline double eppf_py(const PartitionCounts& c, double alpha, double theta) {
  return std::exp(log_eppf_py(c, alpha, theta));
}

/// alpha^k / alpha^{[n]} * prod_j (n_j - 1)!  (Ewens / Chinese restaurant).
inline double log_eppf_crp(const PartitionCounts& c, double alpha) {
  if (!(alpha > 0.0)) throw ConfigError("crp: alpha must be > 0");
  if (c.n() == 0) throw DomainError("eppf: n = 0");
  double lp = static_cast<double>(c.k()) * std::log(alpha) - log_rising(alpha, static_cast<double>(c.n()));
  for (auto nj : c.sizes()) lp += std::lgamma(static_cast<double>(nj));
  return lp;
}

inline double eppf_crp(const PartitionCounts& c, double alpha) { return std::exp(log_eppf_crp(c, alpha)); }

/// Symmetric K-dimensional Dirichlet(alpha/K) allocation:
///   K!/(K-k)! prod_j (alpha/K)^{[n_j]} / alpha^{[n]}.
inline double eppf_finite_dirichlet(const PartitionCounts& c, double alpha, std::size_t K) {
  if (!(alpha > 0.0) || K == 0) throw ConfigError("finite dirichlet: need alpha > 0 and K >= 1");
  if (c.n() == 0) throw DomainError("eppf: n = 0");
  if (c.k() > K) return 0.0;
  const double a = alpha / static_cast<double>(K);
  double lp = std::lgamma(static_cast<double>(K) + 1.0) - std::lgamma(static_cast<double>(K - c.k()) + 1.0) -
              log_rising(alpha, static_cast<double>(c.n()));
  for (auto nj : c.sizes()) lp += log_rising(a, static_cast<double>(nj));
  return std::exp(lp);
}

inline EppfSpec crp_eppf(double alpha) {
  if (!(alpha > 0.0)) throw ConfigError("crp: alpha must be > 0");
  std::ostringstream os;
  os << "crp(alpha=" << alpha << ")";
  return {os.str(), [alpha](const PartitionCounts& c) { return eppf_crp(c, alpha); }};
}

inline EppfSpec pitman_yor_eppf(double alpha, double theta) {
  check_pitman_yor(alpha, theta);
  std::ostringstream os;
  os << "pitman-yor(alpha=" << alpha << ",theta=" << theta << ")";
  return {os.str(), [alpha, theta](const PartitionCounts& c) { return eppf_py(c, alpha, theta); }};
}

inline EppfSpec finite_dirichlet_eppf(double alpha, std::size_t K) {
  if (!(alpha > 0.0) || K == 0) throw ConfigError("finite dirichlet: need alpha > 0 and K >= 1");
  std::ostringstream os;
  os << "finite-dirichlet(alpha=" << alpha << ",K=" << K << ")";
  return {os.str(), [alpha, K](const PartitionCounts& c) { return eppf_finite_dirichlet(c, alpha, K); }};
}

/// p_j(n) = (n_j - theta)/(alpha + n), p_{k+1}(n) = (alpha + k theta)/(alpha + n).
inline SpeciesWeights py_weights(const PartitionCounts& c, double alpha, double theta) {
  check_pitman_yor(alpha, theta);
  SpeciesWeights w;
  const double denom = alpha + static_cast<double>(c.n());
  if (c.n() == 0) {
    w.fresh = 1.0;
    return w;
  }
  w.existing.reserve(c.k());
  for (auto nj : c.sizes()) {
    const double p = (static_cast<double>(nj) - theta) / denom;
    if (p < 0.0) throw ConfigError("pitman-yor: negative predictive weight");
    w.existing.push_back(p);
  }
  w.fresh = (alpha + static_cast<double>(c.k()) * theta) / denom;
  if (w.fresh < 0.0) throw ConfigError("pitman-yor: negative new-species weight");
  return w;
}

inline SpeciesWeights crp_weights(const PartitionCounts& c, double alpha) {
  if (!(alpha > 0.0)) throw ConfigError("crp: alpha must be > 0");
  return py_weights(c, alpha, 0.0);
}

/// (n_j + alpha/K)/(alpha+n) for existing blocks; new block gets the remaining
/// (K - k) alpha/K / (alpha + n), zero once K blocks exist.
inline SpeciesWeights finite_dirichlet_weights(const PartitionCounts& c, double alpha, std::size_t K) {
  if (!(alpha > 0.0) || K == 0) throw ConfigError("finite dirichlet: need alpha > 0 and K >= 1");
  if (c.k() > K) throw ConfigError("finite dirichlet: more than K blocks");
  SpeciesWeights w;
  const double a = alpha / static_cast<double>(K);
  const double denom = alpha + static_cast<double>(c.n());
  for (auto nj : c.sizes()) w.existing.push_back((static_cast<double>(nj) + a) / denom);
  w.fresh = static_cast<double>(K - c.k()) * a / denom;
  return w;
}

/// Tolerance for the additivity p(n) = sum_j p(n^{j+}) on visited counts.
inline constexpr double kEppfAdditivityTolerance = 1e-10;

/// p_j(n) = p(n^{j+}) / p(n), with additivity checked on the visited counts.
inline SpeciesWeights eppf_weights(const EppfSpec& eppf, const PartitionCounts& c) {
  SpeciesWeights w;
  if (c.n() == 0) {
    w.fresh = 1.0;
    return w;
  }
  const double pn = eppf(c);
  if (!(pn > 0.0)) throw ConditioningOnNull("eppf " + eppf.name + " vanishes on the conditioning counts");
  double total = 0.0;
  for (std::size_t j = 0; j <= c.k(); ++j) {
    const double pj = eppf(c.incremented(j));
    if (pj < 0.0) throw ConfigError("eppf " + eppf.name + " returned a negative value");
    const double r = pj / pn;
    total += r;
    if (j < c.k())
      w.existing.push_back(r);
    else
      w.fresh = r;
  }
  if (std::fabs(total - 1.0) > kEppfAdditivityTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "eppf " << eppf.name << " is not additive at n=" << c.n() << " (sum of ratios " << total << ")";
    throw ConfigError(os.str());
  }
  return w;
}

/// sum_j p_j(n) delta_{atom_j} + p_{k+1}(n) P_0.
inline AtomicMixture species_predict(const PartitionCounts& c, const std::vector<Point>& atoms,
                                     const EppfSpec& eppf, const BaseMeasure& base) {
  if (atoms.size() != c.k()) throw ConfigError("species_predict: one atom per block required");
  if (c.n() == 0) return AtomicMixture::from_base(base);
  const auto w = eppf_weights(eppf, c);
  std::vector<AtomicMixture::Atom> out;
  out.reserve(atoms.size());
  for (std::size_t j = 0; j < atoms.size(); ++j) out.emplace_back(atoms[j], w.existing[j]);
  return AtomicMixture(std::move(out), w.fresh, base);
}

// Allocation policies for SpeciesRule.

struct CrpPolicy {
  double alpha;
  SpeciesWeights operator()(const PartitionCounts& c) const { return crp_weights(c, alpha); }
  std::string name() const { return "crp"; }
};

struct PitmanYorPolicy {
  double alpha;
  double theta;
  SpeciesWeights operator()(const PartitionCounts& c) const { return py_weights(c, alpha, theta); }
  std::string name() const { return "pitman-yor"; }
};

struct FiniteDirichletPolicy {
  double alpha;
  std::size_t K;
  SpeciesWeights operator()(const PartitionCounts& c) const { return finite_dirichlet_weights(c, alpha, K); }
  std::string name() const { return "finite-dirichlet"; }
};

struct EppfPolicy {
  EppfSpec eppf;
  SpeciesWeights operator()(const PartitionCounts& c) const { return eppf_weights(eppf, c); }
  std::string name() const { return "species:" + eppf.name; }
};

struct SpeciesState {
  PartitionCounts counts;
  std::vector<Point> atoms;  // one per block, in order of appearance
  std::size_t n = 0;
};

/// Species sampling sequence driven by an allocation policy and a diffuse base.
template <class Policy>
class SpeciesRule : public MeasureRule<SpeciesRule<Policy>> {
 public:
  using state_type = SpeciesState;
  using observation_type = Point;

  SpeciesRule(Policy policy, BaseMeasure base) : policy_(std::move(policy)), base_(std::move(base)) {
    if (!base_ || !base_.diffuse()) throw ConfigError("species sampling requires a diffuse base");
    space_ = base_.space();
  }

  SpeciesState initial_state() const { return {}; }

  SpeciesState update(SpeciesState s, const Point& x) const {
    std::size_t j = 0;
    while (j < s.atoms.size() && !(s.atoms[j] == x)) ++j;
    s.counts = s.counts.incremented(j);
    if (j == s.atoms.size()) s.atoms.push_back(x);
    ++s.n;
    return s;
  }

  AtomicMixture predict(const SpeciesState& s) const {
    if (s.n == 0) return AtomicMixture::from_base(base_);
    const auto w = policy_(s.counts);
    std::vector<AtomicMixture::Atom> out;
    for (std::size_t j = 0; j < s.atoms.size(); ++j) out.emplace_back(s.atoms[j], w.existing[j]);
    return AtomicMixture(std::move(out), w.fresh, base_);
  }

  Point draw(const SpeciesState& s, RandomSource& rng) const {
    if (s.n == 0) return base_.sample(rng);
    auto w = policy_(s.counts);
    w.existing.push_back(w.fresh);
    const std::size_t j = rng.categorical(w.existing);
    return j < s.atoms.size() ? s.atoms[j] : base_.sample(rng);
  }

  const SampleSpace& space() const { return space_; }
  const Policy& policy() const noexcept { return policy_; }
  std::string name() const { return policy_.name(); }

 private:
  Policy policy_;
  BaseMeasure base_;
  SampleSpace space_;
};

}  // namespace predictive
