#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "predictive/error.hpp"
#include "predictive/point.hpp"
#include "predictive/random.hpp"
#include "predictive/special.hpp"

namespace predictive {

/// Absolute tolerance for total mass of every constructed measure.
inline constexpr double kNormalizationTolerance = 1e-12;

namespace detail {

inline void check_probability_vector(std::span<const double> w, double extra, const char* what) {
  CompensatedSum total;
  for (double x : w) {
    if (!(x >= 0.0) || !std::isfinite(x))
      throw ConfigError(std::string(what) + ": negative or non-finite weight");
    total.add(x);
  }
  if (!(extra >= 0.0)) throw ConfigError(std::string(what) + ": negative diffuse weight");
  total.add(extra);
  if (std::fabs(total.value() - 1.0) > kNormalizationTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << what << ": weights sum to " << total.value() << ", not 1";
    throw ConfigError(os.str());
  }
}

}  // namespace detail

/// Finite law on distinct points.
class DiscreteDistribution {
 public:
  DiscreteDistribution() = default;

  DiscreteDistribution(std::vector<Point> labels, std::vector<double> probs)
      : labels_(std::move(labels)), probs_(std::move(probs)) {
    if (labels_.empty()) throw ConfigError("discrete distribution: empty support");
    if (labels_.size() != probs_.size()) throw ConfigError("discrete distribution: size mismatch");
    detail::check_probability_vector(probs_, 0.0, "discrete distribution");
    const PointKind k = kind_of(labels_.front());
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      if (kind_of(labels_[i]) != k) throw ConfigError("discrete distribution: mixed point kinds");
      for (std::size_t j = 0; j < i; ++j)
        if (labels_[j] == labels_[i]) throw ConfigError("discrete distribution: duplicate label");
    }
  }

  static DiscreteDistribution uniform(std::vector<Point> labels) {
    const double p = 1.0 / static_cast<double>(labels.size());
    std::vector<double> probs(labels.size(), p);
    // Absorb rounding so the invariant holds exactly enough.
    probs.back() = 1.0 - p * static_cast<double>(labels.size() - 1);
    return {std::move(labels), std::move(probs)};
  }

  const std::vector<Point>& labels() const noexcept { return labels_; }
  const std::vector<double>& probs() const noexcept { return probs_; }
  std::size_t size() const noexcept { return labels_.size(); }
  PointKind kind() const { return kind_of(labels_.front()); }

  double mass(const Point& x) const {
    for (std::size_t i = 0; i < labels_.size(); ++i)
      if (labels_[i] == x) return probs_[i];
    return 0.0;
  }

 private:
  std::vector<Point> labels_;
  std::vector<double> probs_;
};

/// Handle to a base measure P_0: a sampler plus, where defined, its
/// distribution function and point masses. Immutable and cheap to copy.
class BaseMeasure {
 public:
  struct Impl {
    virtual ~Impl() = default;
    virtual Point sample(RandomSource& rng) const = 0;
    virtual double cdf(double t) const = 0;
    virtual double mass(const Point& x) const = 0;
    virtual bool diffuse() const = 0;
    virtual std::optional<std::vector<Point>> support() const = 0;
    virtual PointKind kind() const = 0;
    virtual std::size_t dimension() const { return 1; }
    virtual std::string describe() const = 0;
  };

  BaseMeasure() = default;
  explicit BaseMeasure(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

  static BaseMeasure uniform(double a, double b);
  static BaseMeasure normal(double mean, double sd);
  static BaseMeasure discrete(DiscreteDistribution d);
  static BaseMeasure tags();
  static BaseMeasure mixture(std::vector<std::pair<double, BaseMeasure>> components);

  /// Uniform on the categorical labels 0..k-1.
  static BaseMeasure uniform_labels(std::int64_t k) {
    return discrete(DiscreteDistribution::uniform(labels(k)));
  }

  explicit operator bool() const noexcept { return static_cast<bool>(impl_); }

  Point sample(RandomSource& rng) const { return get().sample(rng); }
  double cdf(double t) const { return get().cdf(t); }
  double mass(const Point& x) const { return get().mass(x); }
  bool diffuse() const { return get().diffuse(); }
  std::optional<std::vector<Point>> support() const { return get().support(); }
  PointKind kind() const { return get().kind(); }
  std::size_t dimension() const { return get().dimension(); }
  std::string describe() const { return impl_ ? impl_->describe() : std::string("none"); }

  SampleSpace space() const { return SampleSpace{kind(), dimension(), support()}; }

  friend bool operator==(const BaseMeasure& a, const BaseMeasure& b) {
    return a.impl_ == b.impl_ || (a.impl_ && b.impl_ && a.describe() == b.describe());
  }

 private:
  const Impl& get() const {
    if (!impl_) throw ConfigError("base measure not set");
    return *impl_;
  }
  std::shared_ptr<const Impl> impl_;
};

namespace detail {

class UniformBase final : public BaseMeasure::Impl {
 public:
  UniformBase(double a, double b) : a_(a), b_(b) {
    if (!(a < b)) throw ConfigError("uniform base: need a < b");
  }
  Point sample(RandomSource& rng) const override { return rng.uniform(a_, b_); }
  double cdf(double t) const override {
    if (t <= a_) return 0.0;
    if (t >= b_) return 1.0;
    return (t - a_) / (b_ - a_);
  }
  double mass(const Point&) const override { return 0.0; }
  bool diffuse() const override { return true; }
  std::optional<std::vector<Point>> support() const override { return std::nullopt; }
  PointKind kind() const override { return PointKind::real; }
  std::string describe() const override {
    std::ostringstream os;
    os.precision(17);
    os << "uniform:" << a_ << ":" << b_;
    return os.str();
  }

 private:
  double a_, b_;
};

class NormalBase final : public BaseMeasure::Impl {
 public:
  NormalBase(double mean, double sd) : mean_(mean), sd_(sd) {
    if (!(sd > 0.0)) throw ConfigError("normal base: sd must be > 0");
  }
  Point sample(RandomSource& rng) const override { return rng.normal(mean_, sd_); }
  double cdf(double t) const override { return normal_cdf((t - mean_) / sd_); }
  double mass(const Point&) const override { return 0.0; }
  bool diffuse() const override { return true; }
  std::optional<std::vector<Point>> support() const override { return std::nullopt; }
  PointKind kind() const override { return PointKind::real; }
  std::string describe() const override {
    std::ostringstream os;
    os.precision(17);
    os << "normal:" << mean_ << ":" << sd_;
    return os.str();
  }

 private:
  double mean_, sd_;
};

class DiscreteBase final : public BaseMeasure::Impl {
 public:
  explicit DiscreteBase(DiscreteDistribution d) : d_(std::move(d)) {
    if (d_.size() == 0) throw ConfigError("discrete base: empty");
  }
  Point sample(RandomSource& rng) const override {
    return d_.labels()[rng.categorical(d_.probs())];
  }
  double cdf(double t) const override {
    double s = 0.0;
    for (std::size_t i = 0; i < d_.size(); ++i)
      if (scalar_value(d_.labels()[i]) <= t) s += d_.probs()[i];
    return std::min(s, 1.0);
  }
  double mass(const Point& x) const override { return d_.mass(x); }
  bool diffuse() const override { return false; }
  std::optional<std::vector<Point>> support() const override { return d_.labels(); }
  PointKind kind() const override { return d_.kind(); }
  std::size_t dimension() const override {
    if (auto* v = std::get_if<RealVector>(&d_.labels().front())) return v->size();
    return 1;
  }
  std::string describe() const override {
    std::ostringstream os;
    os.precision(17);
    os << "discrete:";
    for (std::size_t i = 0; i < d_.size(); ++i)
      os << (i ? "," : "") << predictive::describe(d_.labels()[i]) << "=" << d_.probs()[i];
    return os.str();
  }

 private:
  DiscreteDistribution d_;
};

class TagBase final : public BaseMeasure::Impl {
 public:
  Point sample(RandomSource& rng) const override { return rng.next_tag(); }
  double cdf(double) const override {
    throw UnsupportedOperation("distribution function undefined on tag points");
  }
  double mass(const Point&) const override { return 0.0; }
  bool diffuse() const override { return true; }
  std::optional<std::vector<Point>> support() const override { return std::nullopt; }
  PointKind kind() const override { return PointKind::tag; }
  std::string describe() const override { return "tags"; }
};

class MixtureBase final : public BaseMeasure::Impl {
 public:
  explicit MixtureBase(std::vector<std::pair<double, BaseMeasure>> comps) : comps_(std::move(comps)) {
    if (comps_.empty()) throw ConfigError("mixture base: no components");
    for (const auto& [w, b] : comps_) {
      if (!b) throw ConfigError("mixture base: empty component");
      if (b.kind() != comps_.front().second.kind()) throw ConfigError("mixture base: mixed point kinds");
      weights_.push_back(w);
    }
    check_probability_vector(weights_, 0.0, "mixture base");
  }
  Point sample(RandomSource& rng) const override {
    return comps_[rng.categorical(weights_)].second.sample(rng);
  }
  double cdf(double t) const override {
    double s = 0.0;
    for (const auto& [w, b] : comps_) s += w * b.cdf(t);
    return s;
  }
  double mass(const Point& x) const override {
    double s = 0.0;
    for (const auto& [w, b] : comps_) s += w * b.mass(x);
    return s;
  }
  bool diffuse() const override {
    return std::all_of(comps_.begin(), comps_.end(), [](const auto& c) { return c.second.diffuse(); });
  }
  std::optional<std::vector<Point>> support() const override {
    std::vector<Point> out;
    for (const auto& [w, b] : comps_) {
      auto s = b.support();
      if (!s) return std::nullopt;
      for (auto& p : *s)
        if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(std::move(p));
    }
    return out;
  }
  PointKind kind() const override { return comps_.front().second.kind(); }
  std::size_t dimension() const override { return comps_.front().second.dimension(); }
  std::string describe() const override {
    std::ostringstream os;
    os.precision(17);
    os << "mixture(";
    for (std::size_t i = 0; i < comps_.size(); ++i)
      os << (i ? ";" : "") << comps_[i].first << "*" << comps_[i].second.describe();
    os << ")";
    return os.str();
  }

 private:
  std::vector<std::pair<double, BaseMeasure>> comps_;
  std::vector<double> weights_;
};

}  // namespace detail

inline BaseMeasure BaseMeasure::uniform(double a, double b) {
  return BaseMeasure(std::make_shared<detail::UniformBase>(a, b));
}
inline BaseMeasure BaseMeasure::normal(double mean, double sd) {
  return BaseMeasure(std::make_shared<detail::NormalBase>(mean, sd));
}
inline BaseMeasure BaseMeasure::discrete(DiscreteDistribution d) {
  return BaseMeasure(std::make_shared<detail::DiscreteBase>(std::move(d)));
}
inline BaseMeasure BaseMeasure::tags() {
  static const auto impl = std::make_shared<detail::TagBase>();
  return BaseMeasure(impl);
}
inline BaseMeasure BaseMeasure::mixture(std::vector<std::pair<double, BaseMeasure>> components) {
  if (components.size() == 1) return components.front().second;
  return BaseMeasure(std::make_shared<detail::MixtureBase>(std::move(components)));
}

/// Weighted atoms plus a weighted base component:
///   sum_j w_j delta_{a_j} + diffuse_weight * base.
/// Atoms are kept sorted and distinct; coinciding atoms are merged.
class AtomicMixture {
 public:
  using Atom = std::pair<Point, double>;

  AtomicMixture() = default;

  AtomicMixture(std::vector<Atom> atoms, double diffuse_weight, BaseMeasure base = {})
      : atoms_(std::move(atoms)), diffuse_weight_(diffuse_weight), base_(std::move(base)) {
    if (diffuse_weight_ > 0.0 && !base_) throw ConfigError("atomic mixture: diffuse weight without base");
    std::sort(atoms_.begin(), atoms_.end(),
              [](const Atom& a, const Atom& b) { return a.first < b.first; });
    std::vector<Atom> merged;
    merged.reserve(atoms_.size());
    for (auto& a : atoms_) {
      if (!merged.empty() && merged.back().first == a.first)
        merged.back().second += a.second;
      else
        merged.push_back(std::move(a));
    }
    atoms_ = std::move(merged);
    std::vector<double> w;
    w.reserve(atoms_.size());
    for (const auto& a : atoms_) w.push_back(a.second);
    detail::check_probability_vector(w, diffuse_weight_, "atomic mixture");
    if (!atoms_.empty()) {
      const PointKind k = kind_of(atoms_.front().first);
      for (const auto& a : atoms_)
        if (kind_of(a.first) != k) throw ConfigError("atomic mixture: mixed point kinds");
      if (base_ && base_.kind() != k) throw ConfigError("atomic mixture: atom kind differs from base");
    }
  }

  static AtomicMixture point_mass(Point x) { return AtomicMixture({{std::move(x), 1.0}}, 0.0); }
  static AtomicMixture from_base(BaseMeasure base) { return AtomicMixture({}, 1.0, std::move(base)); }

  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  double diffuse_weight() const noexcept { return diffuse_weight_; }
  const BaseMeasure& base() const noexcept { return base_; }

  PointKind kind() const {
    if (!atoms_.empty()) return kind_of(atoms_.front().first);
    return base_.kind();
  }

  /// P({x}).
  double mass(const Point& x) const {
    double m = 0.0;
    auto it = std::lower_bound(atoms_.begin(), atoms_.end(), x,
                               [](const Atom& a, const Point& p) { return a.first < p; });
    if (it != atoms_.end() && it->first == x) m += it->second;
    if (diffuse_weight_ > 0.0) m += diffuse_weight_ * base_.mass(x);
    return m;
  }

 private:
  std::vector<Atom> atoms_;
  double diffuse_weight_ = 0.0;
  BaseMeasure base_;
};

inline Point sample(const DiscreteDistribution& d, RandomSource& rng) {
  return d.labels()[rng.categorical(d.probs())];
}

/// One draw. Fresh base draws from a tag base receive new unique tags.
inline Point sample(const AtomicMixture& m, RandomSource& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (const auto& [x, w] : m.atoms()) {
    acc += w;
    if (u < acc) return x;
  }
  if (m.diffuse_weight() > 0.0) return m.base().sample(rng);
  // Round-off: u landed in the last ulp of a purely atomic measure.
  return m.atoms().back().first;
}

/// P((-inf, t]).
inline double eval_cdf(const AtomicMixture& m, double t) {
  if (!is_scalar(m.kind()))
    throw UnsupportedOperation(std::string("eval_cdf on ") + to_string(m.kind()) + " space");
  double s = 0.0;
  for (const auto& [x, w] : m.atoms())
    if (scalar_value(x) <= t) s += w;
  if (m.diffuse_weight() > 0.0) s += m.diffuse_weight() * m.base().cdf(t);
  return std::clamp(s, 0.0, 1.0);
}

inline double eval_cdf(const DiscreteDistribution& d, double t) {
  if (!is_scalar(d.kind()))
    throw UnsupportedOperation(std::string("eval_cdf on ") + to_string(d.kind()) + " space");
  double s = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (scalar_value(d.labels()[i]) <= t) s += d.probs()[i];
  return std::clamp(s, 0.0, 1.0);
}

/// w * a + (1 - w) * b.
inline AtomicMixture mix(const AtomicMixture& a, const AtomicMixture& b, double w) {
  if (!(w >= 0.0 && w <= 1.0)) throw ConfigError("mix: weight outside [0,1]");
  if (w == 1.0) return a;
  if (w == 0.0) return b;
  if (a.kind() != b.kind()) throw ConfigError("mix: mismatched sample spaces");
  std::vector<AtomicMixture::Atom> atoms;
  atoms.reserve(a.atoms().size() + b.atoms().size());
  for (const auto& [x, p] : a.atoms()) atoms.emplace_back(x, w * p);
  for (const auto& [x, p] : b.atoms()) atoms.emplace_back(x, (1.0 - w) * p);
  const double da = w * a.diffuse_weight();
  const double db = (1.0 - w) * b.diffuse_weight();
  BaseMeasure base;
  if (da > 0.0 && db > 0.0) {
    base = (a.base() == b.base())
               ? a.base()
               : BaseMeasure::mixture({{da / (da + db), a.base()}, {db / (da + db), b.base()}});
  } else if (da > 0.0) {
    base = a.base();
  } else if (db > 0.0) {
    base = b.base();
  }
  return AtomicMixture(std::move(atoms), da + db, std::move(base));
}

/// Flattens a measure on a finite space to a DiscreteDistribution over `support`.
inline DiscreteDistribution to_discrete(const AtomicMixture& m, const std::vector<Point>& support) {
  std::vector<double> probs;
  probs.reserve(support.size());
  for (const auto& x : support) probs.push_back(m.mass(x));
  return DiscreteDistribution(support, std::move(probs));
}

}  // namespace predictive
