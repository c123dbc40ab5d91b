#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "predictive/engine.hpp"
#include "predictive/measure.hpp"

namespace predictive {

/// One sequence of a weighted (partially c.i.d.) scheme: observations with weights.
struct PcidSequenceState {
  double alpha = 1.0;
  BaseMeasure base;
  std::vector<Point> xs;
  std::vector<double> weights;
};

/// (alpha P_0 + sum_k W_k delta_{X_k}) / (alpha + sum_k W_k).
inline AtomicMixture pcid_predict(const PcidSequenceState& s) {
  if (!(s.alpha > 0.0)) throw ConfigError("pcid: alpha must be > 0");
  if (s.xs.size() != s.weights.size()) throw ConfigError("pcid: observations and weights differ in length");
  if (s.xs.empty()) return AtomicMixture::from_base(s.base);
  std::map<Point, double> mass;
  double total = 0.0;
  for (std::size_t k = 0; k < s.xs.size(); ++k) {
    if (!(s.weights[k] > 0.0))
      throw ConfigError("pcid: weight " + std::to_string(k) + " must be > 0");
    mass[s.xs[k]] += s.weights[k];
    total += s.weights[k];
  }
  const double denom = s.alpha + total;
  std::vector<AtomicMixture::Atom> atoms;
  atoms.reserve(mass.size());
  for (const auto& [x, w] : mass) atoms.emplace_back(x, w / denom);
  return AtomicMixture(std::move(atoms), s.alpha / denom, s.base);
}

using Row = std::vector<Point>;

/// Weight W_{n,j} given to the n-th observation of sequence j, computed from
/// the full row n. Must not look at row[j] for the scheme to be partially c.i.d.
using RowWeight = std::function<double(std::size_t j, const Row& row)>;

struct MultiState {
  std::vector<PcidSequenceState> columns;
  std::size_t n = 0;
};

/// Several sequences observed in lockstep. Given the past, the entries of the
/// next row are drawn independently from their sequence's weighted predictive.
/// A null weight function gives independent Pólya sequences.
class PcidRule {
 public:
  using state_type = MultiState;
  using row_type = Row;

  PcidRule(std::vector<double> alphas, std::vector<BaseMeasure> bases, RowWeight weight = {})
      : alphas_(std::move(alphas)), bases_(std::move(bases)), weight_(std::move(weight)) {
    if (alphas_.empty() || alphas_.size() != bases_.size())
      throw ConfigError("pcid: need one (alpha, base) pair per sequence");
    for (std::size_t j = 0; j < alphas_.size(); ++j) {
      if (!(alphas_[j] > 0.0)) throw ConfigError("pcid: alpha must be > 0");
      if (!bases_[j]) throw ConfigError("pcid: base measure required");
    }
  }

  std::size_t columns() const noexcept { return alphas_.size(); }

  MultiState initial_state() const {
    MultiState s;
    for (std::size_t j = 0; j < columns(); ++j) s.columns.push_back(PcidSequenceState{alphas_[j], bases_[j], {}, {}});
    return s;
  }

  MultiState update(MultiState s, const Row& row) const {
    if (row.size() != columns()) throw ConfigError("pcid: row width differs from the number of sequences");
    for (std::size_t j = 0; j < columns(); ++j) {
      const double w = weight_ ? weight_(j, row) : 1.0;
      if (!(w > 0.0)) throw ConfigError("pcid: weight must be > 0");
      s.columns[j].xs.push_back(row[j]);
      s.columns[j].weights.push_back(w);
    }
    ++s.n;
    return s;
  }

  AtomicMixture predict(const MultiState& s, std::size_t j) const { return pcid_predict(s.columns.at(j)); }

  double column_mass(const MultiState& s, std::size_t j, const Point& x) const { return predict(s, j).mass(x); }

  double row_mass(const MultiState& s, const Row& row) const {
    double p = 1.0;
    for (std::size_t j = 0; j < columns(); ++j) p *= column_mass(s, j, row[j]);
    return p;
  }

  Row draw(const MultiState& s, RandomSource& rng) const {
    Row r;
    for (std::size_t j = 0; j < columns(); ++j) r.push_back(sample(predict(s, j), rng));
    return r;
  }

  std::optional<std::vector<Point>> column_support(std::size_t j) const { return bases_.at(j).support(); }

  std::string name() const { return weight_ ? "pcid" : "independent-polya"; }

 private:
  std::vector<double> alphas_;
  std::vector<BaseMeasure> bases_;
  RowWeight weight_;
};

}  // namespace predictive
