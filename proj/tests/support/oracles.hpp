#pragma once

// Independent reference computations used as test oracles. Nothing here calls
// into the library under test.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <vector>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

namespace oracle {

/// Conjugate Dirichlet-multinomial predictive (a_j + n_j) / (sum a + n), a_j = alpha p0_j.
inline std::vector<double> dirichlet_predictive(double alpha, const std::vector<double>& p0,
                                                const std::vector<int>& data) {
  std::vector<double> counts(p0.size(), 0.0);
  for (int x : data) counts[static_cast<std::size_t>(x)] += 1.0;
  std::vector<double> out(p0.size());
  const double denom = alpha + static_cast<double>(data.size());
  for (std::size_t j = 0; j < p0.size(); ++j) out[j] = (alpha * p0[j] + counts[j]) / denom;
  return out;
}

/// Dirichlet-multinomial sequence probability: prod_j (a_j)^{[n_j]} / alpha^{[n]}.
inline double dirichlet_sequence_prob(double alpha, const std::vector<double>& p0, const std::vector<int>& seq) {
  std::vector<int> counts(p0.size(), 0);
  for (int x : seq) ++counts[static_cast<std::size_t>(x)];
  double lp = std::lgamma(alpha) - std::lgamma(alpha + static_cast<double>(seq.size()));
  for (std::size_t j = 0; j < p0.size(); ++j) {
    const double a = alpha * p0[j];
    if (counts[j] == 0) continue;
    if (a == 0.0) return 0.0;
    lp += std::lgamma(a + counts[j]) - std::lgamma(a);
  }
  return std::exp(lp);
}

inline double beta_cdf(double a, double b, double x) {
  return boost::math::cdf(boost::math::beta_distribution<double>(a, b), std::clamp(x, 0.0, 1.0));
}

inline double beta_variance(double a, double b) { return a * b / ((a + b) * (a + b) * (a + b + 1.0)); }

inline double normal_cdf(double x) { return boost::math::cdf(boost::math::normal_distribution<double>(), x); }

inline double normal_quantile(double p) {
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

inline double chi2_quantile(double df, double p) {
  return boost::math::quantile(boost::math::chi_squared_distribution<double>(df), p);
}

/// Pearson chi-square homogeneity p-value for a rows x cols table of counts.
/// Columns with no counts are dropped.
inline double chi2_homogeneity_p(const std::vector<std::vector<double>>& table) {
  const std::size_t rows = table.size();
  std::vector<double> row(rows, 0.0), col(table.at(0).size(), 0.0);
  double total = 0.0;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < col.size(); ++c) {
      row[r] += table[r][c];
      col[c] += table[r][c];
      total += table[r][c];
    }
  double stat = 0.0;
  std::size_t used = 0;
  for (std::size_t c = 0; c < col.size(); ++c) {
    if (col[c] == 0.0) continue;
    ++used;
    for (std::size_t r = 0; r < rows; ++r) {
      const double e = row[r] * col[c] / total;
      stat += (table[r][c] - e) * (table[r][c] - e) / e;
    }
  }
  const double df = static_cast<double>((rows - 1) * (used - 1));
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared_distribution<double>(df), stat));
}

/// Two-sided one-sample KS distance.
inline double ks_distance(std::vector<double> xs, const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  const double m = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, static_cast<double>(i + 1) / m - f, f - static_cast<double>(i) / m});
  }
  return d;
}

/// Asymptotic Kolmogorov p-value with Stephens' small-sample correction.
inline double ks_pvalue(double d, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  if (lambda < 0.2) return 1.0;
  double q = 0.0;
  for (int k = 1; k <= 100; ++k) q += 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
  return std::clamp(q, 0.0, 1.0);
}

/// Block-size multisets of all set partitions of {0..n-1}, found by brute force
/// over all labelings {0..n-1} -> {0..n-1} and canonicalizing.
inline std::vector<std::vector<std::size_t>> set_partitions(std::size_t n) {
  std::set<std::vector<std::size_t>> seen;  // canonical labelings
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> f(n, 0);
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= n;
  for (std::uint64_t code = 0; code < total; ++code) {
    std::uint64_t c = code;
    for (std::size_t i = 0; i < n; ++i, c /= n) f[i] = c % n;
    std::map<std::size_t, std::size_t> relabel;
    std::vector<std::size_t> canon(n);
    for (std::size_t i = 0; i < n; ++i) {
      auto it = relabel.try_emplace(f[i], relabel.size()).first;
      canon[i] = it->second;
    }
    if (!seen.insert(canon).second) continue;
    std::vector<std::size_t> sizes(relabel.size(), 0);
    for (auto b : canon) ++sizes[b];
    out.push_back(sizes);
  }
  return out;
}

inline std::size_t bell(std::size_t n) {
  static const std::size_t b[] = {1, 1, 2, 5, 15, 52, 203, 877, 4140};
  return b[n];
}

/// Probability of a partition with the given block sizes (in order of first
/// appearance) under Pitman-Yor(alpha, theta), as a product of sequential
/// seating probabilities along the canonical order.
inline double py_sequential(const std::vector<std::size_t>& sizes, double alpha, double theta) {
  // Seat customers block by block: the order within the sequence does not
  // matter for the product, so seat block 1 fully, then block 2, ...
  double p = 1.0;
  std::vector<double> seated;
  double n = 0.0;
  for (std::size_t j = 0; j < sizes.size(); ++j) {
    const double k = static_cast<double>(seated.size());
    p *= n == 0.0 ? 1.0 : (alpha + k * theta) / (alpha + n);
    seated.push_back(1.0);
    n += 1.0;
    for (std::size_t r = 1; r < sizes[j]; ++r) {
      p *= (seated.back() - theta) / (alpha + n);
      seated.back() += 1.0;
      n += 1.0;
    }
  }
  return p;
}

/// Same product, visiting customers in an arbitrary given label order.
inline double py_sequential_labels(const std::vector<std::size_t>& labels, double alpha, double theta) {
  std::map<std::size_t, double> sizes;
  double p = 1.0, n = 0.0;
  for (auto b : labels) {
    auto it = sizes.find(b);
    if (it == sizes.end()) {
      p *= n == 0.0 ? 1.0 : (alpha + static_cast<double>(sizes.size()) * theta) / (alpha + n);
      sizes[b] = 1.0;
    } else {
      p *= (it->second - theta) / (alpha + n);
      it->second += 1.0;
    }
    n += 1.0;
  }
  return p;
}

inline std::size_t factorial(std::size_t n) { return n <= 1 ? 1 : n * factorial(n - 1); }

}  // namespace oracle
