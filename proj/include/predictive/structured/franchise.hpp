#pragma once

#include <utility>
#include <vector>

#include "predictive/structured/oracle.hpp"

namespace predictive {

struct Restaurant {
  double alpha = 1.0;
  std::vector<std::size_t> table_sizes;
  std::vector<Point> table_colors;
  std::size_t customers = 0;
};

/// Hierarchical Chinese restaurant process: one Hoppe urn per restaurant,
/// new tables painted by a shared oracle urn.
struct FranchiseState {
  std::vector<Restaurant> restaurants;
  OracleUrn oracle;
};

struct FranchiseDraw {
  FranchiseState state;
  Point color;
  std::size_t table = 0;
  bool new_table = false;
};

inline FranchiseState make_franchise(const std::vector<double>& alphas, double gamma, BaseMeasure base) {
  if (alphas.empty()) throw ConfigError("franchise: at least one restaurant required");
  FranchiseState s{{}, make_oracle(gamma, std::move(base))};
  for (double a : alphas) {
    if (!(a > 0.0)) throw ConfigError("franchise: alpha_j must be > 0");
    s.restaurants.push_back(Restaurant{a, {}, {}, 0});
  }
  return s;
}

/// Seats the next customer of restaurant j and returns the colour of their table.
inline FranchiseDraw franchise_next(FranchiseState s, std::size_t j, RandomSource& rng) {
  if (j >= s.restaurants.size()) throw ConfigError("franchise: restaurant " + std::to_string(j) + " not configured");
  Restaurant& r = s.restaurants[j];
  const double n = static_cast<double>(r.customers);
  FranchiseDraw out;
  if (rng.uniform() * (r.alpha + n) < r.alpha) {
    out.color = oracle_draw(s.oracle, rng);
    out.table = r.table_sizes.size();
    out.new_table = true;
    r.table_sizes.push_back(1);
    r.table_colors.push_back(out.color);
  } else {
    std::size_t pick = rng.index(r.customers);
    std::size_t t = 0;
    while (pick >= r.table_sizes[t]) pick -= r.table_sizes[t++];
    ++r.table_sizes[t];
    out.table = t;
    out.color = r.table_colors[t];
  }
  ++r.customers;
  out.state = std::move(s);
  return out;
}

}  // namespace predictive
