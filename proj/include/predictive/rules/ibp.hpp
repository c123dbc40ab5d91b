#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "predictive/error.hpp"
#include "predictive/random.hpp"

namespace predictive {

/// Indian buffet: customers so far and how many of them took each dish.
struct IbpState {
  double theta = 1.0;
  std::size_t n = 0;
  std::vector<std::pair<std::uint64_t, std::size_t>> dish_counts;  // (dish id, k_{z,n})
  std::uint64_t dishes_created = 0;
};

struct IbpStep {
  IbpState state;
  std::vector<std::uint64_t> dishes;  // dishes taken by the new customer
  std::size_t new_dishes = 0;
};

inline IbpState make_ibp(double theta) {
  if (!(theta > 0.0)) throw ConfigError("ibp: theta must be > 0");
  return IbpState{theta, 0, {}, 0};
}

/// Customer n+1 takes dish z with probability k_{z,n}/(n+1), independently,
/// then Poisson(theta/(n+1)) new dishes.
inline IbpStep ibp_next(IbpState s, RandomSource& rng) {
  if (!(s.theta > 0.0)) throw ConfigError("ibp: theta must be > 0");
  IbpStep out;
  const double denom = static_cast<double>(s.n + 1);
  for (auto& [id, count] : s.dish_counts) {
    if (rng.uniform() * denom < static_cast<double>(count)) {
      ++count;
      out.dishes.push_back(id);
    }
  }
  out.new_dishes = static_cast<std::size_t>(rng.poisson(s.theta / denom));
  for (std::size_t i = 0; i < out.new_dishes; ++i) {
    const std::uint64_t id = s.dishes_created++;
    s.dish_counts.emplace_back(id, 1);
    out.dishes.push_back(id);
  }
  ++s.n;
  out.state = std::move(s);
  return out;
}

}  // namespace predictive
