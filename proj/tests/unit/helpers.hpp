#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "rfrac/grid.hpp"
#include "rfrac/measures.hpp"
#include "rfrac/rng.hpp"

namespace testing {

// Nearest point of the unit 1/(3 * 2^res) to x.
inline rfrac::Point approx_point(std::vector<double> xs, int res) {
  rfrac::Point p;
  p.resolution = res;
  const double unit = 3.0 * std::ldexp(1.0, res);
  for (double x : xs) p.coords.push_back(static_cast<std::int64_t>(std::llround(x * unit)));
  return p;
}

inline rfrac::Point random_point(rfrac::Rng& rng, int dim, int res) {
  rfrac::Point p;
  p.resolution = res;
  const auto units = static_cast<std::uint64_t>(3) << res;
  for (int a = 0; a < dim; ++a) p.coords.push_back(static_cast<std::int64_t>(rng.below(units)));
  return p;
}

inline rfrac::GridFunction random_function(const rfrac::GridConfig& config, rfrac::Rng& rng, double lo = 0.0) {
  std::vector<double> v(config.cell_count());
  for (auto& x : v) x = rng.uniform(lo, 1.0);
  return rfrac::GridFunction(config, std::move(v));
}

inline bool rel_close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace testing
