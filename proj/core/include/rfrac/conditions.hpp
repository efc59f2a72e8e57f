#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rfrac/dyadic.hpp"
#include "rfrac/measures.hpp"
#include "rfrac/operators.hpp"

namespace rfrac {

struct Witness {
  ProductRect rect;
  std::optional<int> factor;          // j, 0-based
  std::optional<DyadicCube> child;    // Q in D^(1)(P_j(R))
};

/// Extremal value of a structural constant over the lattice family of a
/// given depth. All constants are sups/infs over standard product cubes
/// only, so they are lower (resp. upper) estimates of the continuous ones.
struct ConstantReport {
  std::string name;
  double value = 0.0;
  bool infinite = false;
  std::optional<Witness> witness;
  std::size_t family_size = 0;  // tuples scanned
  int depth = 0;
  /// Extremum restricted to each factor j (doubling / reverse doubling).
  std::vector<double> per_factor;
  /// Bound on the part of the series cut off by the depth, when known.
  std::optional<double> tail_bound;
  nlohmann::json params = nlohmann::json::object();
};

/// delta = max sigma(R) / sigma(<R;Q,j>). Infinite (with witness) when a
/// child has zero mass under a parent of positive mass; 0/0 is skipped.
ConstantReport doubling_constant(const Weight& weight);

/// gamma = min sigma(R) / sigma(<R;Q,j>) over the same tuples; pairs with a
/// zero child are skipped.
ConstantReport reverse_doubling_constant(const Weight& weight);

/// max_{R,j} sum_{Q in D(P_j R), level <= depth} sigma(<R;Q,j>)^(1+eps) / sigma(R)^(1+eps).
/// `reverse_doubling`, when given, fills the tail bound of the truncated series.
ConstantReport condition_d_constant(const Weight& weight, double eps,
                                    std::optional<double> reverse_doubling = std::nullopt);

/// max_R K(R) prod_k sigma_k(R)^(1/p_k').
ConstantReport fp_constant(const Kernel& kernel, std::span<const Weight* const> weights,
                           std::span<const double> exponents);

/// max_{R,j} sum_{Q in D(P_j R)} sigma(<R;Q,j>)^(q/p) / sigma(R)^(q/p), 1 < p < q.
ConstantReport carleson_testing_constant(const Weight& weight, double p, double q);

/// sum_{k=0}^{levels} gamma^(-k eps).
double reverse_doubling_series(double gamma, double eps, int levels);

}  // namespace rfrac
