#include "rfrac/conditions.hpp"

#include <cmath>
#include <limits>

#include "rfrac/errors.hpp"

namespace rfrac {
namespace {

ConstantReport base_report(const std::string& name, const Weight& w) {
  ConstantReport r;
  r.name = name;
  r.depth = w.config().depth();
  r.family_size = w.family().size();
  r.per_factor.assign(static_cast<std::size_t>(w.config().factors()), 0.0);
  r.params["dims"] = w.config().dims();
  return r;
}

Witness make_witness(const RectFamily& fam, std::size_t id, int j, std::optional<std::size_t> child_id) {
  Witness wit{fam.rect(id), j, std::nullopt};
  if (child_id) wit.child = fam.rect(*child_id).factor(j);
  return wit;
}

// Scan over (R, j, child) ratios sigma(R) / sigma(<R;Q,j>). `maximize`
// selects doubling (max, infinite on x/0) or reverse doubling (min, x/0 skipped).
ConstantReport halving_scan(const Weight& w, bool maximize) {
  ConstantReport r = base_report(maximize ? "doubling" : "reverse_doubling", w);
  const RectFamily& fam = w.family();
  const int n = w.config().factors();
  const double init = maximize ? 0.0 : std::numeric_limits<double>::infinity();
  std::vector<double> best(static_cast<std::size_t>(n), init);
  std::vector<bool> factor_infinite(static_cast<std::size_t>(n), false);
  double overall = init;
  std::size_t tuples = 0;
  for (std::size_t id = 0; id < fam.size(); ++id) {
    const double parent = w.mass_of_id(id);
    for (int j = 0; j < n; ++j) {
      for (std::size_t c : fam.child_ids(id, j)) {
        ++tuples;
        const double child = w.mass_of_id(c);
        if (child == 0.0) {
          if (!maximize || parent == 0.0) continue;
          if (!factor_infinite[static_cast<std::size_t>(j)]) factor_infinite[static_cast<std::size_t>(j)] = true;
          if (!r.infinite) {
            r.infinite = true;
            r.witness = make_witness(fam, id, j, c);
          }
          continue;
        }
        const double ratio = parent / child;
        auto& b = best[static_cast<std::size_t>(j)];
        if (maximize ? ratio > b : ratio < b) b = ratio;
        if (!r.infinite && (maximize ? ratio > overall : ratio < overall)) {
          overall = ratio;
          r.witness = make_witness(fam, id, j, c);
        }
      }
    }
  }
  r.family_size = tuples;
  for (int j = 0; j < n; ++j) {
    r.per_factor[static_cast<std::size_t>(j)] = factor_infinite[static_cast<std::size_t>(j)]
                                                    ? std::numeric_limits<double>::infinity()
                                                    : best[static_cast<std::size_t>(j)];
  }
  r.value = r.infinite ? std::numeric_limits<double>::infinity() : overall;
  return r;
}

// max over (R, j) of sum_{Q in D(P_j R)} sigma(<R;Q,j>)^s / sigma(R)^s,
// with S_j(R) = sigma(R)^s + sum over j-children of S_j(child).
ConstantReport subtree_power_scan(const Weight& w, double s, const std::string& name) {
  ConstantReport r = base_report(name, w);
  const RectFamily& fam = w.family();
  const int n = w.config().factors();
  const std::size_t size = fam.size();
  std::vector<double> top(size);
  for (std::size_t id = 0; id < size; ++id) top[id] = std::pow(w.mass_of_id(id), s);
  r.value = 0.0;
  std::size_t tuples = 0;
  std::vector<double> sums(size);
  std::vector<double> ratio(size, -1.0);
  for (int j = 0; j < n; ++j) {
    // Children along j sit in later blocks, so a reverse sweep sees them first.
    for (std::size_t id = size; id-- > 0;) {
      double acc = top[id];
      for (std::size_t c : fam.child_ids(id, j)) acc += sums[c];
      sums[id] = acc;
    }
    double& pf = r.per_factor[static_cast<std::size_t>(j)];
    for (std::size_t id = 0; id < size; ++id) {
      if (!(top[id] > 0.0)) continue;
      ++tuples;
      const double v = sums[id] / top[id];
      if (v > pf) pf = v;
      if (v > r.value) {
        r.value = v;
        r.witness = make_witness(fam, id, j, std::nullopt);
      }
    }
  }
  r.family_size = tuples;
  return r;
}

}  // namespace

ConstantReport doubling_constant(const Weight& weight) { return halving_scan(weight, true); }

ConstantReport reverse_doubling_constant(const Weight& weight) { return halving_scan(weight, false); }

ConstantReport condition_d_constant(const Weight& weight, double eps, std::optional<double> reverse_doubling) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw ParameterError("condition (D) needs eps > 0");
  ConstantReport r = subtree_power_scan(weight, 1.0 + eps, "condition_d");
  r.params["eps"] = eps;
  if (reverse_doubling && *reverse_doubling > 1.0) {
    const double g = *reverse_doubling;
    r.params["gamma"] = g;
    r.params["series_bound"] = reverse_doubling_series(g, eps, weight.config().depth());
    // Part of the infinite series beyond the depth for a level-0 rect.
    r.tail_bound = std::pow(g, -(weight.config().depth() + 1) * eps) / (1.0 - std::pow(g, -eps));
  }
  return r;
}

ConstantReport fp_constant(const Kernel& kernel, std::span<const Weight* const> weights,
                           std::span<const double> exponents) {
  const auto cfg = ExponentConfig::mlinear(std::vector<double>(exponents.begin(), exponents.end()));
  if (weights.size() != exponents.size()) throw DimensionMismatchError("need one exponent per weight");
  const RectFamily& fam = kernel.family();
  for (const Weight* w : weights)
    if (!(w->config() == fam.config())) throw DimensionMismatchError("kernel and weights live on different grids");
  std::vector<double> powers;
  for (double p : cfg.exponents()) powers.push_back(1.0 / conjugate(p));

  ConstantReport r;
  r.name = "fefferman_phong";
  r.depth = fam.config().depth();
  r.family_size = fam.size();
  r.params["exponents"] = cfg.exponents();
  r.params["dims"] = fam.config().dims();
  const auto kv = kernel.values();
  for (std::size_t id = 0; id < fam.size(); ++id) {
    if (kv[id] == 0.0) continue;
    double v = kv[id];
    for (std::size_t k = 0; k < weights.size(); ++k) v *= std::pow(weights[k]->mass_of_id(id), powers[k]);
    if (v > r.value) {
      r.value = v;
      r.witness = Witness{fam.rect(id), std::nullopt, std::nullopt};
    }
  }
  return r;
}

ConstantReport carleson_testing_constant(const Weight& weight, double p, double q) {
  if (!(p > 1.0 && q > p && std::isfinite(q))) throw ParameterError("exponents must satisfy 1 < p < q < inf");
  ConstantReport r = subtree_power_scan(weight, q / p, "carleson_testing");
  r.params["p"] = p;
  r.params["q"] = q;
  return r;
}

double reverse_doubling_series(double gamma, double eps, int levels) {
  double s = 0.0;
  for (int k = 0; k <= levels; ++k) s += std::pow(gamma, -k * eps);
  return s;
}

}  // namespace rfrac
