#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "rfrac/family.hpp"
#include "rfrac/measures.hpp"

namespace rfrac {

/// Exponent bookkeeping: alpha, p, q for the fractional operators, or the
/// p_k of an M-linear form.
class ExponentConfig {
 public:
  /// Requires 0 < alpha < N, 1 < p < q < inf and 1/q = 1/p - alpha/N (1e-12).
  static ExponentConfig hls(int total_dim, double alpha, double p, double q);
  /// q from the relation 1/q = 1/p - alpha/N.
  static ExponentConfig hls_from_p(int total_dim, double alpha, double p);
  /// Requires every p_k in (1, inf) and sum 1/p_k >= 1.
  static ExponentConfig mlinear(std::vector<double> exponents);

  double alpha() const noexcept { return alpha_; }
  double p() const noexcept { return p_; }
  double q() const noexcept { return q_; }
  int total_dim() const noexcept { return total_dim_; }
  /// alpha/N - 1, the power of mu(R) in the fractional kernels.
  double kernel_power() const noexcept { return alpha_ / total_dim_ - 1.0; }
  const std::vector<double>& exponents() const noexcept { return exponents_; }

 private:
  double alpha_ = 0.0;
  double p_ = 0.0;
  double q_ = 0.0;
  int total_dim_ = 1;
  std::vector<double> exponents_;
};

inline double conjugate(double p) { return p / (p - 1.0); }

/// Nonnegative map on the standard family of a grid.
class Kernel {
 public:
  Kernel(std::shared_ptr<const RectFamily> family, std::vector<double> values);

  static Kernel zero(const GridConfig& config);
  static Kernel indicator(const GridConfig& config, const ProductRect& rect, double value = 1.0);
  static Kernel from_function(const GridConfig& config, const std::function<double(const ProductRect&)>& fn);
  /// mu(R)^(alpha/N - 1); rects of zero mass get 0.
  static Kernel fractional(const Weight& mu, double alpha);
  /// u_R uniform in [0,1), keyed by (seed, levels, indices) so that a rect
  /// gets the same value at every depth.
  static Kernel random_uniform(const GridConfig& config, std::uint64_t seed);
  /// u_R * prod_k sigma_k(R)^(-1/p_k'), u_R uniform in [0,1] keyed by
  /// (seed, levels, indices); its Fefferman-Phong constant is max u_R.
  static Kernel random_balanced(std::span<const Weight* const> weights, std::span<const double> exponents,
                                std::uint64_t seed);

  const RectFamily& family() const noexcept { return *family_; }
  std::shared_ptr<const RectFamily> family_ptr() const noexcept { return family_; }
  std::span<const double> values() const noexcept { return values_; }
  double operator()(const ProductRect& rect) const;

 private:
  std::shared_ptr<const RectFamily> family_;
  std::vector<double> values_;
};

struct OperatorDiagnostics {
  std::size_t skipped_terms = 0;   // zero-mass rects with nonzero companion integral
  std::size_t excluded_pairs = 0;  // kernel form: coordinate-sharing cell pairs
  double excluded_mass = 0.0;      // kernel form: f dmu mass of excluded pairs
  int truncation_depth = 0;
};

struct OperatorResult {
  GridFunction values;
  OperatorDiagnostics diagnostics;
};

/// sum_R K(R) prod_k |int_R f_k dsigma_k|.
double mlinear_form(const Kernel& kernel, std::span<const Weight* const> weights,
                    std::span<const GridFunction* const> functions);

/// T_K^sigma f = sum_R K(R) 1_R int_R f dsigma.
GridFunction apply_positive(const Kernel& kernel, const Weight& sigma, const GridFunction& f);

/// T_alpha^{mu,tau} f: the fractional kernel summed over the tau-shifted family.
OperatorResult apply_frac_dyadic(const Weight& mu, double alpha, const GridFunction& f,
                                 const std::vector<int>& tau = {});

/// Cell-center quadrature of int mu(R(x,y))^(alpha/N-1) f(y) dmu(y); y cells
/// sharing any axis index with x are excluded.
OperatorResult apply_frac_kernel(const Weight& mu, double alpha, const GridFunction& f);

/// sum_R mu(R)^(alpha/N-1) 1_R int_{3R} f dmu over the standard family.
OperatorResult apply_perez(const Weight& mu, double alpha, const GridFunction& f);

/// mu(R(x,y))^(alpha/N-1).
double kernel_value(const Weight& mu, double alpha, const Point& x, const Point& y);

/// sum over standard R in the family with x in R and y in 3R of mu(R)^(alpha/N-1).
double kernel_sum(const Weight& mu, double alpha, const Point& x, const Point& y);

struct ShiftBound {
  double ratio = 0.0;
  bool infinite = false;
  std::size_t witness_cell = 0;
  std::size_t cells_compared = 0;
};

/// max over cells of apply_perez / sum_tau apply_frac_dyadic(tau).
ShiftBound shift_bound_ratio(const Weight& mu, double alpha, const GridFunction& f);

/// T_alpha^{mu,tau} with its family and kernel values cached for repeated use.
/// apply() takes f * cell mass (the cell masses of f dmu).
class DyadicFracOperator {
 public:
  DyadicFracOperator(const Weight& mu, double alpha, const std::vector<int>& tau = {});

  std::vector<double> apply(std::span<const double> weighted, OperatorDiagnostics* diagnostics = nullptr) const;
  const RectFamily& family() const noexcept { return *family_; }
  std::span<const double> kernel() const noexcept { return kernel_; }
  std::span<const double> masses() const noexcept { return masses_; }

 private:
  std::shared_ptr<const RectFamily> family_;
  std::vector<double> masses_;
  std::vector<double> kernel_;
};

/// Dense cell-pair matrix of the kernel form, reusable across applications.
class KernelForm {
 public:
  KernelForm(const Weight& mu, double alpha);

  /// (R f)(x) for every cell x.
  std::vector<double> apply(std::span<const double> f) const;
  const OperatorDiagnostics& diagnostics() const noexcept { return diagnostics_; }
  std::size_t cells() const noexcept { return cells_; }
  double entry(std::size_t x, std::size_t y) const { return matrix_[x * cells_ + y]; }

 private:
  std::size_t cells_ = 0;
  std::vector<double> matrix_;  // kernel(x,y) * mu(cell y); 0 on excluded pairs
  OperatorDiagnostics diagnostics_;
};

/// Sum of `values` over the 3^N same-level neighbours of every rect (the
/// rect itself included); 3R is the union of those neighbours.
std::vector<double> neighbor_sums(const RectFamily& family, std::span<const double> values);

/// int_{3R} f dmu for every standard rect from per-rect sums and neighbour
/// sums; an independent route to the prefix-table one in apply_perez.
std::vector<double> triple_integrals(const RectFamily& family, std::span<const double> cell_values);
/// Adjoint of triple_integrals: out[cell] = sum of coeffs[R] over R with cell in 3R.
std::vector<double> triple_scatter(const RectFamily& family, std::span<const double> coeffs);

}  // namespace rfrac
