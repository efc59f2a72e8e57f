#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rfrac/dyadic.hpp"
#include "rfrac/family.hpp"
#include "rfrac/grid.hpp"

namespace rfrac {

/// Inclusion-exclusion table over the finest lattice. Cumulative sums are kept
/// in extended precision; queries at non-lattice corners interpolate
/// multilinearly, which is exact for piecewise-constant cell data.
class PrefixTable {
 public:
  PrefixTable() = default;
  PrefixTable(const GridConfig& config, std::span<const double> cell_values);

  /// Sum over box intersected with [0,1)^N.
  long double box_sum(const Box& box) const;

 private:
  std::vector<std::int64_t> lattice_;  // L per axis
  std::vector<std::size_t> strides_;   // over (L+1)^N
  int depth_ = 0;
  std::vector<long double> table_;
};

/// Pairwise (fixed-topology) summation.
double pairwise_sum(std::span<const double> values);

struct WeightMeta {
  std::string kind = "custom";
  std::uint64_t seed = 0;
  nlohmann::json params = nlohmann::json::object();
};

/// Nonnegative piecewise-constant density on the finest lattice of a grid.
///
/// Standard product cubes are answered from a mass tree aligned with the
/// standard RectFamily numbering: the finest block is summed from lattice
/// cells, every coarser block from the block one level finer in its first
/// non-finest factor. Other boxes go through the prefix table.
class Weight {
 public:
  Weight(GridConfig config, std::vector<double> density, WeightMeta meta = {});

  const GridConfig& config() const noexcept { return family_->config(); }
  const RectFamily& family() const noexcept { return *family_; }
  std::shared_ptr<const RectFamily> family_ptr() const noexcept { return family_; }
  const WeightMeta& meta() const noexcept { return meta_; }

  std::span<const double> density() const noexcept { return density_; }
  std::span<const double> cell_masses() const noexcept { return cell_mass_; }
  /// Masses of the standard family, indexed by rect id.
  std::span<const double> tree() const noexcept { return tree_; }

  double mass(const ProductRect& rect) const;
  double mass(const Box& box) const;
  double mass_of_id(std::size_t id) const { return tree_[id]; }
  double total_mass() const noexcept { return tree_.front(); }

 private:
  std::shared_ptr<const RectFamily> family_;
  std::vector<double> density_;
  std::vector<double> cell_mass_;
  std::vector<double> tree_;
  PrefixTable prefix_;
  WeightMeta meta_;
};

/// Nonnegative piecewise-constant function on the finest lattice.
class GridFunction {
 public:
  GridFunction(GridConfig config, std::vector<double> values);
  static GridFunction constant(const GridConfig& config, double value);
  static GridFunction indicator(const GridConfig& config, const ProductRect& rect);

  const GridConfig& config() const noexcept { return config_; }
  std::span<const double> values() const noexcept { return values_; }
  std::vector<double>& mutable_values() noexcept { return values_; }
  double operator[](std::size_t cell) const { return values_[cell]; }

  /// Replicates every cell into 2^N cells of the next depth.
  GridFunction upsample() const;

 private:
  GridConfig config_;
  std::vector<double> values_;
};

/// f * cell mass, the cell masses of f dsigma.
std::vector<double> weighted_cells(const Weight& weight, const GridFunction& f);

/// Integral of f dsigma over R (or a box) intersected with the domain.
double integrate(const Weight& weight, const GridFunction& f, const ProductRect& rect);
double integrate(const Weight& weight, const GridFunction& f, const Box& box);

/// (int f^p dsigma)^(1/p), p in (1, inf).
double lp_norm(const Weight& weight, const GridFunction& f, double p);

Weight gen_uniform(const GridConfig& config);

/// prod_a |t_a - center_a|^exponents_a with exact cell integrals. A single
/// exponent / center is broadcast to all axes. Exponents must exceed -1.
Weight gen_power(const GridConfig& config, std::vector<double> exponents, std::vector<double> center);

/// Tensor product of per-axis dyadic cascades: each interval of level < depth
/// gives fractions (theta, 1 - theta) to its halves, theta uniform in
/// [1/(1+rho), rho/(1+rho)] and keyed by (seed, axis, level, index). rho in (1, 4].
Weight gen_cascade(const GridConfig& config, double rho, std::uint64_t seed);

/// Zeroes the density on one finest cell (degenerate test weights).
Weight with_zero_cell(const Weight& weight, std::size_t cell);

}  // namespace rfrac
