#pragma once

#include <compare>
#include <cstdint>
#include <vector>

#include "rfrac/grid.hpp"

namespace rfrac {

/// Exact number num / (3 * 2^exp).
struct ExactCoord {
  std::int64_t num = 0;
  int exp = 0;

  double value() const noexcept;
  friend std::strong_ordering operator<=>(const ExactCoord& a, const ExactCoord& b);
  friend bool operator==(const ExactCoord& a, const ExactCoord& b) {
    return (a <=> b) == std::strong_ordering::equal;
  }
};

/// The cube 2^-k (m + tau + [0,1)^d) with tau in {0, +1/3, -1/3}^d.
///
/// `shift` stores tau in thirds (0, +1, -1). Shifted grids alternate under
/// subdivision: the dyadic halves of a tau-cube at level k are (-tau)-cubes at
/// level k+1, so children() and parent() flip every nonzero shift component.
class DyadicCube {
 public:
  DyadicCube(int level, std::vector<std::int64_t> index, std::vector<int> shift = {});

  /// [0,1)^d.
  static DyadicCube unit(int dim) { return DyadicCube(0, std::vector<std::int64_t>(static_cast<std::size_t>(dim), 0)); }

  int dim() const noexcept { return static_cast<int>(index_.size()); }
  int level() const noexcept { return level_; }
  const std::vector<std::int64_t>& index() const noexcept { return index_; }
  const std::vector<int>& shift() const noexcept { return shift_; }
  bool is_standard() const noexcept;

  /// Lower corner numerator along `axis` in units 1/(3 * 2^level).
  std::int64_t lower_num(int axis) const { return 3 * index_[static_cast<std::size_t>(axis)] + shift_[static_cast<std::size_t>(axis)]; }
  ExactCoord lower(int axis) const { return {lower_num(axis), level_}; }
  ExactCoord upper(int axis) const { return {lower_num(axis) + 3, level_}; }
  /// Side length 2^-level.
  ExactCoord side() const { return {3, level_}; }

  /// The 2^d halves, ordered lexicographically by per-axis offset.
  /// Throws EnumerationBoundError when level() + 1 > max_level.
  std::vector<DyadicCube> children(int max_level = kMaxDepth) const;
  DyadicCube parent() const;

  bool contains(const Point& p) const;
  /// p in 3Q (same center, three times the side).
  bool triple_contains(const Point& p) const;
  /// this is a subset of other (half-open boxes, exact).
  bool subset_of(const DyadicCube& other) const;

  /// Corners as a box; exact when level() <= resolution, else refined.
  Box box(int resolution) const;
  Box triple_box(int resolution) const;

  friend auto operator<=>(const DyadicCube&, const DyadicCube&) = default;

 private:
  int level_;
  std::vector<std::int64_t> index_;
  std::vector<int> shift_;
};

/// Product of one cube per factor.
class ProductRect {
 public:
  ProductRect() = default;
  explicit ProductRect(std::vector<DyadicCube> factors);

  int factors() const noexcept { return static_cast<int>(factors_.size()); }
  const DyadicCube& factor(int j) const { return factors_.at(static_cast<std::size_t>(j)); }
  const std::vector<DyadicCube>& cubes() const noexcept { return factors_; }
  std::vector<int> levels() const;
  int total_dim() const noexcept;
  bool is_standard() const noexcept;

  bool contains(const Point& p) const;
  bool triple_contains(const Point& p) const;
  Box box(int resolution) const;
  Box triple_box(int resolution) const;

  friend auto operator<=>(const ProductRect&, const ProductRect&) = default;

 private:
  std::vector<DyadicCube> factors_;
};

/// <R; Q, j>: R with its j-th factor replaced by Q (j is 0-based).
ProductRect replace(const ProductRect& rect, const DyadicCube& cube, int j);

/// 3Q and 3R as boxes in units 1/(3 * 2^resolution).
Box triple(const DyadicCube& cube, int resolution);
Box triple(const ProductRect& rect, int resolution);

/// Q(u, v): the smallest standard dyadic cube Q with u in Q and v in 3Q.
/// Both points must lie in [0,1)^d. Throws DegeneratePairError when u == v.
DyadicCube minimal_cube(const Point& u, const Point& v);

/// R(x, y): the closed axis-parallel box spanned by x and y (stored as
/// [min, max]). Throws DegeneratePairError when any coordinate coincides.
Box min_rect(const Point& x, const Point& y);

/// R_0(x, y) = prod_i Q(x_i, y_i) over the factors of `config`.
ProductRect product_minimal(const GridConfig& config, const Point& x, const Point& y);

struct ShiftCover {
  std::vector<int> tau;  // thirds, per axis
  DyadicCube cover;
};

/// For a standard cube Q, a shift tau in {0, +-1/3}^d and a tau-cube P with
/// 3Q subset of P and side(P) = 8 side(Q). Built axis by axis: 3Q is covered
/// by one or two standard intervals of side 8 side(Q); with two, P is the one
/// holding the larger part of 3Q moved by 8/3 side(Q) toward the other.
ShiftCover shift_cover(const DyadicCube& cube);

/// Whether every coordinate of x and y differs.
bool coordinate_distinct(const Point& x, const Point& y);

}  // namespace rfrac
