#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace rfrac {

inline constexpr int kMaxDepth = 12;
inline constexpr int kMaxFactorDim = 4;
inline constexpr std::size_t kMaxCells = std::size_t{1} << 24;

/// Product decomposition R^N = R^{N_1} x ... x R^{N_n} truncated to [0,1)^N,
/// with standard dyadic levels 0..depth in every factor.
///
/// The finest lattice has 3 * 2^depth cells per unit axis so that both standard
/// and one-third shifted cubes of level <= depth are unions of lattice cells.
/// Exact coordinates live on the finer unit 1/(3 * 2^(depth+1)), which also
/// makes every cell center an (odd) integer.
class GridConfig {
 public:
  GridConfig(std::vector<int> dims, int depth);

  int factors() const noexcept { return static_cast<int>(dims_.size()); }
  int factor_dim(int factor) const { return dims_.at(static_cast<std::size_t>(factor)); }
  const std::vector<int>& dims() const noexcept { return dims_; }
  int total_dim() const noexcept { return total_dim_; }
  int max_factor_dim() const noexcept;
  int min_factor_dim() const noexcept;
  int depth() const noexcept { return depth_; }

  /// First global axis belonging to `factor`.
  int axis_offset(int factor) const { return offsets_.at(static_cast<std::size_t>(factor)); }
  int factor_of_axis(int axis) const { return axis_factor_.at(static_cast<std::size_t>(axis)); }

  std::int64_t cells_per_axis() const noexcept { return std::int64_t{3} << depth_; }
  /// Exponent r of the global coordinate unit 1/(3 * 2^r).
  int resolution() const noexcept { return depth_ + 1; }
  std::int64_t units_per_axis() const noexcept { return std::int64_t{3} << resolution(); }
  std::size_t cell_count() const noexcept { return cell_count_; }
  double cell_volume() const noexcept { return cell_volume_; }

  /// Row-major strides of the finest lattice (axis 0 slowest).
  const std::vector<std::size_t>& cell_strides() const noexcept { return strides_; }

  /// Same factor layout at another depth.
  GridConfig with_depth(int depth) const { return GridConfig(dims_, depth); }

  bool operator==(const GridConfig& other) const noexcept {
    return dims_ == other.dims_ && depth_ == other.depth_;
  }

 private:
  std::vector<int> dims_;
  int depth_;
  int total_dim_ = 0;
  std::vector<int> offsets_;
  std::vector<int> axis_factor_;
  std::vector<std::size_t> strides_;
  std::size_t cell_count_ = 1;
  double cell_volume_ = 1.0;
};

/// A point with exact coordinates coord[a] / (3 * 2^resolution).
struct Point {
  std::vector<std::int64_t> coords;
  int resolution = 0;

  int dim() const noexcept { return static_cast<int>(coords.size()); }
  /// Axes [offset, offset + count) as a point of their own.
  Point slice(int offset, int count) const;
  bool operator==(const Point&) const = default;
};

/// Point in the global unit of `config`.
Point make_point(const GridConfig& config, std::vector<std::int64_t> coords);

/// Center of finest cell `cell` (multi-index) in the global unit.
Point cell_center(const GridConfig& config, const std::vector<std::int64_t>& cell);

/// Axis-parallel box [lo, hi) with exact corners x / (3 * 2^resolution).
/// Boxes are not clipped; mass queries intersect them with [0,1)^N.
struct Box {
  std::vector<std::int64_t> lo;
  std::vector<std::int64_t> hi;
  int resolution = 0;

  int dim() const noexcept { return static_cast<int>(lo.size()); }
  bool contains(const Point& p) const;
  bool operator==(const Box&) const = default;
};

/// Re-express `box` at a finer (or equal) resolution.
Box refine(const Box& box, int resolution);

/// Cartesian product of boxes (concatenates axes).
Box box_product(const std::vector<Box>& parts);

}  // namespace rfrac
