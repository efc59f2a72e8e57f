#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "rfrac/dyadic.hpp"
#include "rfrac/grid.hpp"

namespace rfrac {

/// The finite family of product cubes of one grid (standard or tau-shifted)
/// with factor levels 0..depth that overlap [0,1)^N in positive volume.
///
/// Rects are numbered block by block: blocks are level tuples (k_1..k_n) in
/// lexicographic order, and inside a block the cube indices run row-major
/// over the global axes (factor 1 axes first). Every downstream sum walks this
/// order.
class RectFamily {
 public:
  struct AxisRange {
    std::int64_t first = 0;  // smallest cube index meeting the domain
    std::int64_t count = 0;
  };

  struct Block {
    std::vector<int> levels;              // per factor
    std::size_t offset = 0;               // id of the first rect
    std::size_t size = 0;
    std::vector<std::size_t> strides;     // per global axis
    std::vector<AxisRange> ranges;        // per global axis
  };

  explicit RectFamily(GridConfig config, std::vector<int> tau = {});

  const GridConfig& config() const noexcept { return config_; }
  const std::vector<int>& tau() const noexcept { return tau_; }
  bool is_standard() const noexcept { return standard_; }

  std::size_t size() const noexcept { return size_; }
  std::size_t block_count() const noexcept { return blocks_.size(); }
  const Block& block(std::size_t b) const { return blocks_.at(b); }
  const std::vector<Block>& blocks() const noexcept { return blocks_; }

  /// Block holding a level tuple.
  std::size_t block_of_levels(std::span<const int> levels) const;
  std::size_t block_of_id(std::size_t id) const;

  ProductRect rect(std::size_t id) const;
  std::optional<std::size_t> find(const ProductRect& rect) const;
  /// Per-axis cube indices of a rect (global axes).
  std::vector<std::int64_t> indices(std::size_t id) const;
  std::size_t id_of(std::size_t block, std::span<const std::int64_t> indices) const;

  const AxisRange& axis_range(int axis, int level) const;
  /// For finest cell c along `axis`, the local index (0-based within the
  /// block range) of the level-`level` cube containing it.
  std::span<const std::int32_t> cell_map(int axis, int level) const;

  /// Sum of `cell_values` over every rect (one entry per id).
  std::vector<double> rect_sums(std::span<const double> cell_values) const;
  /// Transpose of rect_sums: out[cell] = sum of coeffs[id] over rects holding the cell.
  std::vector<double> scatter(std::span<const double> coeffs) const;

  /// Ids of <R; Q, j> for the 2^{N_j} halves Q of the j-th factor of rect `id`.
  /// Empty when the j-th level already equals depth.
  std::vector<std::size_t> child_ids(std::size_t id, int j) const;

 private:
  GridConfig config_;
  std::vector<int> tau_;
  bool standard_ = true;
  std::vector<Block> blocks_;
  std::size_t size_ = 0;
  std::vector<std::vector<AxisRange>> axis_ranges_;               // [axis][level]
  std::vector<std::vector<std::vector<std::int32_t>>> cell_maps_;  // [axis][level][cell]
};

/// All product cubes of the family as explicit rects, in family order.
std::vector<ProductRect> enumerate_rects(const GridConfig& config, const std::vector<int>& tau = {});

/// Every tau in {0, +1/3, -1/3}^N (in thirds), tau = 0 first.
std::vector<std::vector<int>> all_shifts(int total_dim);

}  // namespace rfrac
