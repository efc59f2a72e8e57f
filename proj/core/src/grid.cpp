#include "rfrac/grid.hpp"

#include <algorithm>
#include <string>

#include "rfrac/errors.hpp"

namespace rfrac {

GridConfig::GridConfig(std::vector<int> dims, int depth) : dims_(std::move(dims)), depth_(depth) {
  if (dims_.empty()) throw ParameterError("grid needs at least one factor (n >= 1)");
  if (depth_ < 1 || depth_ > kMaxDepth)
    throw EnumerationBoundError("depth must satisfy 1 <= K <= " + std::to_string(kMaxDepth));
  for (int d : dims_) {
    if (d < 1 || d > kMaxFactorDim)
      throw ParameterError("factor dimensions must satisfy 1 <= N_i <= " + std::to_string(kMaxFactorDim));
    offsets_.push_back(total_dim_);
    for (int a = 0; a < d; ++a) axis_factor_.push_back(static_cast<int>(offsets_.size()) - 1);
    total_dim_ += d;
  }
  const auto lattice = static_cast<std::size_t>(cells_per_axis());
  for (int a = 0; a < total_dim_; ++a) {
    if (cell_count_ > kMaxCells / lattice)
      throw EnumerationBoundError("finest lattice exceeds " + std::to_string(kMaxCells) + " cells");
    cell_count_ *= lattice;
    cell_volume_ /= static_cast<double>(lattice);
  }
  strides_.assign(static_cast<std::size_t>(total_dim_), 1);
  for (int a = total_dim_ - 2; a >= 0; --a)
    strides_[static_cast<std::size_t>(a)] = strides_[static_cast<std::size_t>(a) + 1] * lattice;
}

int GridConfig::max_factor_dim() const noexcept { return *std::max_element(dims_.begin(), dims_.end()); }
int GridConfig::min_factor_dim() const noexcept { return *std::min_element(dims_.begin(), dims_.end()); }

Point Point::slice(int offset, int count) const {
  return Point{std::vector<std::int64_t>(coords.begin() + offset, coords.begin() + offset + count), resolution};
}

Point make_point(const GridConfig& config, std::vector<std::int64_t> coords) {
  if (static_cast<int>(coords.size()) != config.total_dim())
    throw DimensionMismatchError("point has " + std::to_string(coords.size()) + " axes, grid has " +
                                 std::to_string(config.total_dim()));
  return Point{std::move(coords), config.resolution()};
}

Point cell_center(const GridConfig& config, const std::vector<std::int64_t>& cell) {
  std::vector<std::int64_t> coords(cell.size());
  for (std::size_t a = 0; a < cell.size(); ++a) coords[a] = 2 * cell[a] + 1;
  return make_point(config, std::move(coords));
}

namespace {

// Compares a / (3 * 2^ea) with b / (3 * 2^eb).
__extension__ typedef __int128 Int128;

int compare_scaled(std::int64_t a, int ea, std::int64_t b, int eb) {
  const int e = std::max(ea, eb);
  const auto sa = static_cast<Int128>(a) << (e - ea);
  const auto sb = static_cast<Int128>(b) << (e - eb);
  return (sa > sb) - (sa < sb);
}

}  // namespace

bool Box::contains(const Point& p) const {
  if (p.dim() != dim()) throw DimensionMismatchError("box/point dimension mismatch");
  for (int a = 0; a < dim(); ++a) {
    const auto i = static_cast<std::size_t>(a);
    if (compare_scaled(p.coords[i], p.resolution, lo[i], resolution) < 0) return false;
    if (compare_scaled(p.coords[i], p.resolution, hi[i], resolution) >= 0) return false;
  }
  return true;
}

Box refine(const Box& box, int resolution) {
  if (resolution < box.resolution) throw ParameterError("refine() cannot coarsen a box");
  Box out = box;
  const int shift = resolution - box.resolution;
  for (auto& v : out.lo) v <<= shift;
  for (auto& v : out.hi) v <<= shift;
  out.resolution = resolution;
  return out;
}

Box box_product(const std::vector<Box>& parts) {
  int resolution = 0;
  for (const auto& b : parts) resolution = std::max(resolution, b.resolution);
  Box out{{}, {}, resolution};
  for (const auto& b : parts) {
    const Box r = refine(b, resolution);
    out.lo.insert(out.lo.end(), r.lo.begin(), r.lo.end());
    out.hi.insert(out.hi.end(), r.hi.begin(), r.hi.end());
  }
  return out;
}

}  // namespace rfrac
