#include "rfrac/family.hpp"

#include <algorithm>
#include <string>

#include "rfrac/errors.hpp"
#include "rfrac/parallel.hpp"

namespace rfrac {
namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

// Walks cells row-major and hands each innermost-axis run to `leaf`.
// maps[a][c] is the local cube index of cell c on axis a.
template <class Leaf>
void walk_cells(const std::vector<const std::int32_t*>& maps, const std::vector<std::size_t>& strides,
                const std::vector<std::size_t>& cell_strides, std::size_t lattice, int axis, std::size_t cell_base,
                std::size_t local_base, std::size_t first, std::size_t last, const Leaf& leaf) {
  const auto a = static_cast<std::size_t>(axis);
  const std::int32_t* map = maps[a];
  if (a + 1 == maps.size()) {
    leaf(cell_base, local_base, map, strides[a], first, last);
    return;
  }
  for (std::size_t c = first; c < last; ++c)
    walk_cells(maps, strides, cell_strides, lattice, axis + 1, cell_base + c * cell_strides[a],
               local_base + static_cast<std::size_t>(map[c]) * strides[a], 0, lattice, leaf);
}

}  // namespace

RectFamily::RectFamily(GridConfig config, std::vector<int> tau) : config_(std::move(config)), tau_(std::move(tau)) {
  const int n_axes = config_.total_dim();
  const int depth = config_.depth();
  if (tau_.empty()) tau_.assign(static_cast<std::size_t>(n_axes), 0);
  if (static_cast<int>(tau_.size()) != n_axes)
    throw DimensionMismatchError("shift has " + std::to_string(tau_.size()) + " components, grid has " +
                                 std::to_string(n_axes) + " axes");
  for (int t : tau_)
    if (t < -1 || t > 1) throw ParameterError("shift components must be 0, +1 or -1 (thirds)");
  standard_ = std::all_of(tau_.begin(), tau_.end(), [](int t) { return t == 0; });

  const std::int64_t lattice = config_.cells_per_axis();
  axis_ranges_.resize(static_cast<std::size_t>(n_axes));
  cell_maps_.resize(static_cast<std::size_t>(n_axes));
  for (int a = 0; a < n_axes; ++a) {
    const std::int64_t t = tau_[static_cast<std::size_t>(a)];
    for (int k = 0; k <= depth; ++k) {
      const std::int64_t scale = std::int64_t{1} << k;
      // Positive overlap with [0,1): 3m + t < 3 * 2^k and 3m + t + 3 > 0.
      const std::int64_t m_min = floor_div(-t - 3, 3) + 1;
      const std::int64_t m_max = floor_div(3 * scale - t - 1, 3);
      axis_ranges_[static_cast<std::size_t>(a)].push_back({m_min, m_max - m_min + 1});

      const std::int64_t span = std::int64_t{1} << (depth - k);  // cells per third
      std::vector<std::int32_t> map(static_cast<std::size_t>(lattice));
      for (std::int64_t c = 0; c < lattice; ++c)
        map[static_cast<std::size_t>(c)] = static_cast<std::int32_t>(floor_div(c - t * span, 3 * span) - m_min);
      cell_maps_[static_cast<std::size_t>(a)].push_back(std::move(map));
    }
  }

  const int n = config_.factors();
  std::vector<int> levels(static_cast<std::size_t>(n), 0);
  while (true) {
    Block blk;
    blk.levels = levels;
    blk.offset = size_;
    blk.ranges.resize(static_cast<std::size_t>(n_axes));
    blk.strides.resize(static_cast<std::size_t>(n_axes));
    for (int a = 0; a < n_axes; ++a)
      blk.ranges[static_cast<std::size_t>(a)] =
          axis_ranges_[static_cast<std::size_t>(a)][static_cast<std::size_t>(levels[static_cast<std::size_t>(config_.factor_of_axis(a))])];
    std::size_t stride = 1;
    for (int a = n_axes - 1; a >= 0; --a) {
      blk.strides[static_cast<std::size_t>(a)] = stride;
      stride *= static_cast<std::size_t>(blk.ranges[static_cast<std::size_t>(a)].count);
    }
    blk.size = stride;
    size_ += stride;
    if (size_ > (std::size_t{1} << 28)) throw EnumerationBoundError("rect family exceeds 2^28 members");
    blocks_.push_back(std::move(blk));

    int i = n - 1;
    while (i >= 0 && levels[static_cast<std::size_t>(i)] == depth) levels[static_cast<std::size_t>(i--)] = 0;
    if (i < 0) break;
    ++levels[static_cast<std::size_t>(i)];
  }
}

std::size_t RectFamily::block_of_levels(std::span<const int> levels) const {
  if (static_cast<int>(levels.size()) != config_.factors()) throw DimensionMismatchError("level tuple length");
  std::size_t b = 0;
  for (int k : levels) {
    if (k < 0 || k > config_.depth()) throw EnumerationBoundError("level outside 0..depth");
    b = b * static_cast<std::size_t>(config_.depth() + 1) + static_cast<std::size_t>(k);
  }
  return b;
}

std::size_t RectFamily::block_of_id(std::size_t id) const {
  if (id >= size_) throw std::out_of_range("rect id out of range");
  auto it = std::upper_bound(blocks_.begin(), blocks_.end(), id,
                             [](std::size_t v, const Block& blk) { return v < blk.offset; });
  return static_cast<std::size_t>(std::distance(blocks_.begin(), it)) - 1;
}

std::vector<std::int64_t> RectFamily::indices(std::size_t id) const {
  const Block& blk = blocks_[block_of_id(id)];
  std::size_t local = id - blk.offset;
  std::vector<std::int64_t> out(blk.strides.size());
  for (std::size_t a = 0; a < out.size(); ++a) {
    out[a] = blk.ranges[a].first + static_cast<std::int64_t>(local / blk.strides[a]);
    local %= blk.strides[a];
  }
  return out;
}

std::size_t RectFamily::id_of(std::size_t block, std::span<const std::int64_t> indices) const {
  const Block& blk = blocks_.at(block);
  std::size_t id = blk.offset;
  for (std::size_t a = 0; a < indices.size(); ++a) {
    const std::int64_t local = indices[a] - blk.ranges[a].first;
    if (local < 0 || local >= blk.ranges[a].count) throw std::out_of_range("cube index outside family");
    id += static_cast<std::size_t>(local) * blk.strides[a];
  }
  return id;
}

ProductRect RectFamily::rect(std::size_t id) const {
  const Block& blk = blocks_[block_of_id(id)];
  const auto idx = indices(id);
  std::vector<DyadicCube> cubes;
  for (int i = 0; i < config_.factors(); ++i) {
    const auto off = static_cast<std::size_t>(config_.axis_offset(i));
    const auto d = static_cast<std::size_t>(config_.factor_dim(i));
    cubes.emplace_back(blk.levels[static_cast<std::size_t>(i)],
                       std::vector<std::int64_t>(idx.begin() + static_cast<std::ptrdiff_t>(off),
                                                 idx.begin() + static_cast<std::ptrdiff_t>(off + d)),
                       std::vector<int>(tau_.begin() + static_cast<std::ptrdiff_t>(off),
                                        tau_.begin() + static_cast<std::ptrdiff_t>(off + d)));
  }
  return ProductRect(std::move(cubes));
}

std::optional<std::size_t> RectFamily::find(const ProductRect& rect) const {
  if (rect.factors() != config_.factors()) return std::nullopt;
  std::vector<int> levels;
  std::vector<std::int64_t> idx;
  for (int i = 0; i < rect.factors(); ++i) {
    const DyadicCube& q = rect.factor(i);
    if (q.dim() != config_.factor_dim(i)) return std::nullopt;
    if (q.level() < 0 || q.level() > config_.depth()) return std::nullopt;
    const auto off = static_cast<std::size_t>(config_.axis_offset(i));
    for (int a = 0; a < q.dim(); ++a)
      if (q.shift()[static_cast<std::size_t>(a)] != tau_[off + static_cast<std::size_t>(a)]) return std::nullopt;
    levels.push_back(q.level());
    idx.insert(idx.end(), q.index().begin(), q.index().end());
  }
  const std::size_t b = block_of_levels(levels);
  const Block& blk = blocks_[b];
  for (std::size_t a = 0; a < idx.size(); ++a) {
    const std::int64_t local = idx[a] - blk.ranges[a].first;
    if (local < 0 || local >= blk.ranges[a].count) return std::nullopt;
  }
  return id_of(b, idx);
}

const RectFamily::AxisRange& RectFamily::axis_range(int axis, int level) const {
  return axis_ranges_.at(static_cast<std::size_t>(axis)).at(static_cast<std::size_t>(level));
}

std::span<const std::int32_t> RectFamily::cell_map(int axis, int level) const {
  return cell_maps_.at(static_cast<std::size_t>(axis)).at(static_cast<std::size_t>(level));
}

std::vector<double> RectFamily::rect_sums(std::span<const double> cell_values) const {
  if (cell_values.size() != config_.cell_count()) throw DimensionMismatchError("cell array size differs from grid");
  std::vector<double> out(size_, 0.0);
  const auto lattice = static_cast<std::size_t>(config_.cells_per_axis());
  parallel_for(
      blocks_.size(),
      [&](std::size_t begin, std::size_t end) {
        for (std::size_t b = begin; b < end; ++b) {
          const Block& blk = blocks_[b];
          std::vector<const std::int32_t*> maps;
          for (int a = 0; a < config_.total_dim(); ++a)
            maps.push_back(cell_map(a, blk.levels[static_cast<std::size_t>(config_.factor_of_axis(a))]).data());
          double* dst = out.data() + blk.offset;
          walk_cells(maps, blk.strides, config_.cell_strides(), lattice, 0, 0, 0, 0, lattice,
                     [&](std::size_t cell_base, std::size_t local_base, const std::int32_t* map, std::size_t stride,
                         std::size_t first, std::size_t last) {
                       for (std::size_t c = first; c < last; ++c)
                         dst[local_base + static_cast<std::size_t>(map[c]) * stride] += cell_values[cell_base + c];
                     });
        }
      },
      1);
  return out;
}

std::vector<double> RectFamily::scatter(std::span<const double> coeffs) const {
  if (coeffs.size() != size_) throw DimensionMismatchError("coefficient array size differs from family");
  std::vector<double> out(config_.cell_count(), 0.0);
  const auto lattice = static_cast<std::size_t>(config_.cells_per_axis());
  // Chunks of the slowest axis; each cell sums its blocks in family order.
  parallel_for(
      lattice,
      [&](std::size_t begin, std::size_t end) {
        for (const Block& blk : blocks_) {
          std::vector<const std::int32_t*> maps;
          for (int a = 0; a < config_.total_dim(); ++a)
            maps.push_back(cell_map(a, blk.levels[static_cast<std::size_t>(config_.factor_of_axis(a))]).data());
          const double* src = coeffs.data() + blk.offset;
          walk_cells(maps, blk.strides, config_.cell_strides(), lattice, 0, 0, 0, begin, end,
                     [&](std::size_t cell_base, std::size_t local_base, const std::int32_t* map, std::size_t stride,
                         std::size_t first, std::size_t last) {
                       for (std::size_t c = first; c < last; ++c)
                         out[cell_base + c] += src[local_base + static_cast<std::size_t>(map[c]) * stride];
                     });
        }
      },
      1);
  return out;
}

std::vector<std::size_t> RectFamily::child_ids(std::size_t id, int j) const {
  if (!standard_) throw ParameterError("child_ids is defined on the standard family only");
  const std::size_t b = block_of_id(id);
  const Block& blk = blocks_[b];
  if (blk.levels[static_cast<std::size_t>(j)] >= config_.depth()) return {};
  std::vector<int> child_levels = blk.levels;
  ++child_levels[static_cast<std::size_t>(j)];
  const std::size_t cb = block_of_levels(child_levels);
  auto idx = indices(id);
  const int off = config_.axis_offset(j);
  const int d = config_.factor_dim(j);
  std::vector<std::size_t> out;
  out.reserve(std::size_t{1} << d);
  auto child = idx;
  for (unsigned bits = 0; bits < (1U << d); ++bits) {
    for (int a = 0; a < d; ++a) {
      const auto i = static_cast<std::size_t>(off + a);
      child[i] = 2 * idx[i] + static_cast<std::int64_t>((bits >> (d - 1 - a)) & 1U);
    }
    out.push_back(id_of(cb, child));
  }
  return out;
}

std::vector<ProductRect> enumerate_rects(const GridConfig& config, const std::vector<int>& tau) {
  RectFamily family(config, tau);
  std::vector<ProductRect> out;
  out.reserve(family.size());
  for (std::size_t id = 0; id < family.size(); ++id) out.push_back(family.rect(id));
  return out;
}

std::vector<std::vector<int>> all_shifts(int total_dim) {
  std::size_t count = 1;
  for (int a = 0; a < total_dim; ++a) count *= 3;
  std::vector<std::vector<int>> out;
  out.reserve(count);
  for (std::size_t code = 0; code < count; ++code) {
    std::vector<int> tau(static_cast<std::size_t>(total_dim));
    std::size_t c = code;
    for (int a = total_dim - 1; a >= 0; --a) {
      static constexpr int kDigit[3] = {0, 1, -1};
      tau[static_cast<std::size_t>(a)] = kDigit[c % 3];
      c /= 3;
    }
    out.push_back(std::move(tau));
  }
  return out;
}

}  // namespace rfrac
