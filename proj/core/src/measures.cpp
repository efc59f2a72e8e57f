#include "rfrac/measures.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>

#include "rfrac/errors.hpp"
#include "rfrac/rng.hpp"

namespace rfrac {
namespace {

struct AxisTerm {
  std::size_t index;
  long double coef;
};

// Terms of F(hi) - F(lo) along one axis, where F interpolates the prefix
// table linearly inside a cell.
void axis_terms(std::int64_t lo, std::int64_t hi, int resolution, int depth, std::int64_t lattice,
                std::vector<AxisTerm>& out) {
  out.clear();
  auto position = [&](std::int64_t c, std::int64_t& idx, long double& frac) {
    if (resolution <= depth) {
      idx = c << (depth - resolution);
      frac = 0.0L;
    } else {
      const int s = resolution - depth;
      idx = c >> s;  // arithmetic shift floors negative values
      frac = std::ldexp(static_cast<long double>(c - (idx << s)), -s);
    }
    if (idx < 0) {
      idx = 0;
      frac = 0.0L;
    } else if (idx >= lattice) {
      idx = lattice;
      frac = 0.0L;
    }
  };
  std::int64_t il = 0;
  std::int64_t ih = 0;
  long double fl = 0.0L;
  long double fh = 0.0L;
  position(lo, il, fl);
  position(hi, ih, fh);
  if (static_cast<long double>(ih) + fh <= static_cast<long double>(il) + fl) return;
  auto push = [&](std::int64_t idx, long double coef) {
    if (idx > 0 && coef != 0.0L) out.push_back({static_cast<std::size_t>(idx), coef});
  };
  push(ih, 1.0L - fh);
  if (fh > 0.0L) push(ih + 1, fh);
  push(il, -(1.0L - fl));
  if (fl > 0.0L) push(il + 1, -fl);
}

double pairwise_range(const double* v, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_range(v, half) + pairwise_range(v + half, n - half);
}

void check_values(std::span<const double> values, std::size_t expected, const char* what) {
  if (values.size() != expected)
    throw DimensionMismatchError(std::string(what) + " has " + std::to_string(values.size()) + " cells, grid has " +
                                 std::to_string(expected));
  for (double v : values)
    if (!(v >= 0.0) || !std::isfinite(v)) throw ParameterError(std::string(what) + " values must be finite and >= 0");
}

// Sum of cell values over the lattice sub-box [lo, hi) (cell indices).
double sum_cells(const GridConfig& config, std::span<const double> values, const std::vector<std::int64_t>& lo,
                 const std::vector<std::int64_t>& hi) {
  const auto n = static_cast<std::size_t>(config.total_dim());
  for (std::size_t a = 0; a < n; ++a)
    if (hi[a] <= lo[a]) return 0.0;
  const auto& strides = config.cell_strides();
  std::vector<std::int64_t> cur = lo;
  double total = 0.0;
  while (true) {
    std::size_t base = 0;
    for (std::size_t a = 0; a + 1 < n; ++a) base += static_cast<std::size_t>(cur[a]) * strides[a];
    for (std::int64_t c = lo[n - 1]; c < hi[n - 1]; ++c) total += values[base + static_cast<std::size_t>(c)];
    int a = static_cast<int>(n) - 2;
    while (a >= 0 && ++cur[static_cast<std::size_t>(a)] == hi[static_cast<std::size_t>(a)]) {
      cur[static_cast<std::size_t>(a)] = lo[static_cast<std::size_t>(a)];
      --a;
    }
    if (a < 0) return total;
  }
}

// Lattice cell range of a box that is a union of whole cells, else nullopt.
std::optional<std::pair<std::vector<std::int64_t>, std::vector<std::int64_t>>> cell_range(const GridConfig& config,
                                                                                          const Box& box) {
  const int r = box.resolution;
  const int depth = config.depth();
  const std::int64_t lattice = config.cells_per_axis();
  std::vector<std::int64_t> lo(box.lo.size());
  std::vector<std::int64_t> hi(box.hi.size());
  for (std::size_t a = 0; a < lo.size(); ++a) {
    std::int64_t l = box.lo[a];
    std::int64_t h = box.hi[a];
    if (r <= depth) {
      l <<= (depth - r);
      h <<= (depth - r);
    } else {
      const int s = r - depth;
      const std::int64_t mask = (std::int64_t{1} << s) - 1;
      if ((l & mask) != 0 || (h & mask) != 0) return std::nullopt;
      l >>= s;
      h >>= s;
    }
    lo[a] = std::clamp<std::int64_t>(l, 0, lattice);
    hi[a] = std::clamp<std::int64_t>(h, 0, lattice);
  }
  return std::make_pair(std::move(lo), std::move(hi));
}

}  // namespace

PrefixTable::PrefixTable(const GridConfig& config, std::span<const double> cell_values) : depth_(config.depth()) {
  if (cell_values.size() != config.cell_count()) throw DimensionMismatchError("prefix table: cell array size");
  const auto n = static_cast<std::size_t>(config.total_dim());
  const std::int64_t lattice = config.cells_per_axis();
  lattice_.assign(n, lattice);
  strides_.assign(n, 1);
  const auto ext = static_cast<std::size_t>(lattice + 1);
  for (std::size_t a = n - 1; a-- > 0;) strides_[a] = strides_[a + 1] * ext;
  table_.assign(strides_[0] * ext, 0.0L);

  const auto& cstr = config.cell_strides();
  for (std::size_t cell = 0; cell < cell_values.size(); ++cell) {
    std::size_t t = 0;
    std::size_t rem = cell;
    for (std::size_t a = 0; a < n; ++a) {
      t += (rem / cstr[a] + 1) * strides_[a];
      rem %= cstr[a];
    }
    table_[t] = cell_values[cell];
  }
  for (std::size_t a = 0; a < n; ++a) {
    const std::size_t stride = strides_[a];
    for (std::size_t i = 0; i < table_.size(); ++i) {
      if ((i / stride) % ext == 0) continue;
      table_[i] += table_[i - stride];
    }
  }
}

long double PrefixTable::box_sum(const Box& box) const {
  const std::size_t n = lattice_.size();
  if (static_cast<std::size_t>(box.dim()) != n) throw DimensionMismatchError("box dimension differs from grid");
  std::vector<std::vector<AxisTerm>> terms(n);
  for (std::size_t a = 0; a < n; ++a) {
    axis_terms(box.lo[a], box.hi[a], box.resolution, depth_, lattice_[a], terms[a]);
    if (terms[a].empty()) return 0.0L;
  }
  long double total = 0.0L;
  std::vector<std::size_t> pick(n, 0);
  while (true) {
    std::size_t offset = 0;
    long double coef = 1.0L;
    for (std::size_t a = 0; a < n; ++a) {
      offset += terms[a][pick[a]].index * strides_[a];
      coef *= terms[a][pick[a]].coef;
    }
    total += coef * table_[offset];
    std::size_t a = n;
    while (a > 0) {
      --a;
      if (++pick[a] < terms[a].size()) break;
      pick[a] = 0;
      if (a == 0) return total;
    }
  }
}

double pairwise_sum(std::span<const double> values) { return pairwise_range(values.data(), values.size()); }

Weight::Weight(GridConfig config, std::vector<double> density, WeightMeta meta)
    : family_(std::make_shared<RectFamily>(std::move(config))), density_(std::move(density)), meta_(std::move(meta)) {
  const GridConfig& cfg = family_->config();
  check_values(density_, cfg.cell_count(), "weight density");
  cell_mass_.resize(density_.size());
  const double vol = cfg.cell_volume();
  std::transform(density_.begin(), density_.end(), cell_mass_.begin(), [vol](double d) { return d * vol; });

  const RectFamily& fam = *family_;
  tree_.assign(fam.size(), 0.0);
  const int depth = cfg.depth();
  const auto n_axes = static_cast<std::size_t>(cfg.total_dim());

  // Finest block: every level-K cube is a 3^N block of lattice cells.
  {
    const auto& finest = fam.blocks().back();
    const auto& cstr = cfg.cell_strides();
    for (std::size_t cell = 0; cell < cell_mass_.size(); ++cell) {
      std::size_t rem = cell;
      std::size_t local = 0;
      for (std::size_t a = 0; a < n_axes; ++a) {
        local += (rem / cstr[a] / 3) * finest.strides[a];
        rem %= cstr[a];
      }
      tree_[finest.offset + local] += cell_mass_[cell];
    }
  }
  // Coarser blocks from the block one level finer in the first non-finest factor.
  for (std::size_t b = fam.block_count() - 1; b-- > 0;) {
    const auto& blk = fam.block(b);
    std::size_t j = 0;
    while (blk.levels[j] == depth) ++j;
    std::vector<int> src_levels = blk.levels;
    ++src_levels[j];
    const auto& src = fam.block(fam.block_of_levels(src_levels));
    const auto off = static_cast<std::size_t>(cfg.axis_offset(static_cast<int>(j)));
    const auto dim = static_cast<std::size_t>(cfg.factor_dim(static_cast<int>(j)));
    for (std::size_t s = 0; s < src.size; ++s) {
      std::size_t rem = s;
      std::size_t local = 0;
      for (std::size_t a = 0; a < n_axes; ++a) {
        std::size_t idx = rem / src.strides[a];
        rem %= src.strides[a];
        if (a >= off && a < off + dim) idx /= 2;
        local += idx * blk.strides[a];
      }
      tree_[blk.offset + local] += tree_[src.offset + s];
    }
  }
  if (!(total_mass() > 0.0)) throw ParameterError("weight must have positive total mass");
  prefix_ = PrefixTable(cfg, cell_mass_);
}

double Weight::mass(const ProductRect& rect) const {
  if (rect.is_standard()) {
    if (auto id = family_->find(rect)) return tree_[*id];
  }
  if (rect.total_dim() != config().total_dim()) throw DimensionMismatchError("rect dimension differs from grid");
  return mass(rect.box(config().resolution()));
}

double Weight::mass(const Box& box) const {
  return std::max(0.0, static_cast<double>(prefix_.box_sum(box)));
}

GridFunction::GridFunction(GridConfig config, std::vector<double> values)
    : config_(std::move(config)), values_(std::move(values)) {
  check_values(values_, config_.cell_count(), "grid function");
}

GridFunction GridFunction::constant(const GridConfig& config, double value) {
  return GridFunction(config, std::vector<double>(config.cell_count(), value));
}

GridFunction GridFunction::indicator(const GridConfig& config, const ProductRect& rect) {
  if (rect.total_dim() != config.total_dim()) throw DimensionMismatchError("rect dimension differs from grid");
  std::vector<double> values(config.cell_count(), 0.0);
  const Box box = rect.box(config.resolution());
  const auto& cstr = config.cell_strides();
  const auto n = static_cast<std::size_t>(config.total_dim());
  Point center{std::vector<std::int64_t>(n), config.resolution()};
  for (std::size_t cell = 0; cell < values.size(); ++cell) {
    std::size_t rem = cell;
    for (std::size_t a = 0; a < n; ++a) {
      center.coords[a] = 2 * static_cast<std::int64_t>(rem / cstr[a]) + 1;
      rem %= cstr[a];
    }
    if (box.contains(center)) values[cell] = 1.0;
  }
  return GridFunction(config, std::move(values));
}

GridFunction GridFunction::upsample() const {
  GridConfig fine = config_.with_depth(config_.depth() + 1);
  std::vector<double> out(fine.cell_count());
  const auto& fstr = fine.cell_strides();
  const auto& cstr = config_.cell_strides();
  const auto n = static_cast<std::size_t>(fine.total_dim());
  for (std::size_t cell = 0; cell < out.size(); ++cell) {
    std::size_t rem = cell;
    std::size_t coarse = 0;
    for (std::size_t a = 0; a < n; ++a) {
      coarse += (rem / fstr[a] / 2) * cstr[a];
      rem %= fstr[a];
    }
    out[cell] = values_[coarse];
  }
  return GridFunction(std::move(fine), std::move(out));
}

std::vector<double> weighted_cells(const Weight& weight, const GridFunction& f) {
  if (!(weight.config() == f.config())) throw DimensionMismatchError("weight and function grids differ");
  std::vector<double> out(f.values().size());
  const auto m = weight.cell_masses();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f[i] * m[i];
  return out;
}

double integrate(const Weight& weight, const GridFunction& f, const ProductRect& rect) {
  const Box box = rect.box(weight.config().resolution());
  if (auto range = cell_range(weight.config(), box)) {
    const auto cells = weighted_cells(weight, f);
    return sum_cells(weight.config(), cells, range->first, range->second);
  }
  return integrate(weight, f, box);
}

double integrate(const Weight& weight, const GridFunction& f, const Box& box) {
  const PrefixTable table(weight.config(), weighted_cells(weight, f));
  return std::max(0.0, static_cast<double>(table.box_sum(box)));
}

double lp_norm(const Weight& weight, const GridFunction& f, double p) {
  if (!(p > 1.0) || !std::isfinite(p)) throw ParameterError("lp_norm requires 1 < p < inf");
  auto cells = weighted_cells(weight, f);
  const auto values = f.values();
  const auto m = weight.cell_masses();
  for (std::size_t i = 0; i < cells.size(); ++i) cells[i] = std::pow(std::abs(values[i]), p) * m[i];
  return std::pow(pairwise_sum(cells), 1.0 / p);
}

Weight gen_uniform(const GridConfig& config) {
  return Weight(config, std::vector<double>(config.cell_count(), 1.0), WeightMeta{"uniform", 0, {}});
}

namespace {

Weight tensor_weight(const GridConfig& config, const std::vector<std::vector<double>>& axis_density, WeightMeta meta) {
  std::vector<double> density(config.cell_count());
  const auto& cstr = config.cell_strides();
  const auto n = static_cast<std::size_t>(config.total_dim());
  for (std::size_t cell = 0; cell < density.size(); ++cell) {
    std::size_t rem = cell;
    double v = 1.0;
    for (std::size_t a = 0; a < n; ++a) {
      v *= axis_density[a][rem / cstr[a]];
      rem %= cstr[a];
    }
    density[cell] = v;
  }
  return Weight(config, std::move(density), std::move(meta));
}

std::vector<double> broadcast(std::vector<double> v, int n, const char* what) {
  if (v.size() == 1) v.assign(static_cast<std::size_t>(n), v.front());
  if (static_cast<int>(v.size()) != n)
    throw DimensionMismatchError(std::string(what) + " needs 1 or N = " + std::to_string(n) + " entries");
  return v;
}

}  // namespace

Weight gen_power(const GridConfig& config, std::vector<double> exponents, std::vector<double> center) {
  const int n = config.total_dim();
  exponents = broadcast(std::move(exponents), n, "power exponents");
  center = broadcast(std::move(center), n, "power center");
  for (double e : exponents)
    if (!(e > -1.0) || !std::isfinite(e)) throw ParameterError("power exponents must satisfy a > -1");
  const std::int64_t lattice = config.cells_per_axis();
  std::vector<std::vector<double>> axis_density(static_cast<std::size_t>(n));
  for (std::size_t a = 0; a < axis_density.size(); ++a) {
    const double e = exponents[a];
    const double c = center[a];
    auto antiderivative = [&](double t) {
      const double d = t - c;
      return std::copysign(std::pow(std::abs(d), e + 1.0), d) / (e + 1.0);
    };
    auto& dens = axis_density[a];
    dens.resize(static_cast<std::size_t>(lattice));
    for (std::int64_t i = 0; i < lattice; ++i) {
      const double lo = static_cast<double>(i) / static_cast<double>(lattice);
      const double hi = static_cast<double>(i + 1) / static_cast<double>(lattice);
      dens[static_cast<std::size_t>(i)] = (antiderivative(hi) - antiderivative(lo)) * static_cast<double>(lattice);
    }
  }
  WeightMeta meta{"power", 0, {{"exponents", exponents}, {"center", center}}};
  return tensor_weight(config, axis_density, std::move(meta));
}

Weight gen_cascade(const GridConfig& config, double rho, std::uint64_t seed) {
  if (!(rho > 1.0 && rho <= 4.0)) throw ParameterError("cascade ratio bound must satisfy 1 < rho <= 4");
  const double lo = 1.0 / (1.0 + rho);
  const double hi = rho / (1.0 + rho);
  const int depth = config.depth();
  const std::int64_t lattice = config.cells_per_axis();
  std::vector<std::vector<double>> axis_density(static_cast<std::size_t>(config.total_dim()));
  for (std::size_t a = 0; a < axis_density.size(); ++a) {
    std::vector<double> masses{1.0};
    for (int k = 0; k < depth; ++k) {
      std::vector<double> next(masses.size() * 2);
      for (std::size_t i = 0; i < masses.size(); ++i) {
        const double u = to_unit(hash_key(seed, {static_cast<std::int64_t>(a), k, static_cast<std::int64_t>(i)}));
        const double theta = lo + (hi - lo) * u;
        next[2 * i] = masses[i] * theta;
        next[2 * i + 1] = masses[i] * (1.0 - theta);
      }
      masses = std::move(next);
    }
    auto& dens = axis_density[a];
    dens.resize(static_cast<std::size_t>(lattice));
    const double scale = std::ldexp(1.0, depth);
    for (std::int64_t c = 0; c < lattice; ++c) dens[static_cast<std::size_t>(c)] = masses[static_cast<std::size_t>(c / 3)] * scale;
  }
  WeightMeta meta{"cascade", seed, {{"rho", rho}}};
  return tensor_weight(config, axis_density, std::move(meta));
}

Weight with_zero_cell(const Weight& weight, std::size_t cell) {
  std::vector<double> density(weight.density().begin(), weight.density().end());
  density.at(cell) = 0.0;
  WeightMeta meta = weight.meta();
  meta.params["zeroed_cell"] = cell;
  return Weight(weight.config(), std::move(density), std::move(meta));
}

}  // namespace rfrac
