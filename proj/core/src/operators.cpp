#include "rfrac/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rfrac/errors.hpp"
#include "rfrac/parallel.hpp"
#include "rfrac/rng.hpp"

namespace rfrac {
namespace {

void check_alpha(const GridConfig& config, double alpha) {
  if (!(alpha > 0.0 && alpha < static_cast<double>(config.total_dim())))
    throw ParameterError("fractional order must satisfy 0 < alpha < N");
}

void check_same_grid(const GridConfig& a, const GridConfig& b) {
  if (!(a == b)) throw DimensionMismatchError("operands live on different grids");
}

// Index along one axis of the level-k standard cube containing coordinate c / (3 * 2^r).
std::int64_t cube_index(std::int64_t c, int resolution, int level) {
  if (level <= resolution) return c / (std::int64_t{3} << (resolution - level));
  return (c << (level - resolution)) / 3;
}

}  // namespace

ExponentConfig ExponentConfig::hls(int total_dim, double alpha, double p, double q) {
  if (total_dim < 1) throw ParameterError("N must be positive");
  if (!(alpha > 0.0 && alpha < total_dim)) throw ParameterError("fractional order must satisfy 0 < alpha < N");
  if (!(p > 1.0 && q > p && std::isfinite(q))) throw ParameterError("exponents must satisfy 1 < p < q < inf");
  if (std::abs(1.0 / q - (1.0 / p - alpha / total_dim)) > 1e-12)
    throw ParameterError("exponents violate 1/q = 1/p - alpha/N");
  ExponentConfig e;
  e.alpha_ = alpha;
  e.p_ = p;
  e.q_ = q;
  e.total_dim_ = total_dim;
  return e;
}

ExponentConfig ExponentConfig::hls_from_p(int total_dim, double alpha, double p) {
  if (total_dim < 1) throw ParameterError("N must be positive");
  const double inv_q = 1.0 / p - alpha / total_dim;
  if (!(inv_q > 0.0)) throw ParameterError("1/q = 1/p - alpha/N must be positive (need p < N/alpha)");
  return hls(total_dim, alpha, p, 1.0 / inv_q);
}

ExponentConfig ExponentConfig::mlinear(std::vector<double> exponents) {
  if (exponents.empty()) throw ParameterError("need at least one exponent p_k");
  double inv_sum = 0.0;
  for (double p : exponents) {
    if (!(p > 1.0) || !std::isfinite(p)) throw ParameterError("every exponent must satisfy 1 < p_k < inf");
    inv_sum += 1.0 / p;
  }
  if (inv_sum < 1.0 - 1e-12) throw ParameterError("exponents violate sum 1/p_k >= 1");
  ExponentConfig e;
  e.exponents_ = std::move(exponents);
  return e;
}

Kernel::Kernel(std::shared_ptr<const RectFamily> family, std::vector<double> values)
    : family_(std::move(family)), values_(std::move(values)) {
  if (!family_ || !family_->is_standard()) throw ParameterError("kernels live on the standard family");
  if (values_.size() != family_->size()) throw DimensionMismatchError("kernel size differs from family");
  for (double v : values_)
    if (!(v >= 0.0) || std::isnan(v)) throw ParameterError("kernel values must be >= 0");
}

Kernel Kernel::zero(const GridConfig& config) {
  auto fam = std::make_shared<RectFamily>(config);
  const std::size_t n = fam->size();
  return Kernel(std::move(fam), std::vector<double>(n, 0.0));
}

Kernel Kernel::indicator(const GridConfig& config, const ProductRect& rect, double value) {
  auto fam = std::make_shared<RectFamily>(config);
  std::vector<double> v(fam->size(), 0.0);
  const auto id = fam->find(rect);
  if (!id) throw ParameterError("indicator kernel: rect is not in the standard family");
  v[*id] = value;
  return Kernel(std::move(fam), std::move(v));
}

Kernel Kernel::from_function(const GridConfig& config, const std::function<double(const ProductRect&)>& fn) {
  auto fam = std::make_shared<RectFamily>(config);
  std::vector<double> v(fam->size());
  for (std::size_t id = 0; id < v.size(); ++id) v[id] = fn(fam->rect(id));
  return Kernel(std::move(fam), std::move(v));
}

Kernel Kernel::fractional(const Weight& mu, double alpha) {
  check_alpha(mu.config(), alpha);
  const double power = alpha / mu.config().total_dim() - 1.0;
  const auto tree = mu.tree();
  std::vector<double> v(tree.size());
  for (std::size_t id = 0; id < v.size(); ++id) v[id] = tree[id] > 0.0 ? std::pow(tree[id], power) : 0.0;
  return Kernel(mu.family_ptr(), std::move(v));
}

namespace {

double rect_draw(const RectFamily& fam, std::size_t id, std::uint64_t seed, std::vector<std::int64_t>& key) {
  const auto& blk = fam.block(fam.block_of_id(id));
  key.assign(blk.levels.begin(), blk.levels.end());
  const auto idx = fam.indices(id);
  key.insert(key.end(), idx.begin(), idx.end());
  return to_unit(hash_key(seed, key));
}

}  // namespace

Kernel Kernel::random_uniform(const GridConfig& config, std::uint64_t seed) {
  auto fam = std::make_shared<RectFamily>(config);
  std::vector<double> v(fam->size());
  std::vector<std::int64_t> key;
  for (std::size_t id = 0; id < v.size(); ++id) v[id] = rect_draw(*fam, id, seed, key);
  return Kernel(std::move(fam), std::move(v));
}

Kernel Kernel::random_balanced(std::span<const Weight* const> weights, std::span<const double> exponents,
                               std::uint64_t seed) {
  if (weights.empty() || weights.size() != exponents.size())
    throw DimensionMismatchError("need one exponent per weight");
  for (const Weight* w : weights) check_same_grid(weights.front()->config(), w->config());
  const RectFamily& fam = weights.front()->family();
  std::vector<double> v(fam.size());
  std::vector<std::int64_t> key;
  for (std::size_t id = 0; id < v.size(); ++id) {
    double value = rect_draw(fam, id, seed, key);
    for (std::size_t k = 0; k < weights.size(); ++k) {
      const double m = weights[k]->mass_of_id(id);
      if (!(m > 0.0)) {
        value = 0.0;
        break;
      }
      value *= std::pow(m, -1.0 / conjugate(exponents[k]));
    }
    v[id] = value;
  }
  return Kernel(weights.front()->family_ptr(), std::move(v));
}

double Kernel::operator()(const ProductRect& rect) const {
  const auto id = family_->find(rect);
  return id ? values_[*id] : 0.0;
}

double mlinear_form(const Kernel& kernel, std::span<const Weight* const> weights,
                    std::span<const GridFunction* const> functions) {
  if (weights.size() != functions.size() || weights.empty())
    throw DimensionMismatchError("mlinear_form needs one function per weight");
  const RectFamily& fam = kernel.family();
  std::vector<double> terms(kernel.values().begin(), kernel.values().end());
  for (std::size_t k = 0; k < weights.size(); ++k) {
    check_same_grid(fam.config(), weights[k]->config());
    const auto integrals = fam.rect_sums(weighted_cells(*weights[k], *functions[k]));
    for (std::size_t id = 0; id < terms.size(); ++id) terms[id] *= std::abs(integrals[id]);
  }
  return pairwise_sum(terms);
}

GridFunction apply_positive(const Kernel& kernel, const Weight& sigma, const GridFunction& f) {
  const RectFamily& fam = kernel.family();
  check_same_grid(fam.config(), sigma.config());
  auto coeffs = fam.rect_sums(weighted_cells(sigma, f));
  const auto kv = kernel.values();
  for (std::size_t id = 0; id < coeffs.size(); ++id) coeffs[id] *= kv[id];
  return GridFunction(fam.config(), fam.scatter(coeffs));
}

DyadicFracOperator::DyadicFracOperator(const Weight& mu, double alpha, const std::vector<int>& tau) {
  check_alpha(mu.config(), alpha);
  const bool standard = tau.empty() || std::all_of(tau.begin(), tau.end(), [](int t) { return t == 0; });
  if (standard) {
    family_ = mu.family_ptr();
    masses_.assign(mu.tree().begin(), mu.tree().end());
  } else {
    family_ = std::make_shared<RectFamily>(mu.config(), tau);
    masses_ = family_->rect_sums(mu.cell_masses());
  }
  const double power = alpha / mu.config().total_dim() - 1.0;
  kernel_.resize(masses_.size());
  for (std::size_t id = 0; id < kernel_.size(); ++id)
    kernel_[id] = masses_[id] > 0.0 ? std::pow(masses_[id], power) : 0.0;
}

std::vector<double> DyadicFracOperator::apply(std::span<const double> weighted,
                                              OperatorDiagnostics* diagnostics) const {
  auto coeffs = family_->rect_sums(weighted);
  std::size_t skipped = 0;
  for (std::size_t id = 0; id < coeffs.size(); ++id) {
    if (masses_[id] > 0.0) {
      coeffs[id] *= kernel_[id];
    } else {
      if (coeffs[id] != 0.0) ++skipped;
      coeffs[id] = 0.0;
    }
  }
  if (diagnostics) {
    diagnostics->skipped_terms += skipped;
    diagnostics->truncation_depth = family_->config().depth();
  }
  return family_->scatter(coeffs);
}

OperatorResult apply_frac_dyadic(const Weight& mu, double alpha, const GridFunction& f, const std::vector<int>& tau) {
  check_same_grid(mu.config(), f.config());
  const DyadicFracOperator op(mu, alpha, tau);
  OperatorDiagnostics diag;
  auto values = op.apply(weighted_cells(mu, f), &diag);
  return {GridFunction(mu.config(), std::move(values)), diag};
}

std::vector<double> neighbor_sums(const RectFamily& family, std::span<const double> values) {
  if (values.size() != family.size()) throw DimensionMismatchError("neighbor_sums: size differs from family");
  std::vector<double> cur(values.begin(), values.end());
  std::vector<double> next(cur.size());
  const int n_axes = family.config().total_dim();
  for (int a = 0; a < n_axes; ++a) {
    for (const auto& blk : family.blocks()) {
      const std::size_t stride = blk.strides[static_cast<std::size_t>(a)];
      const auto count = static_cast<std::size_t>(blk.ranges[static_cast<std::size_t>(a)].count);
      for (std::size_t local = 0; local < blk.size; ++local) {
        const std::size_t i = (local / stride) % count;
        const std::size_t id = blk.offset + local;
        double s = cur[id];
        if (i > 0) s = cur[id - stride] + s;
        if (i + 1 < count) s = s + cur[id + stride];
        next[id] = s;
      }
    }
    std::swap(cur, next);
  }
  return cur;
}

std::vector<double> triple_integrals(const RectFamily& family, std::span<const double> cell_values) {
  return neighbor_sums(family, family.rect_sums(cell_values));
}

std::vector<double> triple_scatter(const RectFamily& family, std::span<const double> coeffs) {
  return family.scatter(neighbor_sums(family, coeffs));
}

OperatorResult apply_perez(const Weight& mu, double alpha, const GridFunction& f) {
  check_same_grid(mu.config(), f.config());
  check_alpha(mu.config(), alpha);
  const GridConfig& cfg = mu.config();
  const RectFamily& fam = mu.family();
  const PrefixTable table(cfg, weighted_cells(mu, f));
  const double power = alpha / cfg.total_dim() - 1.0;
  const int res = cfg.resolution();
  const auto tree = mu.tree();
  std::vector<double> coeffs(fam.size(), 0.0);
  std::vector<std::size_t> skipped_per_block(fam.block_count(), 0);
  parallel_for(
      fam.block_count(),
      [&](std::size_t begin, std::size_t end) {
        Box box{std::vector<std::int64_t>(static_cast<std::size_t>(cfg.total_dim())),
                std::vector<std::int64_t>(static_cast<std::size_t>(cfg.total_dim())), res};
        for (std::size_t b = begin; b < end; ++b) {
          const auto& blk = fam.block(b);
          for (std::size_t local = 0; local < blk.size; ++local) {
            std::size_t rem = local;
            for (std::size_t a = 0; a < box.lo.size(); ++a) {
              const auto m = static_cast<std::int64_t>(rem / blk.strides[a]) + blk.ranges[a].first;
              rem %= blk.strides[a];
              const int k = blk.levels[static_cast<std::size_t>(cfg.factor_of_axis(static_cast<int>(a)))];
              box.lo[a] = (3 * m - 3) << (res - k);
              box.hi[a] = (3 * m + 6) << (res - k);
            }
            const std::size_t id = blk.offset + local;
            const double integral = std::max(0.0, static_cast<double>(table.box_sum(box)));
            if (tree[id] > 0.0) {
              coeffs[id] = std::pow(tree[id], power) * integral;
            } else if (integral != 0.0) {
              ++skipped_per_block[b];
            }
          }
        }
      },
      1);
  OperatorDiagnostics diag;
  diag.truncation_depth = cfg.depth();
  for (auto s : skipped_per_block) diag.skipped_terms += s;
  return {GridFunction(cfg, fam.scatter(coeffs)), diag};
}

namespace {

// Kernel-form row: sum over y cells of mu(R(x,y))^power * w[y], where w is
// f * cell mass. Returns the row value and accumulates exclusions.
struct RowResult {
  double value = 0.0;
  std::size_t excluded = 0;
  double excluded_weight = 0.0;
  std::size_t skipped = 0;
};

class KernelRowEvaluator {
 public:
  KernelRowEvaluator(const Weight& mu, double alpha)
      : mu_(mu),
        cfg_(mu.config()),
        power_(alpha / mu.config().total_dim() - 1.0),
        n_(static_cast<std::size_t>(mu.config().total_dim())),
        box_{std::vector<std::int64_t>(n_), std::vector<std::int64_t>(n_), mu.config().resolution()},
        xc_(n_),
        yc_(n_) {}

  void decode(std::size_t cell, std::vector<std::int64_t>& out) const {
    const auto& cstr = cfg_.cell_strides();
    std::size_t rem = cell;
    for (std::size_t a = 0; a < n_; ++a) {
      out[a] = static_cast<std::int64_t>(rem / cstr[a]);
      rem %= cstr[a];
    }
  }

  /// Kernel value between cells, or nullopt when the pair shares an axis index.
  std::optional<double> pair(std::size_t x, std::size_t y, std::size_t* skipped) {
    decode(x, xc_);
    decode(y, yc_);
    for (std::size_t a = 0; a < n_; ++a) {
      if (xc_[a] == yc_[a]) return std::nullopt;
      box_.lo[a] = 2 * std::min(xc_[a], yc_[a]) + 1;
      box_.hi[a] = 2 * std::max(xc_[a], yc_[a]) + 1;
    }
    const double m = mu_.mass(box_);
    if (!(m > 0.0)) {
      if (skipped) ++*skipped;
      return 0.0;
    }
    return std::pow(m, power_);
  }

 private:
  const Weight& mu_;
  const GridConfig& cfg_;
  double power_;
  std::size_t n_;
  Box box_;
  std::vector<std::int64_t> xc_;
  std::vector<std::int64_t> yc_;
};

}  // namespace

OperatorResult apply_frac_kernel(const Weight& mu, double alpha, const GridFunction& f) {
  check_same_grid(mu.config(), f.config());
  check_alpha(mu.config(), alpha);
  const GridConfig& cfg = mu.config();
  const auto weighted = weighted_cells(mu, f);
  const auto cell_mass = mu.cell_masses();
  const std::size_t cells = cfg.cell_count();
  std::vector<double> out(cells, 0.0);
  std::vector<RowResult> rows(cells);
  parallel_for(
      cells,
      [&](std::size_t begin, std::size_t end) {
        KernelRowEvaluator eval(mu, alpha);
        for (std::size_t x = begin; x < end; ++x) {
          RowResult r;
          for (std::size_t y = 0; y < cells; ++y) {
            const auto k = eval.pair(x, y, &r.skipped);
            if (!k) {
              ++r.excluded;
              r.excluded_weight += weighted[y];
              continue;
            }
            r.value += *k * weighted[y];
          }
          out[x] = r.value;
          rows[x] = r;
        }
      },
      16);
  OperatorDiagnostics diag;
  diag.truncation_depth = cfg.depth();
  for (std::size_t x = 0; x < cells; ++x) {
    diag.excluded_pairs += rows[x].excluded;
    diag.skipped_terms += rows[x].skipped;
    diag.excluded_mass += cell_mass[x] * rows[x].excluded_weight;
  }
  return {GridFunction(cfg, std::move(out)), diag};
}

KernelForm::KernelForm(const Weight& mu, double alpha) : cells_(mu.config().cell_count()) {
  check_alpha(mu.config(), alpha);
  if (cells_ > (std::size_t{1} << 12))
    throw EnumerationBoundError("kernel form matrix limited to 4096 cells (" + std::to_string(cells_) + " requested)");
  matrix_.assign(cells_ * cells_, 0.0);
  const auto cell_mass = mu.cell_masses();
  std::vector<double> kernel(cells_ * cells_, 0.0);
  std::vector<RowResult> rows(cells_);
  parallel_for(
      cells_,
      [&](std::size_t begin, std::size_t end) {
        KernelRowEvaluator eval(mu, alpha);
        for (std::size_t x = begin; x < end; ++x) {
          RowResult r;
          for (std::size_t y = 0; y < cells_; ++y) {
            const auto k = eval.pair(x, y, &r.skipped);
            if (!k) {
              ++r.excluded;
              r.excluded_weight += cell_mass[y];
              continue;
            }
            matrix_[x * cells_ + y] = *k * cell_mass[y];
          }
          rows[x] = r;
        }
      },
      16);
  diagnostics_.truncation_depth = mu.config().depth();
  for (std::size_t x = 0; x < cells_; ++x) {
    diagnostics_.excluded_pairs += rows[x].excluded;
    diagnostics_.skipped_terms += rows[x].skipped;
    diagnostics_.excluded_mass += cell_mass[x] * rows[x].excluded_weight;
  }
}

std::vector<double> KernelForm::apply(std::span<const double> f) const {
  if (f.size() != cells_) throw DimensionMismatchError("kernel form: function size");
  std::vector<double> out(cells_, 0.0);
  parallel_for(
      cells_,
      [&](std::size_t begin, std::size_t end) {
        for (std::size_t x = begin; x < end; ++x) {
          const double* row = matrix_.data() + x * cells_;
          double s = 0.0;
          for (std::size_t y = 0; y < cells_; ++y) s += row[y] * f[y];
          out[x] = s;
        }
      },
      64);
  return out;
}

double kernel_value(const Weight& mu, double alpha, const Point& x, const Point& y) {
  check_alpha(mu.config(), alpha);
  const double m = mu.mass(min_rect(x, y));
  if (!(m > 0.0)) return std::numeric_limits<double>::infinity();
  return std::pow(m, alpha / mu.config().total_dim() - 1.0);
}

double kernel_sum(const Weight& mu, double alpha, const Point& x, const Point& y) {
  check_alpha(mu.config(), alpha);
  const GridConfig& cfg = mu.config();
  if (x.dim() != cfg.total_dim() || y.dim() != cfg.total_dim())
    throw DimensionMismatchError("kernel_sum: point dimension differs from grid");
  if (!coordinate_distinct(x, y)) throw DegeneratePairError("kernel_sum: x and y share a coordinate");
  const std::int64_t limit = std::int64_t{3} << x.resolution;
  for (auto c : x.coords)
    if (c < 0 || c >= limit) throw ParameterError("kernel_sum: x must lie in [0,1)^N");

  const int n = cfg.factors();
  const int depth = cfg.depth();
  // Deepest level per factor at which y stays in 3Q(x); the predicate is
  // monotone along the ancestor chain and the top cube always qualifies.
  std::vector<int> deepest(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    const int off = cfg.axis_offset(i);
    const int d = cfg.factor_dim(i);
    const Point xi = x.slice(off, d);
    const Point yi = y.slice(off, d);
    for (int k = 0; k <= depth; ++k) {
      std::vector<std::int64_t> idx(static_cast<std::size_t>(d));
      for (int a = 0; a < d; ++a)
        idx[static_cast<std::size_t>(a)] = cube_index(xi.coords[static_cast<std::size_t>(a)], xi.resolution, k);
      if (!DyadicCube(k, std::move(idx)).triple_contains(yi)) break;
      deepest[static_cast<std::size_t>(i)] = k;
    }
  }
  const double power = alpha / cfg.total_dim() - 1.0;
  const RectFamily& fam = mu.family();
  std::vector<int> levels(static_cast<std::size_t>(n), 0);
  std::vector<std::int64_t> idx(x.coords.size());
  double total = 0.0;
  while (true) {
    for (std::size_t a = 0; a < idx.size(); ++a)
      idx[a] = cube_index(x.coords[a], x.resolution, levels[static_cast<std::size_t>(cfg.factor_of_axis(static_cast<int>(a)))]);
    const double m = mu.mass_of_id(fam.id_of(fam.block_of_levels(levels), idx));
    if (m > 0.0) total += std::pow(m, power);
    int i = n - 1;
    while (i >= 0 && levels[static_cast<std::size_t>(i)] == deepest[static_cast<std::size_t>(i)])
      levels[static_cast<std::size_t>(i--)] = 0;
    if (i < 0) break;
    ++levels[static_cast<std::size_t>(i)];
  }
  return total;
}

ShiftBound shift_bound_ratio(const Weight& mu, double alpha, const GridFunction& f) {
  check_same_grid(mu.config(), f.config());
  const auto numerator = apply_perez(mu, alpha, f).values;
  const auto weighted = weighted_cells(mu, f);
  std::vector<double> denominator(mu.config().cell_count(), 0.0);
  for (const auto& tau : all_shifts(mu.config().total_dim())) {
    const DyadicFracOperator op(mu, alpha, tau);
    const auto part = op.apply(weighted);
    for (std::size_t c = 0; c < part.size(); ++c) denominator[c] += part[c];
  }
  ShiftBound out;
  for (std::size_t c = 0; c < denominator.size(); ++c) {
    const double num = numerator[c];
    const double den = denominator[c];
    if (den == 0.0) {
      if (num == 0.0) continue;
      if (!out.infinite) {
        out.infinite = true;
        out.ratio = std::numeric_limits<double>::infinity();
        out.witness_cell = c;
      }
      ++out.cells_compared;
      continue;
    }
    ++out.cells_compared;
    if (!out.infinite && num / den > out.ratio) {
      out.ratio = num / den;
      out.witness_cell = c;
    }
  }
  return out;
}

}  // namespace rfrac
