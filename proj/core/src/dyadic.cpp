#include "rfrac/dyadic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rfrac/errors.hpp"

namespace rfrac {
namespace {

__extension__ typedef __int128 Int128;

int compare_scaled(std::int64_t a, int ea, std::int64_t b, int eb) {
  const int e = std::max(ea, eb);
  const auto sa = static_cast<Int128>(a) << (e - ea);
  const auto sb = static_cast<Int128>(b) << (e - eb);
  return (sa > sb) - (sa < sb);
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}


bool in_unit_domain(const Point& p) {
  const std::int64_t limit = std::int64_t{3} << p.resolution;
  return std::all_of(p.coords.begin(), p.coords.end(), [&](std::int64_t c) { return c >= 0 && c < limit; });
}

bool same_point(const Point& a, const Point& b) {
  if (a.dim() != b.dim()) throw DimensionMismatchError("points of different dimension");
  for (std::size_t i = 0; i < a.coords.size(); ++i)
    if (compare_scaled(a.coords[i], a.resolution, b.coords[i], b.resolution) != 0) return false;
  return true;
}

}  // namespace

double ExactCoord::value() const noexcept { return std::ldexp(static_cast<double>(num) / 3.0, -exp); }

std::strong_ordering operator<=>(const ExactCoord& a, const ExactCoord& b) {
  const int c = compare_scaled(a.num, a.exp, b.num, b.exp);
  return c < 0 ? std::strong_ordering::less : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
}

DyadicCube::DyadicCube(int level, std::vector<std::int64_t> index, std::vector<int> shift)
    : level_(level), index_(std::move(index)), shift_(std::move(shift)) {
  if (index_.empty()) throw ParameterError("cube needs at least one axis");
  if (shift_.empty()) shift_.assign(index_.size(), 0);
  if (shift_.size() != index_.size()) throw DimensionMismatchError("cube shift and index lengths differ");
  for (int t : shift_)
    if (t < -1 || t > 1) throw ParameterError("cube shift components must be 0, +1 or -1 (thirds)");
}

bool DyadicCube::is_standard() const noexcept {
  return std::all_of(shift_.begin(), shift_.end(), [](int t) { return t == 0; });
}

std::vector<DyadicCube> DyadicCube::children(int max_level) const {
  if (level_ + 1 > max_level)
    throw EnumerationBoundError("children of a level-" + std::to_string(level_) + " cube exceed depth " +
                                std::to_string(max_level));
  const int d = dim();
  std::vector<int> child_shift(shift_.size());
  std::transform(shift_.begin(), shift_.end(), child_shift.begin(), [](int t) { return -t; });
  std::vector<DyadicCube> out;
  out.reserve(std::size_t{1} << d);
  for (unsigned bits = 0; bits < (1U << d); ++bits) {
    std::vector<std::int64_t> idx(index_.size());
    for (int a = 0; a < d; ++a) {
      const auto b = static_cast<std::int64_t>((bits >> (d - 1 - a)) & 1U);
      const auto i = static_cast<std::size_t>(a);
      idx[i] = 2 * index_[i] + shift_[i] + b;
    }
    out.emplace_back(level_ + 1, std::move(idx), child_shift);
  }
  return out;
}

DyadicCube DyadicCube::parent() const {
  std::vector<std::int64_t> idx(index_.size());
  std::vector<int> parent_shift(shift_.size());
  for (std::size_t i = 0; i < index_.size(); ++i) {
    idx[i] = floor_div(index_[i] + shift_[i], 2);
    parent_shift[i] = -shift_[i];
  }
  return DyadicCube(level_ - 1, std::move(idx), std::move(parent_shift));
}

bool DyadicCube::contains(const Point& p) const {
  if (p.dim() != dim()) throw DimensionMismatchError("cube/point dimension mismatch");
  for (int a = 0; a < dim(); ++a) {
    const auto c = p.coords[static_cast<std::size_t>(a)];
    if (compare_scaled(c, p.resolution, lower_num(a), level_) < 0) return false;
    if (compare_scaled(c, p.resolution, lower_num(a) + 3, level_) >= 0) return false;
  }
  return true;
}

bool DyadicCube::triple_contains(const Point& p) const {
  if (p.dim() != dim()) throw DimensionMismatchError("cube/point dimension mismatch");
  for (int a = 0; a < dim(); ++a) {
    const auto c = p.coords[static_cast<std::size_t>(a)];
    if (compare_scaled(c, p.resolution, lower_num(a) - 3, level_) < 0) return false;
    if (compare_scaled(c, p.resolution, lower_num(a) + 6, level_) >= 0) return false;
  }
  return true;
}

bool DyadicCube::subset_of(const DyadicCube& other) const {
  if (other.dim() != dim()) throw DimensionMismatchError("cube dimension mismatch");
  for (int a = 0; a < dim(); ++a) {
    if (lower(a) < other.lower(a)) return false;
    if (upper(a) > other.upper(a)) return false;
  }
  return true;
}

Box DyadicCube::box(int resolution) const {
  const int res = std::max(resolution, level_);
  Box out{{}, {}, res};
  for (int a = 0; a < dim(); ++a) {
    out.lo.push_back(lower_num(a) << (res - level_));
    out.hi.push_back((lower_num(a) + 3) << (res - level_));
  }
  return out;
}

Box DyadicCube::triple_box(int resolution) const {
  const int res = std::max(resolution, level_);
  Box out{{}, {}, res};
  for (int a = 0; a < dim(); ++a) {
    out.lo.push_back((lower_num(a) - 3) << (res - level_));
    out.hi.push_back((lower_num(a) + 6) << (res - level_));
  }
  return out;
}

ProductRect::ProductRect(std::vector<DyadicCube> factors) : factors_(std::move(factors)) {
  if (factors_.empty()) throw ParameterError("product rect needs at least one factor");
}

std::vector<int> ProductRect::levels() const {
  std::vector<int> out;
  out.reserve(factors_.size());
  for (const auto& q : factors_) out.push_back(q.level());
  return out;
}

int ProductRect::total_dim() const noexcept {
  int n = 0;
  for (const auto& q : factors_) n += q.dim();
  return n;
}

bool ProductRect::is_standard() const noexcept {
  return std::all_of(factors_.begin(), factors_.end(), [](const DyadicCube& q) { return q.is_standard(); });
}

bool ProductRect::contains(const Point& p) const {
  int offset = 0;
  for (const auto& q : factors_) {
    if (!q.contains(p.slice(offset, q.dim()))) return false;
    offset += q.dim();
  }
  return true;
}

bool ProductRect::triple_contains(const Point& p) const {
  int offset = 0;
  for (const auto& q : factors_) {
    if (!q.triple_contains(p.slice(offset, q.dim()))) return false;
    offset += q.dim();
  }
  return true;
}

Box ProductRect::box(int resolution) const {
  std::vector<Box> parts;
  for (const auto& q : factors_) parts.push_back(q.box(resolution));
  return box_product(parts);
}

Box ProductRect::triple_box(int resolution) const {
  std::vector<Box> parts;
  for (const auto& q : factors_) parts.push_back(q.triple_box(resolution));
  return box_product(parts);
}

ProductRect replace(const ProductRect& rect, const DyadicCube& cube, int j) {
  if (j < 0 || j >= rect.factors()) throw DimensionMismatchError("factor index out of range");
  if (rect.factor(j).dim() != cube.dim())
    throw DimensionMismatchError("replacement cube has dimension " + std::to_string(cube.dim()) + ", factor " +
                                 std::to_string(j) + " has " + std::to_string(rect.factor(j).dim()));
  std::vector<DyadicCube> factors = rect.cubes();
  factors[static_cast<std::size_t>(j)] = cube;
  return ProductRect(std::move(factors));
}

Box triple(const DyadicCube& cube, int resolution) { return cube.triple_box(resolution); }
Box triple(const ProductRect& rect, int resolution) { return rect.triple_box(resolution); }

DyadicCube minimal_cube(const Point& u, const Point& v) {
  if (u.dim() != v.dim()) throw DimensionMismatchError("minimal_cube: points of different dimension");
  if (!in_unit_domain(u) || !in_unit_domain(v)) throw ParameterError("minimal_cube: points must lie in [0,1)^d");
  if (same_point(u, v)) throw DegeneratePairError("minimal_cube: u == v");

  const int r = u.resolution;
  DyadicCube current = DyadicCube::unit(u.dim());
  // v in 3Q is monotone along the ancestor chain of u, so descend until it fails.
  for (int level = 0; level < r + 64; ++level) {
    std::vector<std::int64_t> idx(u.coords.size());
    for (std::size_t a = 0; a < idx.size(); ++a) {
      const std::int64_t c = u.coords[a];
      idx[a] = (level + 1 <= r) ? c / (std::int64_t{3} << (r - level - 1)) : (c << (level + 1 - r)) / 3;
    }
    DyadicCube child(level + 1, std::move(idx));
    if (!child.triple_contains(v)) return current;
    current = std::move(child);
  }
  throw EnumerationBoundError("minimal_cube: descent did not terminate");
}

Box min_rect(const Point& x, const Point& y) {
  if (x.dim() != y.dim()) throw DimensionMismatchError("min_rect: points of different dimension");
  const int res = std::max(x.resolution, y.resolution);
  Box out{{}, {}, res};
  for (std::size_t a = 0; a < x.coords.size(); ++a) {
    const std::int64_t xa = x.coords[a] << (res - x.resolution);
    const std::int64_t ya = y.coords[a] << (res - y.resolution);
    if (xa == ya) throw DegeneratePairError("min_rect: points share coordinate on axis " + std::to_string(a));
    out.lo.push_back(std::min(xa, ya));
    out.hi.push_back(std::max(xa, ya));
  }
  return out;
}

ProductRect product_minimal(const GridConfig& config, const Point& x, const Point& y) {
  if (x.dim() != config.total_dim() || y.dim() != config.total_dim())
    throw DimensionMismatchError("product_minimal: point dimension differs from grid");
  std::vector<DyadicCube> factors;
  for (int i = 0; i < config.factors(); ++i) {
    const int off = config.axis_offset(i);
    const int d = config.factor_dim(i);
    factors.push_back(minimal_cube(x.slice(off, d), y.slice(off, d)));
  }
  return ProductRect(std::move(factors));
}

ShiftCover shift_cover(const DyadicCube& cube) {
  if (!cube.is_standard()) throw ParameterError("shift_cover expects a standard dyadic cube");
  std::vector<int> tau(static_cast<std::size_t>(cube.dim()));
  std::vector<std::int64_t> idx(tau.size());
  for (std::size_t a = 0; a < tau.size(); ++a) {
    // Units of side(Q): 3Q = [m-1, m+2), candidate covers [8b, 8b+8).
    const std::int64_t m = cube.index()[a];
    const std::int64_t b = floor_div(m - 1, 8);
    const std::int64_t split = 8 * b + 8;
    if (m + 2 <= split) {
      tau[a] = 0;
      idx[a] = b;
    } else if (split - (m - 1) > (m + 2) - split) {
      tau[a] = 1;  // [8b, 8b+8) + 8/3
      idx[a] = b;
    } else {
      tau[a] = -1;  // [8b+8, 8b+16) - 8/3
      idx[a] = b + 1;
    }
  }
  return ShiftCover{tau, DyadicCube(cube.level() - 3, std::move(idx), tau)};
}

bool coordinate_distinct(const Point& x, const Point& y) {
  if (x.dim() != y.dim()) throw DimensionMismatchError("points of different dimension");
  for (std::size_t a = 0; a < x.coords.size(); ++a)
    if (compare_scaled(x.coords[a], x.resolution, y.coords[a], y.resolution) == 0) return false;
  return true;
}

}  // namespace rfrac
