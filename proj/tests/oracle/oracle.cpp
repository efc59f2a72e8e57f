#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

namespace oracle {
namespace {

Rational pow2(int k) {
  return k >= 0 ? Rational(1LL << k) : Rational(1, 1LL << -k);
}

long long floor_rat(const Rational& r) {
  long long q = r.numerator() / r.denominator();
  if (r.numerator() < 0 && q * r.denominator() != r.numerator()) --q;
  return q;
}

// Cube interval along one axis: [ (m + t/3) / 2^k, (m + 1 + t/3) / 2^k ).
std::pair<Rational, Rational> interval(const rfrac::DyadicCube& c, int axis) {
  const auto a = static_cast<std::size_t>(axis);
  const Rational lo = (Rational(c.index()[a]) + Rational(c.shift()[a], 3)) / pow2(c.level());
  return {lo, lo + Rational(1) / pow2(c.level())};
}

bool in_cube(const std::vector<Rational>& x, const std::vector<std::vector<long long>>& idx, int level,
             bool tripled) {
  const Rational side = Rational(1) / pow2(level);
  for (std::size_t a = 0; a < x.size(); ++a) {
    Rational lo = Rational(idx[0][a]) * side;
    Rational hi = lo + side;
    if (tripled) {
      lo -= side;
      hi += side;
    }
    if (x[a] < lo || !(x[a] < hi)) return false;
  }
  return true;
}

std::vector<Rational> coords(const rfrac::Point& p) {
  std::vector<Rational> x;
  for (int a = 0; a < p.dim(); ++a) x.push_back(coordinate(p, a));
  return x;
}

}  // namespace

Rational coordinate(const rfrac::Point& p, int axis) {
  return Rational(p.coords[static_cast<std::size_t>(axis)], 3LL << p.resolution);
}

double mass_direct(const rfrac::Weight& w, const rfrac::Box& box) {
  const auto& cfg = w.config();
  const int n = cfg.total_dim();
  const long long cells_per_axis = 3LL << cfg.depth();
  const auto density = w.density();
  const Rational unit(1, 3LL << box.resolution);
  long double total = 0.0L;
  std::vector<long long> c(static_cast<std::size_t>(n), 0);
  for (std::size_t cell = 0; cell < density.size(); ++cell) {
    std::size_t rem = cell;
    for (int a = n - 1; a >= 0; --a) {
      c[static_cast<std::size_t>(a)] = static_cast<long long>(rem % static_cast<std::size_t>(cells_per_axis));
      rem /= static_cast<std::size_t>(cells_per_axis);
    }
    Rational vol(1);
    for (int a = 0; a < n && vol.numerator() != 0; ++a) {
      const Rational lo(c[static_cast<std::size_t>(a)], cells_per_axis);
      const Rational hi(c[static_cast<std::size_t>(a)] + 1, cells_per_axis);
      const Rational blo = Rational(box.lo[static_cast<std::size_t>(a)]) * unit;
      const Rational bhi = Rational(box.hi[static_cast<std::size_t>(a)]) * unit;
      const Rational l = std::max(lo, blo);
      const Rational h = std::min(hi, bhi);
      vol = h > l ? vol * (h - l) : Rational(0);
    }
    if (vol.numerator() != 0) total += static_cast<long double>(density[cell]) * boost::rational_cast<long double>(vol);
  }
  return static_cast<double>(total);
}

double mlinear_direct(const std::function<double(const rfrac::ProductRect&)>& kernel,
                      std::span<const rfrac::Weight* const> weights,
                      std::span<const rfrac::GridFunction* const> functions) {
  const auto& cfg = weights.front()->config();
  if (cfg.depth() > 3) throw std::invalid_argument("mlinear_direct: depth must be <= 3");
  const auto& dims = cfg.dims();
  const int nf = static_cast<int>(dims.size());
  const int depth = cfg.depth();
  const long long cells_per_axis = 3LL << depth;
  const int n = cfg.total_dim();

  // Cell centers as rationals.
  std::vector<std::vector<Rational>> centers(cfg.cell_count());
  for (std::size_t cell = 0; cell < centers.size(); ++cell) {
    std::size_t rem = cell;
    std::vector<Rational> x(static_cast<std::size_t>(n));
    for (int a = n - 1; a >= 0; --a) {
      const auto i = static_cast<long long>(rem % static_cast<std::size_t>(cells_per_axis));
      rem /= static_cast<std::size_t>(cells_per_axis);
      x[static_cast<std::size_t>(a)] = Rational(2 * i + 1, 2 * cells_per_axis);
    }
    centers[cell] = std::move(x);
  }

  double total = 0.0;
  std::vector<int> levels(static_cast<std::size_t>(nf), 0);
  while (true) {
    // Every index tuple for these levels.
    std::vector<long long> idx(static_cast<std::size_t>(n), 0);
    while (true) {
      std::vector<rfrac::DyadicCube> cubes;
      int axis = 0;
      for (int i = 0; i < nf; ++i) {
        std::vector<std::int64_t> m;
        for (int a = 0; a < dims[static_cast<std::size_t>(i)]; ++a) m.push_back(idx[static_cast<std::size_t>(axis++)]);
        cubes.emplace_back(levels[static_cast<std::size_t>(i)], m);
      }
      const rfrac::ProductRect rect(cubes);
      double term = kernel(rect);
      for (std::size_t k = 0; k < weights.size() && term != 0.0; ++k) {
        const auto mass = weights[k]->cell_masses();
        const auto f = functions[k]->values();
        double integral = 0.0;
        for (std::size_t cell = 0; cell < centers.size(); ++cell) {
          bool inside = true;
          int ax = 0;
          for (int i = 0; i < nf && inside; ++i) {
            const Rational side = Rational(1) / pow2(levels[static_cast<std::size_t>(i)]);
            for (int a = 0; a < dims[static_cast<std::size_t>(i)]; ++a, ++ax) {
              const Rational lo = Rational(idx[static_cast<std::size_t>(ax)]) * side;
              const Rational& x = centers[cell][static_cast<std::size_t>(ax)];
              if (x < lo || !(x < lo + side)) {
                inside = false;
                break;
              }
            }
          }
          if (inside) integral += f[cell] * mass[cell];
        }
        term *= std::abs(integral);
      }
      total += term;
      int a = n - 1;
      for (; a >= 0; --a) {
        const int lvl = levels[static_cast<std::size_t>(cfg.factor_of_axis(a))];
        if (++idx[static_cast<std::size_t>(a)] < (1LL << lvl)) break;
        idx[static_cast<std::size_t>(a)] = 0;
      }
      if (a < 0) break;
    }
    int i = nf - 1;
    for (; i >= 0; --i) {
      if (++levels[static_cast<std::size_t>(i)] <= depth) break;
      levels[static_cast<std::size_t>(i)] = 0;
    }
    if (i < 0) break;
  }
  return total;
}

rfrac::DyadicCube minimal_cube_exhaustive(const rfrac::Point& u, const rfrac::Point& v) {
  const auto x = coords(u);
  const auto y = coords(v);
  const int max_level = std::max(u.resolution, v.resolution) + 4;
  std::optional<rfrac::DyadicCube> best;
  for (int k = 0; k <= max_level; ++k) {
    std::vector<std::vector<long long>> idx(1);
    for (const auto& xa : x) idx[0].push_back(floor_rat(xa * pow2(k)));
    if (!in_cube(x, idx, k, false)) throw std::logic_error("oracle: u outside its own cube");
    if (in_cube(y, idx, k, true)) best = rfrac::DyadicCube(k, std::vector<std::int64_t>(idx[0].begin(), idx[0].end()));
  }
  if (!best) throw std::invalid_argument("oracle: v not in 3[0,1)^d");
  return *best;
}

bool triple_inside(const rfrac::DyadicCube& q, const rfrac::DyadicCube& p) {
  for (int a = 0; a < q.dim(); ++a) {
    const auto [qlo, qhi] = interval(q, a);
    const Rational side = qhi - qlo;
    const auto [plo, phi] = interval(p, a);
    if (qlo - side < plo || qhi + side > phi) return false;
  }
  return true;
}

std::vector<rfrac::DyadicCube> shift_cover_exhaustive(const rfrac::DyadicCube& q) {
  const int d = q.dim();
  const int k = q.level() - 3;
  std::vector<rfrac::DyadicCube> out;
  // tau digits 0, +1, -1 per axis; P indices near floor(x / side).
  std::vector<int> digit(static_cast<std::size_t>(d), 0);
  static constexpr int kTau[3] = {0, 1, -1};
  while (true) {
    std::vector<int> tau;
    for (int t : digit) tau.push_back(kTau[t]);
    std::vector<std::vector<long long>> candidates(static_cast<std::size_t>(d));
    for (int a = 0; a < d; ++a) {
      const auto [qlo, qhi] = interval(q, a);
      const long long center = floor_rat(qlo * pow2(k));
      for (long long m = center - 3; m <= center + 3; ++m) candidates[static_cast<std::size_t>(a)].push_back(m);
    }
    std::vector<std::size_t> pick(static_cast<std::size_t>(d), 0);
    while (true) {
      std::vector<std::int64_t> m;
      for (int a = 0; a < d; ++a) m.push_back(candidates[static_cast<std::size_t>(a)][pick[static_cast<std::size_t>(a)]]);
      const rfrac::DyadicCube p(k, m, tau);
      if (triple_inside(q, p)) out.push_back(p);
      int a = d - 1;
      for (; a >= 0; --a) {
        if (++pick[static_cast<std::size_t>(a)] < candidates[static_cast<std::size_t>(a)].size()) break;
        pick[static_cast<std::size_t>(a)] = 0;
      }
      if (a < 0) break;
    }
    int a = d - 1;
    for (; a >= 0; --a) {
      if (++digit[static_cast<std::size_t>(a)] < 3) break;
      digit[static_cast<std::size_t>(a)] = 0;
    }
    if (a < 0) break;
  }
  return out;
}

double kernel_sum_direct(const rfrac::Weight& mu, double power, const rfrac::Point& x, const rfrac::Point& y) {
  const auto& cfg = mu.config();
  const auto& dims = cfg.dims();
  const int nf = static_cast<int>(dims.size());
  const auto xr = coords(x);
  const auto yr = coords(y);
  const int res = cfg.resolution();
  double total = 0.0;
  std::vector<int> levels(static_cast<std::size_t>(nf), 0);
  while (true) {
    bool ok = true;
    rfrac::Box box{{}, {}, res};
    int axis = 0;
    for (int i = 0; i < nf && ok; ++i) {
      const int k = levels[static_cast<std::size_t>(i)];
      for (int a = 0; a < dims[static_cast<std::size_t>(i)]; ++a, ++axis) {
        const long long m = floor_rat(xr[static_cast<std::size_t>(axis)] * pow2(k));
        const Rational side = Rational(1) / pow2(k);
        const Rational lo = Rational(m) * side;
        const Rational& yy = yr[static_cast<std::size_t>(axis)];
        if (yy < lo - side || !(yy < lo + 2 * side)) ok = false;
        const long long scale = (3LL << res) >> k;
        box.lo.push_back(m * scale);
        box.hi.push_back((m + 1) * scale);
      }
    }
    if (ok) {
      const double m = mass_direct(mu, box);
      if (m > 0.0) total += std::pow(m, power);
    }
    int i = nf - 1;
    for (; i >= 0; --i) {
      if (++levels[static_cast<std::size_t>(i)] <= cfg.depth()) break;
      levels[static_cast<std::size_t>(i)] = 0;
    }
    if (i < 0) break;
  }
  return total;
}

}  // namespace oracle
