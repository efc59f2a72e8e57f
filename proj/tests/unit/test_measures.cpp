#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "oracle.hpp"
#include "rfrac/conditions.hpp"
#include "rfrac/errors.hpp"
#include "rfrac/measures.hpp"

using namespace rfrac;

namespace {

DyadicCube cube1(int level, std::int64_t m) { return DyadicCube(level, {m}); }

Box random_box(Rng& rng, const GridConfig& cfg, int res) {
  Box b;
  b.resolution = res;
  const auto units = static_cast<std::uint64_t>(3) << res;
  for (int a = 0; a < cfg.total_dim(); ++a) {
    auto x = static_cast<std::int64_t>(rng.below(units + 8)) - 4;
    auto y = static_cast<std::int64_t>(rng.below(units + 8)) - 4;
    if (x > y) std::swap(x, y);
    b.lo.push_back(x);
    b.hi.push_back(y + 1);
  }
  return b;
}

}  // namespace

TEST_CASE("uniform mass of a rectangle") {
  GridConfig cfg({1, 1}, 3);
  Weight w = gen_uniform(cfg);
  for (double d : w.density()) REQUIRE(d == 1.0);
  ProductRect r({cube1(1, 0), cube1(2, 1)});
  CHECK(w.mass(r) == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(w.mass(r.box(cfg.resolution())) == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(w.mass(ProductRect({DyadicCube::unit(1), DyadicCube::unit(1)})) == doctest::Approx(w.total_mass()));
  CHECK(w.total_mass() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("tree and prefix masses agree with direct summation") {
  Rng rng(21);
  for (auto dims : {std::vector<int>{1}, std::vector<int>{2}, std::vector<int>{1, 1}, std::vector<int>{1, 2}}) {
    GridConfig cfg(dims, dims == std::vector<int>{1} ? 5 : 3);
    Weight w = gen_cascade(cfg, 3.0, 77);
    const auto& fam = w.family();
    for (int t = 0; t < 100; ++t) {
      const std::size_t id = rng.below(fam.size());
      ProductRect r = fam.rect(id);
      const double direct = oracle::mass_direct(w, r.box(cfg.resolution()));
      REQUIRE(testing::rel_close(w.mass(r), direct, 1e-12));
      REQUIRE(testing::rel_close(w.mass(r.box(cfg.resolution())), direct, 1e-12));
    }
    for (int t = 0; t < 100; ++t) {
      Box b = random_box(rng, cfg, cfg.resolution() + 1);
      REQUIRE(testing::rel_close(w.mass(b), oracle::mass_direct(w, b), 1e-12));
    }
  }
}

TEST_CASE("shifted cube masses include only the overlap") {
  GridConfig cfg({1}, 3);
  Weight w = gen_uniform(cfg);
  // [-1/3, 2/3)
  CHECK(w.mass(ProductRect({DyadicCube(0, {0}, {-1})})) == doctest::Approx(2.0 / 3.0));
  // 2^-1 (1 - 1/3 + [0,1)) = [1/3, 5/6)
  CHECK(w.mass(ProductRect({DyadicCube(1, {1}, {-1})})) == doctest::Approx(0.5));
}

TEST_CASE("integrals") {
  GridConfig cfg({1, 1}, 3);
  Weight w = gen_cascade(cfg, 2.0, 4);
  Rng rng(8);
  GridFunction f = testing::random_function(cfg, rng);
  GridFunction one = GridFunction::constant(cfg, 1.0);
  const auto& fam = w.family();
  for (std::size_t id = 0; id < fam.size(); id += 7) {
    ProductRect r = fam.rect(id);
    CHECK(integrate(w, one, r) == doctest::Approx(w.mass(r)).epsilon(1e-13));
    for (int j = 0; j < 2; ++j) {
      if (r.factor(j).level() == cfg.depth()) continue;
      double sum = 0.0;
      for (const auto& q : r.factor(j).children()) sum += integrate(w, f, replace(r, q, j));
      CHECK(sum == doctest::Approx(integrate(w, f, r)).epsilon(1e-13));
    }
  }
  ProductRect s({cube1(2, 1), cube1(1, 0)});
  GridFunction ind = GridFunction::indicator(cfg, s);
  CHECK(integrate(w, ind, ProductRect({cube1(1, 0), DyadicCube::unit(1)})) == doctest::Approx(w.mass(s)).epsilon(1e-13));
  CHECK(integrate(w, ind, s.box(cfg.resolution())) == doctest::Approx(w.mass(s)).epsilon(1e-13));
}

TEST_CASE("lp norms") {
  GridConfig cfg({1, 1}, 3);
  Weight u = gen_uniform(cfg);
  CHECK(lp_norm(u, GridFunction::constant(cfg, 2.5), 3.0) == doctest::Approx(2.5).epsilon(1e-14));

  Weight w = gen_cascade(cfg, 2.0, 6);
  ProductRect r({cube1(2, 3), cube1(1, 0)});
  CHECK(lp_norm(w, GridFunction::indicator(cfg, r), 1.5) == doctest::Approx(std::pow(w.mass(r), 1.0 / 1.5)).epsilon(1e-13));

  Rng rng(10);
  for (int t = 0; t < 50; ++t) {
    GridFunction f = testing::random_function(cfg, rng);
    GridFunction g = testing::random_function(cfg, rng);
    std::vector<double> fg(cfg.cell_count());
    for (std::size_t c = 0; c < fg.size(); ++c) fg[c] = f[c] * g[c];
    const double p = 1.1 + 3.0 * rng.uniform();
    const double lhs = integrate(w, GridFunction(cfg, fg), ProductRect({DyadicCube::unit(1), DyadicCube::unit(1)}));
    CHECK(lhs <= lp_norm(w, f, p) * lp_norm(w, g, p / (p - 1.0)) * (1 + 1e-12));
  }
  CHECK_THROWS_AS(lp_norm(w, GridFunction::constant(cfg, 1.0), 1.0), ParameterError);
}

TEST_CASE("pairwise sum is order fixed") {
  std::vector<double> v{1e16, 1.0, -1e16, 1.0};
  CHECK(pairwise_sum(v) == pairwise_sum(v));
  std::vector<double> ones(1000, 0.1);
  CHECK(pairwise_sum(ones) == doctest::Approx(100.0).epsilon(1e-13));
  CHECK(pairwise_sum(std::vector<double>{}) == 0.0);
}

TEST_CASE("power weights use the exact antiderivative") {
  GridConfig cfg({1}, 4);
  Weight lin = gen_power(cfg, {1.0}, {0.0});
  CHECK(lin.total_mass() == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(lin.mass(ProductRect({cube1(1, 0)})) == doctest::Approx(0.125).epsilon(1e-14));

  Weight sing = gen_power(cfg, {-0.5}, {0.5});
  CHECK(sing.mass(ProductRect({cube1(1, 0)})) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(sing.total_mass() == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-14));

  GridConfig cfg2({1, 1}, 3);
  Weight prod = gen_power(cfg2, {1.0, 2.0}, {0.0});
  CHECK(prod.total_mass() == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
  CHECK_THROWS_AS(gen_power(cfg, {-1.0}, {0.5}), ParameterError);
  CHECK_THROWS_AS(gen_power(cfg2, {1.0, 1.0, 1.0}, {0.5}), DimensionMismatchError);
}

TEST_CASE("cascade weights") {
  GridConfig cfg({1, 1}, 4);
  CHECK_THROWS_AS(gen_cascade(cfg, 1.0, 1), ParameterError);
  CHECK_THROWS_AS(gen_cascade(cfg, 4.5, 1), ParameterError);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Weight w = gen_cascade(cfg, 2.0, seed);
    for (double m : w.tree()) REQUIRE(m > 0.0);
    CHECK(doubling_constant(w).value <= 3.0 + 1e-12);
    CHECK(w.total_mass() == doctest::Approx(1.0).epsilon(1e-13));
  }
  Weight a = gen_cascade(cfg, 2.0, 5);
  Weight b = gen_cascade(cfg, 2.0, 5);
  CHECK(std::equal(a.density().begin(), a.density().end(), b.density().begin()));

  // rho close to 1 is nearly uniform
  Weight near = gen_cascade(cfg, 1.0 + 1e-9, 3);
  for (double d : near.density()) REQUIRE(d == doctest::Approx(1.0).epsilon(1e-7));

  // the same interval gets the same split at every depth
  Weight coarse = gen_cascade(GridConfig({1, 1}, 2), 2.0, 5);
  ProductRect r({cube1(2, 1), cube1(1, 1)});
  CHECK(coarse.mass(r) == doctest::Approx(a.mass(r)).epsilon(1e-13));
}

TEST_CASE("zero cells and invalid densities") {
  GridConfig cfg({1}, 2);
  Weight w = with_zero_cell(gen_uniform(cfg), 0);
  CHECK(w.density()[0] == 0.0);
  CHECK(w.meta().params["zeroed_cell"] == 0);
  CHECK_THROWS_AS(Weight(cfg, std::vector<double>(cfg.cell_count(), 0.0)), ParameterError);
  std::vector<double> neg(cfg.cell_count(), 1.0);
  neg[3] = -1.0;
  CHECK_THROWS_AS(Weight(cfg, neg), ParameterError);
  CHECK_THROWS_AS(Weight(cfg, std::vector<double>(5, 1.0)), DimensionMismatchError);
}

TEST_CASE("grid function upsampling") {
  GridConfig cfg({1, 1}, 2);
  Rng rng(2);
  GridFunction f = testing::random_function(cfg, rng);
  GridFunction g = f.upsample();
  CHECK(g.config().depth() == 3);
  Weight u2 = gen_uniform(cfg);
  Weight u3 = gen_uniform(cfg.with_depth(3));
  ProductRect r({cube1(1, 1), cube1(2, 0)});
  CHECK(integrate(u3, g, r) == doctest::Approx(integrate(u2, f, r)).epsilon(1e-13));
}
