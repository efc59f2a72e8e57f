#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "rfrac/conditions.hpp"
#include "rfrac/errors.hpp"

using namespace rfrac;

TEST_CASE("uniform doubling and reverse doubling") {
  for (auto dims : {std::vector<int>{1}, std::vector<int>{1, 1}, std::vector<int>{2, 1}, std::vector<int>{2}}) {
    Weight w = gen_uniform(GridConfig(dims, 3));
    const int max_n = *std::max_element(dims.begin(), dims.end());
    const int min_n = *std::min_element(dims.begin(), dims.end());
    ConstantReport d = doubling_constant(w);
    ConstantReport g = reverse_doubling_constant(w);
    CHECK(d.value == doctest::Approx(std::ldexp(1.0, max_n)).epsilon(1e-12));
    CHECK(g.value == doctest::Approx(std::ldexp(1.0, min_n)).epsilon(1e-12));
    CHECK_FALSE(d.infinite);
    CHECK(d.per_factor.size() == dims.size());
    CHECK(d.depth == 3);
    CHECK(d.family_size > 0);
  }
}

TEST_CASE("witness reproduces the reported ratio") {
  Weight w = gen_cascade(GridConfig({1, 1}, 4), 3.0, 31);
  for (const auto& rep : {doubling_constant(w), reverse_doubling_constant(w)}) {
    REQUIRE(rep.witness.has_value());
    const auto& wit = *rep.witness;
    REQUIRE(wit.factor.has_value());
    REQUIRE(wit.child.has_value());
    const double ratio = w.mass(wit.rect) / w.mass(replace(wit.rect, *wit.child, *wit.factor));
    CHECK(ratio == doctest::Approx(rep.value).epsilon(1e-13));
  }
}

TEST_CASE("a zero cube makes the doubling constant infinite") {
  // the first quarter carries no mass
  GridConfig cfg({1}, 2);
  std::vector<double> dens(cfg.cell_count(), 1.0);
  dens[0] = dens[1] = dens[2] = 0.0;
  Weight w(cfg, dens);
  ConstantReport d = doubling_constant(w);
  CHECK(d.infinite);
  REQUIRE(d.witness.has_value());
  CHECK(w.mass(replace(d.witness->rect, *d.witness->child, *d.witness->factor)) == 0.0);
  CHECK(w.mass(d.witness->rect) > 0.0);
  ConstantReport g = reverse_doubling_constant(w);
  CHECK_FALSE(g.infinite);
  CHECK(std::isfinite(g.value));
}

TEST_CASE("remark bounds on cascades") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const double rho = 1.5 + 0.5 * static_cast<double>(seed % 3);
    Weight w = gen_cascade(GridConfig({1, 1}, 4), rho, seed);
    ConstantReport d = doubling_constant(w);
    ConstantReport g = reverse_doubling_constant(w);
    for (std::size_t j = 0; j < 2; ++j)
      CHECK(g.per_factor[j] >= (1.0 + 1.0 / d.per_factor[j]) * (1 - 1e-12));
    if (g.value > 1.0) CHECK(d.value <= g.value / (g.value - 1.0) * (1 + 1e-12));
    for (double eps : {0.25, 0.5, 1.0}) {
      ConstantReport c = condition_d_constant(w, eps, g.value);
      CHECK(c.value <= reverse_doubling_series(g.value, eps, 4) * (1 + 1e-12));
      REQUIRE(c.tail_bound.has_value());
      CHECK(*c.tail_bound > 0.0);
    }
  }
}

TEST_CASE("condition (D) on the uniform weight") {
  for (int k = 1; k <= 5; ++k) {
    Weight w = gen_uniform(GridConfig({1, 1}, k));
    ConstantReport c = condition_d_constant(w, 1.0);
    CHECK(c.value == doctest::Approx(2.0 - std::ldexp(1.0, -k)).epsilon(1e-13));
    CHECK_FALSE(c.tail_bound.has_value());
  }
  Weight w = gen_uniform(GridConfig({1}, 4));
  CHECK(condition_d_constant(w, 60.0).value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(condition_d_constant(w, 0.0), ParameterError);
  CHECK_THROWS_AS(condition_d_constant(w, -1.0), ParameterError);
}

TEST_CASE("reverse doubling series") {
  CHECK(reverse_doubling_series(2.0, 1.0, 0) == 1.0);
  CHECK(reverse_doubling_series(2.0, 1.0, 3) == doctest::Approx(1.875));
  CHECK(reverse_doubling_series(4.0, 0.5, 10) <= 2.0);
}

TEST_CASE("Fefferman-Phong constant") {
  GridConfig cfg({1, 1}, 3);
  Weight mu = gen_cascade(cfg, 2.0, 3);
  const double alpha = 0.5;
  const double p = 1.5;
  ExponentConfig e = ExponentConfig::hls_from_p(2, alpha, p);
  const Weight* ws[] = {&mu, &mu};
  const double ex[] = {p, conjugate(e.q())};
  ConstantReport fp = fp_constant(Kernel::fractional(mu, alpha), ws, ex);
  CHECK(fp.value == doctest::Approx(1.0).epsilon(1e-9));

  CHECK(fp_constant(Kernel::zero(cfg), ws, ex).value == 0.0);

  ProductRect r0({DyadicCube(1, {1}), DyadicCube(2, {2})});
  ConstantReport one = fp_constant(Kernel::indicator(cfg, r0), ws, ex);
  const double expect = std::pow(mu.mass(r0), 1.0 / conjugate(ex[0])) * std::pow(mu.mass(r0), 1.0 / conjugate(ex[1]));
  CHECK(one.value == doctest::Approx(expect).epsilon(1e-13));
  REQUIRE(one.witness.has_value());
  CHECK(one.witness->rect == r0);

  const double bad[] = {3.0, 3.0};
  CHECK_THROWS_AS(fp_constant(Kernel::zero(cfg), ws, bad), ParameterError);
}

TEST_CASE("Carleson testing constant") {
  for (int k = 1; k <= 5; ++k) {
    Weight w = gen_uniform(GridConfig({1, 1}, k));
    CHECK(carleson_testing_constant(w, 2.0, 4.0).value == doctest::Approx(2.0 - std::ldexp(1.0, -k)).epsilon(1e-13));
  }
  Weight w = gen_cascade(GridConfig({1, 1}, 4), 2.0, 1);
  const double g = reverse_doubling_constant(w).value;
  CHECK(carleson_testing_constant(w, 2.0, 4.0).value <= 1.0 / (1.0 - std::pow(g, 2.0 / 4.0 - 1.0)));
  CHECK(carleson_testing_constant(gen_uniform(GridConfig({1}, 4)), 1.01, 80.0).value ==
        doctest::Approx(1.0).epsilon(1e-9));
  CHECK_THROWS_AS(carleson_testing_constant(w, 3.0, 2.0), ParameterError);
  CHECK_THROWS_AS(carleson_testing_constant(w, 1.0, 2.0), ParameterError);
}

TEST_CASE("constants are monotone in depth") {
  double d_prev = 0.0, c_prev = 0.0, g_prev = 1e300;
  for (int k = 1; k <= 5; ++k) {
    Weight w = gen_cascade(GridConfig({1, 1}, k), 3.0, 44);
    const double d = doubling_constant(w).value;
    const double g = reverse_doubling_constant(w).value;
    const double c = condition_d_constant(w, 0.5).value;
    CHECK(d >= d_prev * (1 - 1e-12));
    CHECK(g <= g_prev * (1 + 1e-12));
    CHECK(c >= c_prev * (1 - 1e-12));
    d_prev = d;
    g_prev = g;
    c_prev = c;
  }
}
