#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "oracle.hpp"
#include "rfrac/dyadic.hpp"
#include "rfrac/errors.hpp"
#include "rfrac/rng.hpp"

using namespace rfrac;

namespace {

DyadicCube cube1(int level, std::int64_t m, int shift = 0) { return DyadicCube(level, {m}, {shift}); }

// exact interval [lo, hi) of a 1-d cube, as rationals
std::pair<oracle::Rational, oracle::Rational> interval(const DyadicCube& q) {
  auto to_r = [](ExactCoord c) {
    oracle::Rational r(c.num, 3);
    if (c.exp >= 0) return r / (1LL << c.exp);
    return r * (1LL << -c.exp);
  };
  return {to_r(q.lower(0)), to_r(q.upper(0))};
}

}  // namespace

TEST_CASE("children of the unit interval and square") {
  auto kids = DyadicCube::unit(1).children();
  REQUIRE(kids.size() == 2);
  CHECK(interval(kids[0]) == std::pair{oracle::Rational(0), oracle::Rational(1, 2)});
  CHECK(interval(kids[1]) == std::pair{oracle::Rational(1, 2), oracle::Rational(1)});
  auto quarters = DyadicCube::unit(2).children();
  CHECK(quarters.size() == 4);
  for (const auto& q : quarters) CHECK(q.level() == 1);
}

TEST_CASE("children of a one-third shifted interval") {
  DyadicCube q = cube1(0, 0, 1);  // [1/3, 4/3)
  CHECK(interval(q) == std::pair{oracle::Rational(1, 3), oracle::Rational(4, 3)});
  auto kids = q.children();
  REQUIRE(kids.size() == 2);
  CHECK(interval(kids[0]) == std::pair{oracle::Rational(1, 3), oracle::Rational(5, 6)});
  CHECK(interval(kids[1]) == std::pair{oracle::Rational(5, 6), oracle::Rational(4, 3)});
  CHECK(kids[0].shift()[0] == -1);
  CHECK(kids[0].parent() == q);
  CHECK(kids[1].parent() == q);
}

TEST_CASE("children past the depth bound throw") {
  CHECK_THROWS_AS(cube1(3, 0).children(3), EnumerationBoundError);
}

TEST_CASE("parent examples and inverse property") {
  CHECK(cube1(1, 1).parent() == DyadicCube::unit(1));
  CHECK(cube1(2, 0).parent() == cube1(1, 0));

  Rng rng(17);
  for (int t = 0; t < 10000; ++t) {
    const int d = 1 + static_cast<int>(rng.below(2));
    const int level = static_cast<int>(rng.below(12)) - 4;
    std::vector<std::int64_t> idx;
    std::vector<int> sh;
    for (int a = 0; a < d; ++a) {
      idx.push_back(static_cast<std::int64_t>(rng.below(64)) - 32);
      sh.push_back(static_cast<int>(rng.below(3)) - 1);
    }
    DyadicCube q(level, idx, sh);
    for (const auto& c : q.children(kMaxDepth + 8)) {
      REQUIRE(c.parent() == q);
      REQUIRE(c.subset_of(q));
    }
  }
}

TEST_CASE("replace realizes the factor substitution") {
  ProductRect r({DyadicCube::unit(1), DyadicCube::unit(1)});
  ProductRect expect({cube1(1, 0), DyadicCube::unit(1)});
  CHECK(replace(r, cube1(1, 0), 0) == expect);
  CHECK(replace(r, r.factor(1), 1) == r);
  CHECK(replace(replace(expect, cube1(3, 5), 1), expect.factor(1), 1) == expect);
  CHECK_THROWS_AS(replace(r, DyadicCube::unit(2), 0), DimensionMismatchError);
}

TEST_CASE("triple boxes") {
  // unit 1/(3*2^2) = 1/12
  Box t = triple(DyadicCube::unit(1), 2);
  CHECK(t.lo == std::vector<std::int64_t>{-12});
  CHECK(t.hi == std::vector<std::int64_t>{24});

  ProductRect r({cube1(1, 0), cube1(1, 1)});
  Box t2 = triple(r, 2);
  CHECK(t2.lo == std::vector<std::int64_t>{-6, 0});
  CHECK(t2.hi == std::vector<std::int64_t>{12, 18});
}

TEST_CASE("triple of a cube sits inside the triple of its parent") {
  for (int level = 1; level <= 6; ++level) {
    const std::int64_t count = std::int64_t{1} << level;
    for (std::int64_t m = 0; m < count; ++m) {
      DyadicCube q = cube1(level, m);
      Box a = triple(q, 7);
      Box b = triple(q.parent(), 7);
      REQUIRE(a.lo[0] >= b.lo[0]);
      REQUIRE(a.hi[0] <= b.hi[0]);
    }
  }
}

TEST_CASE("minimal cube examples") {
  // 1/12 and 5/12 in the unit 1/24
  Point u{{2}, 3};
  Point v{{10}, 3};
  CHECK(minimal_cube(u, v) == cube1(2, 0));
  // 0.1 and 0.4 to the nearest 1/768
  CHECK(minimal_cube(testing::approx_point({0.1}, 8), testing::approx_point({0.4}, 8)) == cube1(2, 0));
  CHECK(minimal_cube(Point{{6}, 3}, Point{{18}, 3}) == cube1(1, 0));
  CHECK_THROWS_AS(minimal_cube(u, u), DegeneratePairError);
  CHECK_THROWS_AS(minimal_cube(Point{{-1}, 3}, v), ParameterError);
}

TEST_CASE("minimal cube agrees with the exhaustive scan") {
  Rng rng(5);
  for (int t = 0; t < 2000; ++t) {
    const int d = 1 + static_cast<int>(rng.below(2));
    const int res = 1 + static_cast<int>(rng.below(6));
    Point u = testing::random_point(rng, d, res);
    Point v = testing::random_point(rng, d, res);
    if (u == v) continue;
    REQUIRE(minimal_cube(u, v) == oracle::minimal_cube_exhaustive(u, v));
  }
}

TEST_CASE("minimal rectangle") {
  Point x{{6}, 3};
  Point y{{18}, 3};
  Box r = min_rect(x, y);
  CHECK(r.lo == std::vector<std::int64_t>{6});
  CHECK(r.hi == std::vector<std::int64_t>{18});
  CHECK(min_rect(y, x) == r);

  Point a = testing::approx_point({0.1, 0.9}, 4);
  Point b = testing::approx_point({0.6, 0.2}, 4);
  Box r2 = min_rect(a, b);
  CHECK(r2.lo == std::vector<std::int64_t>{a.coords[0], b.coords[1]});
  CHECK(r2.hi == std::vector<std::int64_t>{b.coords[0], a.coords[1]});
  CHECK_THROWS_AS(min_rect(a, Point{{a.coords[0], 1}, 4}), DegeneratePairError);
}

TEST_CASE("product minimal rect") {
  GridConfig cfg({1, 1}, 6);
  Point x = testing::approx_point({0.1, 0.1}, cfg.resolution());
  Point y = testing::approx_point({0.4, 0.4}, cfg.resolution());
  ProductRect r = product_minimal(cfg, x, y);
  CHECK(r == ProductRect({cube1(2, 0), cube1(2, 0)}));

  Rng rng(9);
  for (int t = 0; t < 500; ++t) {
    Point a = testing::random_point(rng, 2, cfg.resolution());
    Point b = testing::random_point(rng, 2, cfg.resolution());
    if (!coordinate_distinct(a, b)) continue;
    ProductRect q = product_minimal(cfg, a, b);
    REQUIRE(q.contains(a));
    REQUIRE(q.triple_contains(b));
  }
}

TEST_CASE("shift cover examples") {
  ShiftCover c = shift_cover(DyadicCube::unit(1));
  CHECK(c.tau == std::vector<int>{-1});
  CHECK(interval(c.cover) == std::pair{oracle::Rational(-8, 3), oracle::Rational(16, 3)});

  ShiftCover h = shift_cover(cube1(1, 0));
  CHECK(h.tau == std::vector<int>{-1});
  CHECK(interval(h.cover) == std::pair{oracle::Rational(-4, 3), oracle::Rational(8, 3)});

  CHECK_THROWS_AS(shift_cover(cube1(0, 0, 1)), ParameterError);
}

TEST_CASE("shift cover lies in the exhaustive set") {
  for (int level = -3; level <= 4; ++level) {
    for (std::int64_t m = -4; m < 8; ++m) {
      for (std::int64_t n = -2; n < 3; ++n) {
        DyadicCube q(level, {m, n});
        ShiftCover c = shift_cover(q);
        REQUIRE(c.cover.level() == level - 3);
        REQUIRE(c.cover.shift() == c.tau);
        REQUIRE(oracle::triple_inside(q, c.cover));
        auto valid = oracle::shift_cover_exhaustive(q);
        REQUIRE(std::find(valid.begin(), valid.end(), c.cover) != valid.end());
      }
    }
  }
}

TEST_CASE("exact coordinates compare across exponents") {
  CHECK(ExactCoord{3, 1} == ExactCoord{6, 2});
  CHECK(ExactCoord{-1, 0} < ExactCoord{0, 5});
  CHECK(ExactCoord{7, 3} > ExactCoord{3, 2});
  CHECK(ExactCoord{3, -2}.value() == doctest::Approx(4.0));
}
