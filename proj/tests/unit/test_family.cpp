#include <doctest.h>

#include <numeric>

#include "helpers.hpp"
#include "rfrac/errors.hpp"
#include "rfrac/family.hpp"

using namespace rfrac;

namespace {

// rect sums by cell-center membership, one rect at a time
std::vector<double> brute_sums(const RectFamily& fam, std::span<const double> cells) {
  const GridConfig& cfg = fam.config();
  const auto n = static_cast<std::size_t>(cfg.total_dim());
  std::vector<double> out(fam.size(), 0.0);
  for (std::size_t id = 0; id < fam.size(); ++id) {
    ProductRect r = fam.rect(id);
    for (std::size_t c = 0; c < cfg.cell_count(); ++c) {
      std::vector<std::int64_t> cell(n);
      std::size_t rest = c;
      for (std::size_t a = 0; a < n; ++a) {
        cell[a] = static_cast<std::int64_t>(rest / cfg.cell_strides()[a]);
        rest %= cfg.cell_strides()[a];
      }
      if (r.contains(cell_center(cfg, cell))) out[id] += cells[c];
    }
  }
  return out;
}

}  // namespace

TEST_CASE("family sizes") {
  CHECK(RectFamily(GridConfig({1}, 2)).size() == 7);
  CHECK(RectFamily(GridConfig({1, 1}, 1)).size() == 9);
  for (int k = 1; k <= 8; ++k) CHECK(RectFamily(GridConfig({1}, k)).size() == (std::size_t{2} << k) - 1);
  CHECK(RectFamily(GridConfig({2}, 2)).size() == 1 + 4 + 16);
  // a shifted interval family has 2^k + 1 members at level k
  CHECK(RectFamily(GridConfig({1}, 2), {1}).size() == 2 + 3 + 5);
  CHECK(enumerate_rects(GridConfig({1, 1}, 2)).size() == 49);
}

TEST_CASE("enumeration order is level-major then row-major") {
  auto rects = enumerate_rects(GridConfig({1, 1}, 1));
  REQUIRE(rects.size() == 9);
  CHECK(rects[0].levels() == std::vector<int>{0, 0});
  CHECK(rects[1].levels() == std::vector<int>{0, 1});
  CHECK(rects[1].factor(1).index()[0] == 0);
  CHECK(rects[2].factor(1).index()[0] == 1);
  CHECK(rects[3].levels() == std::vector<int>{1, 0});
  CHECK(rects[5].levels() == std::vector<int>{1, 1});
  CHECK(rects[6].factor(0).index()[0] == 0);
  CHECK(rects[6].factor(1).index()[0] == 1);
}

TEST_CASE("find inverts rect") {
  for (auto tau : all_shifts(2)) {
    RectFamily fam(GridConfig({1, 1}, 3), tau);
    for (std::size_t id = 0; id < fam.size(); ++id) {
      auto found = fam.find(fam.rect(id));
      REQUIRE(found.has_value());
      REQUIRE(*found == id);
    }
  }
  RectFamily fam(GridConfig({1}, 2));
  CHECK_FALSE(fam.find(ProductRect({DyadicCube(1, {5})})).has_value());
}

TEST_CASE("all shifts") {
  auto s = all_shifts(2);
  CHECK(s.size() == 9);
  CHECK(s.front() == std::vector<int>{0, 0});
}

TEST_CASE("rect sums match cell-center membership") {
  Rng rng(3);
  for (auto dims : {std::vector<int>{1}, std::vector<int>{2}, std::vector<int>{1, 1}}) {
    GridConfig cfg(dims, 3);
    std::vector<double> cells(cfg.cell_count());
    for (auto& c : cells) c = rng.uniform();
    for (auto tau : all_shifts(cfg.total_dim())) {
      RectFamily fam(cfg, tau);
      auto fast = fam.rect_sums(cells);
      auto slow = brute_sums(fam, cells);
      for (std::size_t i = 0; i < fam.size(); ++i) REQUIRE(fast[i] == doctest::Approx(slow[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("scatter is the transpose of rect sums") {
  Rng rng(4);
  GridConfig cfg({1, 1}, 3);
  RectFamily fam(cfg, {1, -1});
  std::vector<double> cells(cfg.cell_count()), coeffs(fam.size());
  for (auto& c : cells) c = rng.uniform();
  for (auto& c : coeffs) c = rng.uniform();
  auto sums = fam.rect_sums(cells);
  auto back = fam.scatter(coeffs);
  const double lhs = std::inner_product(sums.begin(), sums.end(), coeffs.begin(), 0.0);
  const double rhs = std::inner_product(back.begin(), back.end(), cells.begin(), 0.0);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("shifted cubes of one level partition the domain") {
  GridConfig cfg({1, 1}, 3);
  for (auto tau : all_shifts(2)) {
    RectFamily fam(cfg, tau);
    std::vector<double> ones(cfg.cell_count(), 1.0);
    auto sums = fam.rect_sums(ones);
    for (const auto& blk : fam.blocks()) {
      double total = 0.0;
      for (std::size_t i = 0; i < blk.size; ++i) total += sums[blk.offset + i];
      REQUIRE(total == doctest::Approx(static_cast<double>(cfg.cell_count())));
    }
  }
}

TEST_CASE("child ids are the one-direction halvings") {
  RectFamily fam(GridConfig({1, 2}, 2));
  for (std::size_t id = 0; id < fam.size(); ++id) {
    ProductRect r = fam.rect(id);
    for (int j = 0; j < 2; ++j) {
      auto kids = fam.child_ids(id, j);
      if (r.factor(j).level() == 2) {
        CHECK(kids.empty());
        continue;
      }
      auto halves = r.factor(j).children();
      REQUIRE(kids.size() == halves.size());
      for (std::size_t c = 0; c < kids.size(); ++c) {
        REQUIRE(fam.rect(kids[c]) == replace(r, halves[c], j));
        REQUIRE(kids[c] > id);
      }
    }
  }
  CHECK_THROWS_AS(RectFamily(GridConfig({1}, 2), {1}).child_ids(0, 0), ParameterError);
}

TEST_CASE("bad shifts are rejected") {
  CHECK_THROWS_AS(RectFamily(GridConfig({1, 1}, 2), {1}), DimensionMismatchError);
  CHECK_THROWS_AS(RectFamily(GridConfig({1}, 2), {2}), ParameterError);
  CHECK_THROWS_AS(GridConfig({1}, 0), EnumerationBoundError);
  CHECK_THROWS_AS(GridConfig({5}, 2), ParameterError);
  CHECK_THROWS_AS(GridConfig({}, 2), ParameterError);
}
