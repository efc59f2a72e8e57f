#include <doctest.h>

#include <cmath>
#include <limits>

#include "rfrac/errors.hpp"
#include "rfrac/serialize.hpp"

using namespace rfrac;

TEST_CASE("rect json round trip") {
  ProductRect r({DyadicCube(2, {1}, {1}), DyadicCube(1, {0, 1}, {0, -1})});
  auto doc = to_json(r);
  CHECK(doc["levels"] == nlohmann::json({2, 1}));
  CHECK(doc["tau"][0] == nlohmann::json({1}));
  CHECK(rect_from_json(doc, {1, 2}) == r);
  CHECK_THROWS_AS(rect_from_json(doc, {1, 1}), DimensionMismatchError);
  CHECK_THROWS_AS(rect_from_json(nlohmann::json{{"levels", {1}}}, {1}), FileFormatError);
}

TEST_CASE("constant report json") {
  std::vector<double> d(12, 1.0);
  d[0] = d[1] = d[2] = 0.0;
  Weight w(GridConfig({1}, 2), d);
  auto doc = to_json(doubling_constant(w));
  CHECK(doc["value"] == "inf");
  CHECK(doc["witness"]["j"] == 0);
  CHECK(doc["depth"] == 2);
  CHECK(doc.contains("family_size"));

  auto g = to_json(reverse_doubling_constant(gen_uniform(GridConfig({1}, 2))));
  CHECK(g["value"] == 2.0);
}

TEST_CASE("norm estimate json") {
  NormEstimate e;
  e.value = 1.5;
  e.sweeps = 3;
  e.converged = true;
  e.history = {1.0, 1.5};
  e.seed = 9;
  auto doc = to_json(e);
  CHECK(doc["value"] == 1.5);
  CHECK(doc["history"].size() == 2);
  CHECK(doc["seed"] == 9);
}

TEST_CASE("double formatting round trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456789.0, 2.0}) CHECK(std::stod(format_double(v)) == v);
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_double(2.0) == "2");
}
