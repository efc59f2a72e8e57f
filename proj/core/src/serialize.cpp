#include "rfrac/serialize.hpp"

#include <charconv>
#include <cmath>

#include "rfrac/errors.hpp"

namespace rfrac {
namespace {

nlohmann::json number_or_inf(double v, bool infinite) {
  if (infinite || std::isinf(v)) return "inf";
  return v;
}

}  // namespace

nlohmann::json to_json(const DyadicCube& cube) {
  return {{"level", cube.level()}, {"index", cube.index()}, {"tau", cube.shift()}};
}

nlohmann::json to_json(const ProductRect& rect) {
  nlohmann::json levels = nlohmann::json::array();
  nlohmann::json indices = nlohmann::json::array();
  nlohmann::json tau = nlohmann::json::array();
  for (const auto& c : rect.cubes()) {
    levels.push_back(c.level());
    indices.push_back(c.index());
    tau.push_back(c.shift());
  }
  return {{"levels", levels}, {"indices", indices}, {"tau", tau}};
}

ProductRect rect_from_json(const nlohmann::json& doc, const std::vector<int>& dims) {
  try {
    const auto levels = doc.at("levels").get<std::vector<int>>();
    const auto indices = doc.at("indices").get<std::vector<std::vector<std::int64_t>>>();
    std::vector<std::vector<int>> tau(levels.size());
    if (doc.contains("tau")) tau = doc.at("tau").get<std::vector<std::vector<int>>>();
    if (levels.size() != dims.size() || indices.size() != dims.size() || tau.size() != dims.size())
      throw DimensionMismatchError("rect has the wrong number of factors");
    std::vector<DyadicCube> cubes;
    for (std::size_t i = 0; i < dims.size(); ++i) {
      if (indices[i].size() != static_cast<std::size_t>(dims[i]))
        throw DimensionMismatchError("rect factor has the wrong dimension");
      cubes.emplace_back(levels[i], indices[i], tau[i]);
    }
    return ProductRect(std::move(cubes));
  } catch (const nlohmann::json::exception& e) {
    throw FileFormatError(std::string("malformed rect: ") + e.what());
  }
}

nlohmann::json to_json(const ConstantReport& report) {
  nlohmann::json doc;
  doc["name"] = report.name;
  doc["value"] = number_or_inf(report.value, report.infinite);
  if (report.witness) {
    nlohmann::json w;
    w["rect"] = to_json(report.witness->rect);
    w["j"] = report.witness->factor ? nlohmann::json(*report.witness->factor) : nlohmann::json(nullptr);
    w["child"] = report.witness->child ? to_json(*report.witness->child) : nlohmann::json(nullptr);
    doc["witness"] = w;
  } else {
    doc["witness"] = nullptr;
  }
  doc["depth"] = report.depth;
  doc["family_size"] = report.family_size;
  if (!report.per_factor.empty()) {
    nlohmann::json pf = nlohmann::json::array();
    for (double v : report.per_factor) pf.push_back(number_or_inf(v, false));
    doc["per_factor"] = pf;
  }
  if (report.tail_bound) doc["tail_bound"] = *report.tail_bound;
  doc["params"] = report.params;
  return doc;
}

nlohmann::json to_json(const NormEstimate& estimate) {
  return {{"value", estimate.value},         {"sweeps", estimate.sweeps},
          {"converged", estimate.converged}, {"history", estimate.history},
          {"seed", estimate.seed},           {"params", estimate.params}};
}

std::string format_double(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (std::isnan(value)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

}  // namespace rfrac
