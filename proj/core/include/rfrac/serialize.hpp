#pragma once

#include <nlohmann/json.hpp>

#include "rfrac/conditions.hpp"
#include "rfrac/dyadic.hpp"
#include "rfrac/estimators.hpp"

namespace rfrac {

inline constexpr int kReportSchemaVersion = 1;

/// {levels, indices, tau} with tau entries 0, 1, -1 meaning 0, +1/3, -1/3.
nlohmann::json to_json(const ProductRect& rect);
nlohmann::json to_json(const DyadicCube& cube);
ProductRect rect_from_json(const nlohmann::json& doc, const std::vector<int>& dims);

/// {name, value | "inf", witness, depth, family_size, params, ...}.
nlohmann::json to_json(const ConstantReport& report);
/// {value, sweeps, converged, history, seed, params}.
nlohmann::json to_json(const NormEstimate& estimate);

/// Shortest round-trip decimal of a double ("inf" for infinity).
std::string format_double(double value);

}  // namespace rfrac
