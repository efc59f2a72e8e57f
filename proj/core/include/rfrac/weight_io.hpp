#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rfrac/measures.hpp"

namespace rfrac {

inline constexpr int kWeightFileVersion = 1;

std::string base64_encode(std::span<const unsigned char> bytes);
std::vector<unsigned char> base64_decode(const std::string& text);

/// Densities as base64 of little-endian IEEE doubles, row-major.
std::string encode_values(std::span<const double> values);
std::vector<double> decode_values(const std::string& text, std::size_t expected);

nlohmann::json weight_to_json(const Weight& weight);
Weight weight_from_json(const nlohmann::json& doc);

void save_weight(const Weight& weight, const std::filesystem::path& path);
/// Loads and validates a weight file; with `expected`, the dims and depth must match.
Weight load_weight(const std::filesystem::path& path, const std::optional<GridConfig>& expected = std::nullopt);

nlohmann::json grid_function_to_json(const GridFunction& f);
GridFunction grid_function_from_json(const nlohmann::json& doc);

}  // namespace rfrac
