#include "rfrac/weight_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "rfrac/errors.hpp"

namespace rfrac {
namespace {

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int decode_char(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+') return 62;
  if (c == '/') return 63;
  return -1;
}

std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  std::uint64_t out = 0;
  for (int i = 0; i < 8; ++i) out |= ((v >> (8 * i)) & 0xffU) << (8 * (7 - i));
  return out;
}

GridConfig config_from_json(const nlohmann::json& doc) {
  try {
    return GridConfig(doc.at("dims").get<std::vector<int>>(), doc.at("depth").get<int>());
  } catch (const nlohmann::json::exception& e) {
    throw FileFormatError(std::string("weight file: ") + e.what());
  }
}

}  // namespace

std::string base64_encode(std::span<const unsigned char> bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 3 <= bytes.size(); i += 3) {
    const std::uint32_t v = (std::uint32_t{bytes[i]} << 16) | (std::uint32_t{bytes[i + 1]} << 8) | bytes[i + 2];
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  const std::size_t rest = bytes.size() - i;
  if (rest == 1) {
    const std::uint32_t v = std::uint32_t{bytes[i]} << 16;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += "==";
  } else if (rest == 2) {
    const std::uint32_t v = (std::uint32_t{bytes[i]} << 16) | (std::uint32_t{bytes[i + 1]} << 8);
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += '=';
  }
  return out;
}

std::vector<unsigned char> base64_decode(const std::string& text) {
  if (text.size() % 4 != 0) throw FileFormatError("base64 payload length is not a multiple of 4");
  std::vector<unsigned char> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    std::array<int, 4> v{};
    int pad = 0;
    for (std::size_t k = 0; k < 4; ++k) {
      const char c = text[i + k];
      if (c == '=' && i + 4 == text.size() && k >= 2) {
        v[k] = 0;
        ++pad;
        continue;
      }
      if (pad > 0) throw FileFormatError("base64 padding in the middle of a quantum");
      v[k] = decode_char(c);
      if (v[k] < 0) throw FileFormatError("invalid base64 character");
    }
    const std::uint32_t word = (static_cast<std::uint32_t>(v[0]) << 18) | (static_cast<std::uint32_t>(v[1]) << 12) |
                               (static_cast<std::uint32_t>(v[2]) << 6) | static_cast<std::uint32_t>(v[3]);
    out.push_back(static_cast<unsigned char>((word >> 16) & 0xffU));
    if (pad < 2) out.push_back(static_cast<unsigned char>((word >> 8) & 0xffU));
    if (pad < 1) out.push_back(static_cast<unsigned char>(word & 0xffU));
  }
  return out;
}

std::string encode_values(std::span<const double> values) {
  std::vector<unsigned char> bytes(values.size() * 8);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::uint64_t le = to_little_endian(std::bit_cast<std::uint64_t>(values[i]));
    std::memcpy(bytes.data() + 8 * i, &le, 8);
  }
  return base64_encode(bytes);
}

std::vector<double> decode_values(const std::string& text, std::size_t expected) {
  const auto bytes = base64_decode(text);
  if (bytes.size() != expected * 8)
    throw FileFormatError("payload holds " + std::to_string(bytes.size() / 8) + " values, expected " +
                          std::to_string(expected));
  std::vector<double> out(expected);
  for (std::size_t i = 0; i < expected; ++i) {
    std::uint64_t le = 0;
    std::memcpy(&le, bytes.data() + 8 * i, 8);
    out[i] = std::bit_cast<double>(to_little_endian(le));
  }
  return out;
}

nlohmann::json weight_to_json(const Weight& weight) {
  const GridConfig& cfg = weight.config();
  nlohmann::json doc;
  doc["version"] = kWeightFileVersion;
  doc["dims"] = cfg.dims();
  doc["depth"] = cfg.depth();
  doc["lattice"] = std::vector<std::int64_t>(static_cast<std::size_t>(cfg.total_dim()), cfg.cells_per_axis());
  doc["density"] = encode_values(weight.density());
  doc["meta"] = {{"kind", weight.meta().kind}, {"seed", weight.meta().seed}, {"params", weight.meta().params}};
  return doc;
}

Weight weight_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw FileFormatError("weight file: top level must be an object");
  if (!doc.contains("version") || doc["version"] != kWeightFileVersion)
    throw FileFormatError("weight file: unsupported version (expected " + std::to_string(kWeightFileVersion) + ")");
  GridConfig cfg = config_from_json(doc);
  try {
    const auto lattice = doc.at("lattice").get<std::vector<std::int64_t>>();
    if (lattice.size() != static_cast<std::size_t>(cfg.total_dim()))
      throw FileFormatError("weight file: lattice has wrong number of axes");
    for (auto l : lattice)
      if (l != cfg.cells_per_axis())
        throw FileFormatError("weight file: lattice " + std::to_string(l) + " does not match depth " +
                              std::to_string(cfg.depth()) + " (expected " + std::to_string(cfg.cells_per_axis()) + ")");
    auto density = decode_values(doc.at("density").get<std::string>(), cfg.cell_count());
    WeightMeta meta;
    if (doc.contains("meta")) {
      const auto& m = doc["meta"];
      meta.kind = m.value("kind", std::string("custom"));
      meta.seed = m.value("seed", std::uint64_t{0});
      meta.params = m.value("params", nlohmann::json::object());
    }
    return Weight(std::move(cfg), std::move(density), std::move(meta));
  } catch (const nlohmann::json::exception& e) {
    throw FileFormatError(std::string("weight file: ") + e.what());
  }
}

void save_weight(const Weight& weight, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FileFormatError("cannot open " + path.string() + " for writing");
  out << weight_to_json(weight).dump() << '\n';
  if (!out) throw FileFormatError("failed writing " + path.string());
}

Weight load_weight(const std::filesystem::path& path, const std::optional<GridConfig>& expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileFormatError("cannot open " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FileFormatError("weight file " + path.string() + ": " + e.what());
  }
  Weight w = weight_from_json(doc);
  if (expected) {
    if (w.config().dims() != expected->dims())
      throw FileFormatError("weight file " + path.string() + ": dims do not match the requested grid");
    if (w.config().depth() != expected->depth())
      throw FileFormatError("weight file " + path.string() + ": depth K=" + std::to_string(w.config().depth()) +
                            " does not match requested K=" + std::to_string(expected->depth()));
  }
  return w;
}

nlohmann::json grid_function_to_json(const GridFunction& f) {
  const GridConfig& cfg = f.config();
  nlohmann::json doc;
  doc["version"] = kWeightFileVersion;
  doc["dims"] = cfg.dims();
  doc["depth"] = cfg.depth();
  doc["lattice"] = std::vector<std::int64_t>(static_cast<std::size_t>(cfg.total_dim()), cfg.cells_per_axis());
  doc["density"] = encode_values(f.values());
  doc["meta"] = {{"kind", "grid-function"}};
  return doc;
}

GridFunction grid_function_from_json(const nlohmann::json& doc) {
  GridConfig cfg = config_from_json(doc);
  try {
    return GridFunction(cfg, decode_values(doc.at("density").get<std::string>(), cfg.cell_count()));
  } catch (const nlohmann::json::exception& e) {
    throw FileFormatError(std::string("grid function: ") + e.what());
  }
}

}  // namespace rfrac
