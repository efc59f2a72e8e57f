#include "manifest.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <openssl/evp.h>

#include "rfrac/rng.hpp"

namespace rfrac::cli {

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 15];
  while (in) {
    in.read(buf, sizeof buf);
    EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int{digest[i]};
  return hex.str();
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

std::string manifest_path(const std::string& out) { return out + ".manifest.json"; }

nlohmann::json RunManifest::to_json() const {
  nlohmann::json hashes = nlohmann::json::object();
  for (const auto& f : weight_files) hashes[f] = sha256_file(f);
  return {{"schema_version", 1},
          {"subcommand", subcommand},
          {"params", params},
          {"seed", seed},
          {"generator", std::string(kGeneratorName)},
          {"tool_version", RFRAC_VERSION},
          {"weight_files", hashes},
          {"started", started},
          {"finished", finished}};
}

}  // namespace rfrac::cli
