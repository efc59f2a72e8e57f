#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rfrac/estimators.hpp"

namespace rfrac::cli {

struct CommonOptions {
  std::string format = "json";
  std::uint64_t seed = 0;
  unsigned threads = 1;
  int depth = 4;
  std::string out = "-";
  bool timing = false;
};

/// Either a weight file or a generator recipe.
struct WeightOptions {
  std::string file;
  std::string kind = "uniform";
  std::vector<int> dims{1};
  double rho = 2.0;
  std::vector<double> power_exponents;
  std::vector<double> center;
  std::optional<std::uint64_t> weight_seed;

  WeightSpec spec(std::uint64_t fallback_seed) const;
};

struct AscentFlags {
  double tol = 1e-9;
  int max_sweeps = 200;
  int restarts = 0;

  AscentOptions options() const;
};

struct DepthRange {
  std::optional<int> kmin;
  std::optional<int> kmax;
};

/// Text of the report plus whether all of its checks passed.
struct CommandResult {
  std::string text;
  bool pass = true;
  std::vector<std::string> weight_files;
};

CommandResult cmd_gen_weight(const CommonOptions& common, const WeightOptions& weight);
CommandResult cmd_check_weight(const CommonOptions& common, const WeightOptions& weight, std::vector<double> eps);

struct FpOptions {
  std::string kernel = "fractional";
  double alpha = 0.5;
  double p = 4.0 / 3.0;
  std::optional<double> q;
  std::vector<double> exponents;
};
CommandResult cmd_fp(const CommonOptions& common, const WeightOptions& weight, const FpOptions& fp);

struct EmbedOptions {
  std::string kernel = "random";
  std::vector<double> exponents{2.0, 2.0};
  double alpha = 0.5;
};
CommandResult cmd_embed_norm(const CommonOptions& common, const WeightOptions& weight, const EmbedOptions& embed,
                             const DepthRange& range, const AscentFlags& ascent);

struct HlsOptions {
  double alpha = 0.5;
  double p = 4.0 / 3.0;
  std::optional<double> q;
  std::string form = "dyadic";
};
CommandResult cmd_hls(const CommonOptions& common, const WeightOptions& weight, const HlsOptions& hls,
                      const DepthRange& range, const AscentFlags& ascent);

struct KernelEquivOptions {
  double alpha = 0.5;
  int pairs = 1000;
};
CommandResult cmd_kernel_equiv(const CommonOptions& common, const WeightOptions& weight,
                               const KernelEquivOptions& opts, const DepthRange& range);

CommandResult cmd_shift_cover(const CommonOptions& common, int dim, int max_level);

struct CarlesonOptions {
  double p = 2.0;
  double q = 4.0;
};
CommandResult cmd_carleson(const CommonOptions& common, const WeightOptions& weight, const CarlesonOptions& opts,
                           const DepthRange& range, const AscentFlags& ascent);

}  // namespace rfrac::cli
