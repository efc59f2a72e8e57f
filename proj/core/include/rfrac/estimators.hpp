#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rfrac/measures.hpp"
#include "rfrac/operators.hpp"

namespace rfrac {

/// Lower bound on a sup of a ratio, from monotone fixed-point ascent.
struct NormEstimate {
  double value = 0.0;
  std::vector<GridFunction> maximizers;
  int sweeps = 0;
  bool converged = false;
  std::vector<double> history;
  std::uint64_t seed = 0;
  nlohmann::json params = nlohmann::json::object();
};

struct AscentOptions {
  double tol = 1e-9;
  int max_sweeps = 200;
  /// Extra starts from seeded random positive functions.
  int restarts = 0;
  /// Optional initial functions (one per slot), e.g. upsampled maximizers.
  std::vector<GridFunction> warm_start;
};

/// Least c_1 in sum_R K(R) prod_k |int_R f_k dsigma_k| <= c_1 prod_k ||f_k||_{L^{p_k}(sigma_k)}.
///
/// Cyclic ascent: f_j <- G_j^(p_j' - 1) normalized, where G_j collects the
/// other slots. Starts from f_k = 1, from the indicator of the
/// Fefferman-Phong witness, from the warm start and from random restarts; the
/// best run is returned, so value >= c_2.
NormEstimate embed_norm_lower(const Kernel& kernel, std::span<const Weight* const> weights,
                              std::span<const double> exponents, std::uint64_t seed,
                              const AscentOptions& options = {});

enum class OperatorForm { dyadic, perez, kernel, shifted_sum };

const char* to_string(OperatorForm form);
OperatorForm operator_form_from_string(const std::string& name);

/// Lower bound on the L^p(mu) -> L^q(mu) norm of one operator form through
/// bilinear ascent on <T f, g>_mu with ||f||_p = ||g||_{q'} = 1.
NormEstimate operator_norm_lower(const Weight& mu, double alpha, double p, double q, OperatorForm form,
                                 std::uint64_t seed, const AscentOptions& options = {});

/// Least c_1 in sum_R sigma(R)^(q/p) (avg_R f)^q <= c_1 ||f||_{L^p(sigma)}^q.
NormEstimate carleson_norm_lower(const Weight& sigma, double p, double q, std::uint64_t seed,
                                 const AscentOptions& options = {});

/// Recipe for regenerating a weight at any depth.
struct WeightSpec {
  std::string kind = "uniform";  // uniform | power | cascade
  std::vector<int> dims{1};
  double rho = 2.0;
  std::vector<double> exponents{0.0};
  std::vector<double> center{0.5};
  std::uint64_t seed = 0;

  Weight make(int depth) const;
};

enum class SweepTask { embed, hls, carleson };

struct SweepSpec {
  SweepTask task = SweepTask::hls;
  WeightSpec weight;
  /// embed: p_1..p_M; hls: {p}; carleson: {p, q}.
  std::vector<double> exponents{2.0, 2.0};
  double alpha = 0.5;
  OperatorForm form = OperatorForm::dyadic;
  std::string kernel = "fractional";  // embed: fractional | random | balanced
  std::uint64_t seed = 0;
  AscentOptions ascent;
  bool warm_start = true;
  bool timing = false;
};

struct SweepRow {
  int depth = 0;
  double c2 = 0.0;
  double c1_hat = 0.0;
  double ratio = 0.0;
  double seconds = 0.0;
};

/// random: i.i.d. u_R; balanced: Kernel::random_balanced; fractional: mu(R)^(alpha/N-1).
Kernel make_embed_kernel(const std::string& kind, const Weight& mu, std::span<const Weight* const> weights,
                         std::span<const double> exponents, double alpha, std::uint64_t seed);

/// One row per depth in [kmin, kmax]; maximizers of depth K-1 are upsampled
/// as warm starts for depth K. `seconds` is filled only when timing is set.
std::vector<SweepRow> depth_sweep(const SweepSpec& spec, int kmin, int kmax);

/// CSV with the fixed header K,c2,c1_hat,ratio,seconds.
std::string sweep_csv(std::span<const SweepRow> rows);

}  // namespace rfrac
