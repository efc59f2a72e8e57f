#include "rfrac/estimators.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>

#include "rfrac/conditions.hpp"
#include "rfrac/errors.hpp"
#include "rfrac/rng.hpp"

namespace rfrac {
namespace {

using Vec = std::vector<double>;

// A sup of a homogeneous ratio over nonnegative functions f_1..f_M, each
// normalized in L^{p_j} of its own cell masses.
struct AscentProblem {
  std::vector<std::span<const double>> masses;
  std::vector<double> exponents;
  GridConfig config{{1}, 1};
  /// Value of the ratio numerator at normalized arguments.
  std::function<double(const std::vector<Vec>&)> objective;
  /// G_j: f_j <- G_j^(p_j' - 1) is the next iterate.
  std::function<Vec(std::size_t, const std::vector<Vec>&)> gradient;
  /// Homogeneity degree of the numerator in f_j (1 for multilinear forms).
  double degree = 1.0;
};

struct RunResult {
  double value = 0.0;
  std::vector<Vec> fs;
  std::vector<double> history;
  int sweeps = 0;
  bool converged = false;
};

double norm_p(std::span<const double> f, std::span<const double> m, double p) {
  Vec t(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) t[i] = std::pow(std::abs(f[i]), p) * m[i];
  return std::pow(pairwise_sum(t), 1.0 / p);
}

// false when the function vanishes sigma-a.e.
bool normalize(Vec& f, std::span<const double> m, double p) {
  const double n = norm_p(f, m, p);
  if (!(n > 0.0) || !std::isfinite(n)) return false;
  for (double& v : f) v /= n;
  return true;
}

double ratio(const AscentProblem& prob, const std::vector<Vec>& fs) {
  double denom = 1.0;
  for (std::size_t j = 0; j < fs.size(); ++j) denom *= norm_p(fs[j], prob.masses[j], prob.exponents[j]);
  if (!(denom > 0.0)) return 0.0;
  return prob.objective(fs) / std::pow(denom, prob.degree);
}

RunResult run_ascent(const AscentProblem& prob, std::vector<Vec> fs, const AscentOptions& opt) {
  RunResult r;
  for (std::size_t j = 0; j < fs.size(); ++j) {
    for (double& v : fs[j]) v = std::abs(v);
    if (!normalize(fs[j], prob.masses[j], prob.exponents[j])) {
      r.fs = std::move(fs);
      r.history = {0.0};
      return r;
    }
  }
  double value = ratio(prob, fs);
  r.history.push_back(value);
  for (int sweep = 1; sweep <= opt.max_sweeps; ++sweep) {
    std::vector<Vec> next = fs;
    for (std::size_t j = 0; j < next.size(); ++j) {
      Vec g = prob.gradient(j, next);
      const double power = conjugate(prob.exponents[j]) - 1.0;
      for (double& v : g) v = v > 0.0 ? std::pow(v, power) : 0.0;
      if (normalize(g, prob.masses[j], prob.exponents[j])) next[j] = std::move(g);
    }
    const double updated = ratio(prob, next);
    r.sweeps = sweep;
    if (!(updated >= value)) {
      // Only rounding can lower the value of an exact coordinate maximizer.
      r.converged = true;
      break;
    }
    fs = std::move(next);
    r.history.push_back(updated);
    const double gain = value > 0.0 ? (updated - value) / value : (updated > 0.0 ? 1.0 : 0.0);
    value = updated;
    if (gain < opt.tol) {
      r.converged = true;
      break;
    }
  }
  r.value = value;
  r.fs = std::move(fs);
  return r;
}

std::vector<Vec> random_start(std::size_t slots, std::size_t cells, std::uint64_t seed, int restart) {
  Rng rng(hash_key(seed, {0x52455354, restart}));
  std::vector<Vec> fs(slots, Vec(cells));
  for (auto& f : fs)
    for (double& v : f) v = rng.uniform(0.05, 1.0);
  return fs;
}

// Every start listed in AscentOptions plus the given indicator start; best run wins.
NormEstimate best_of_starts(const AscentProblem& prob, const std::optional<ProductRect>& witness,
                            std::uint64_t seed, const AscentOptions& opt) {
  const std::size_t slots = prob.masses.size();
  const std::size_t cells = prob.config.cell_count();
  std::vector<std::vector<Vec>> starts;
  starts.emplace_back(slots, Vec(cells, 1.0));
  if (witness) {
    const auto ind = GridFunction::indicator(prob.config, *witness);
    starts.emplace_back(slots, Vec(ind.values().begin(), ind.values().end()));
  }
  if (!opt.warm_start.empty()) {
    if (opt.warm_start.size() != slots) throw DimensionMismatchError("warm start needs one function per slot");
    std::vector<Vec> ws;
    for (const auto& g : opt.warm_start) {
      if (!(g.config() == prob.config)) throw DimensionMismatchError("warm start lives on a different grid");
      ws.emplace_back(g.values().begin(), g.values().end());
    }
    starts.push_back(std::move(ws));
  }
  for (int r = 0; r < opt.restarts; ++r) starts.push_back(random_start(slots, cells, seed, r));

  RunResult best;
  bool have = false;
  for (auto& s : starts) {
    RunResult run = run_ascent(prob, std::move(s), opt);
    if (!have || run.value > best.value) {
      best = std::move(run);
      have = true;
    }
  }
  NormEstimate est;
  est.value = best.value;
  est.sweeps = best.sweeps;
  est.converged = best.converged;
  est.history = std::move(best.history);
  est.seed = seed;
  for (auto& f : best.fs) est.maximizers.emplace_back(prob.config, std::move(f));
  est.params["starts"] = static_cast<int>(2 + opt.restarts) - (witness ? 0 : 1) + (opt.warm_start.empty() ? 0 : 1);
  return est;
}

Vec times_masses(const Vec& f, std::span<const double> m) {
  Vec out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i] * m[i];
  return out;
}

double dot_masses(const Vec& a, const Vec& b, std::span<const double> m) {
  Vec t(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) t[i] = a[i] * b[i] * m[i];
  return pairwise_sum(t);
}

}  // namespace

NormEstimate embed_norm_lower(const Kernel& kernel, std::span<const Weight* const> weights,
                              std::span<const double> exponents, std::uint64_t seed, const AscentOptions& options) {
  const auto ec = ExponentConfig::mlinear(std::vector<double>(exponents.begin(), exponents.end()));
  if (weights.size() != exponents.size()) throw DimensionMismatchError("need one exponent per weight");
  const RectFamily& fam = kernel.family();
  for (const Weight* w : weights)
    if (!(w->config() == fam.config())) throw DimensionMismatchError("kernel and weights live on different grids");

  const auto kv = kernel.values();
  const bool all_zero = std::all_of(kv.begin(), kv.end(), [](double v) { return v == 0.0; });
  if (all_zero) {
    NormEstimate est;
    est.converged = true;
    est.history = {0.0};
    est.seed = seed;
    for (std::size_t k = 0; k < weights.size(); ++k)
      est.maximizers.push_back(GridFunction::constant(fam.config(), 1.0));
    est.params["exponents"] = ec.exponents();
    return est;
  }

  AscentProblem prob;
  prob.config = fam.config();
  prob.exponents = ec.exponents();
  for (const Weight* w : weights) prob.masses.push_back(w->cell_masses());
  auto integrals = [&fam, &prob](const std::vector<Vec>& fs) {
    std::vector<Vec> out;
    for (std::size_t k = 0; k < fs.size(); ++k) out.push_back(fam.rect_sums(times_masses(fs[k], prob.masses[k])));
    return out;
  };
  prob.objective = [kv, integrals](const std::vector<Vec>& fs) {
    const auto in = integrals(fs);
    Vec terms(kv.begin(), kv.end());
    for (const auto& i : in)
      for (std::size_t id = 0; id < terms.size(); ++id) terms[id] *= std::abs(i[id]);
    return pairwise_sum(terms);
  };
  prob.gradient = [kv, &fam, &prob](std::size_t j, const std::vector<Vec>& fs) {
    Vec coeffs(kv.begin(), kv.end());
    for (std::size_t k = 0; k < fs.size(); ++k) {
      if (k == j) continue;
      const auto i = fam.rect_sums(times_masses(fs[k], prob.masses[k]));
      for (std::size_t id = 0; id < coeffs.size(); ++id) coeffs[id] *= std::abs(i[id]);
    }
    return fam.scatter(coeffs);
  };

  const auto fp = fp_constant(kernel, weights, exponents);
  std::optional<ProductRect> witness;
  if (fp.witness) witness = fp.witness->rect;
  NormEstimate est = best_of_starts(prob, witness, seed, options);
  est.params["exponents"] = ec.exponents();
  est.params["c2"] = fp.value;
  return est;
}

const char* to_string(OperatorForm form) {
  switch (form) {
    case OperatorForm::dyadic: return "dyadic";
    case OperatorForm::perez: return "perez";
    case OperatorForm::kernel: return "kernel";
    case OperatorForm::shifted_sum: return "shifted-sum";
  }
  return "?";
}

OperatorForm operator_form_from_string(const std::string& name) {
  if (name == "dyadic") return OperatorForm::dyadic;
  if (name == "perez") return OperatorForm::perez;
  if (name == "kernel") return OperatorForm::kernel;
  if (name == "shifted-sum" || name == "shifted_sum") return OperatorForm::shifted_sum;
  throw ParameterError("unknown operator form '" + name + "' (dyadic, perez, kernel, shifted-sum)");
}

NormEstimate operator_norm_lower(const Weight& mu, double alpha, double p, double q, OperatorForm form,
                                 std::uint64_t seed, const AscentOptions& options) {
  const auto ec = ExponentConfig::hls(mu.config().total_dim(), alpha, p, q);
  const GridConfig& cfg = mu.config();
  const auto m = mu.cell_masses();

  // T and its mu-adjoint acting on cell values.
  std::function<Vec(const Vec&)> forward;
  std::function<Vec(const Vec&)> adjoint;
  switch (form) {
    case OperatorForm::dyadic:
    case OperatorForm::shifted_sum: {
      std::vector<std::shared_ptr<const DyadicFracOperator>> ops;
      if (form == OperatorForm::dyadic) {
        ops.push_back(std::make_shared<DyadicFracOperator>(mu, alpha));
      } else {
        for (const auto& tau : all_shifts(cfg.total_dim()))
          ops.push_back(std::make_shared<DyadicFracOperator>(mu, alpha, tau));
      }
      forward = [ops, m](const Vec& f) {
        const Vec w = times_masses(f, m);
        Vec out(f.size(), 0.0);
        for (const auto& op : ops) {
          const Vec part = op->apply(w);
          for (std::size_t i = 0; i < out.size(); ++i) out[i] += part[i];
        }
        return out;
      };
      adjoint = forward;
      break;
    }
    case OperatorForm::perez: {
      auto family = mu.family_ptr();
      const auto kernel = std::make_shared<Kernel>(Kernel::fractional(mu, alpha));
      forward = [family, kernel, m](const Vec& f) {
        Vec c = triple_integrals(*family, times_masses(f, m));
        const auto kv = kernel->values();
        for (std::size_t id = 0; id < c.size(); ++id) c[id] *= kv[id];
        return family->scatter(c);
      };
      adjoint = [family, kernel, m](const Vec& g) {
        Vec c = family->rect_sums(times_masses(g, m));
        const auto kv = kernel->values();
        for (std::size_t id = 0; id < c.size(); ++id) c[id] *= kv[id];
        return triple_scatter(*family, c);
      };
      break;
    }
    case OperatorForm::kernel: {
      const auto kform = std::make_shared<KernelForm>(mu, alpha);
      // The kernel is symmetric, so the form is self-adjoint in L^2(mu).
      forward = [kform](const Vec& f) { return kform->apply(f); };
      adjoint = forward;
      break;
    }
  }

  AscentProblem prob;
  prob.config = cfg;
  prob.exponents = {ec.p(), conjugate(ec.q())};
  prob.masses = {m, m};
  prob.objective = [forward, m](const std::vector<Vec>& fs) { return dot_masses(forward(fs[0]), fs[1], m); };
  prob.gradient = [forward, adjoint](std::size_t j, const std::vector<Vec>& fs) {
    return j == 0 ? adjoint(fs[1]) : forward(fs[0]);
  };

  const Kernel frac = Kernel::fractional(mu, alpha);
  const Weight* ws[] = {&mu, &mu};
  const double ex[] = {ec.p(), conjugate(ec.q())};
  const auto fp = fp_constant(frac, ws, ex);
  std::optional<ProductRect> witness;
  if (fp.witness) witness = fp.witness->rect;
  NormEstimate est = best_of_starts(prob, witness, seed, options);
  est.params["form"] = to_string(form);
  est.params["alpha"] = alpha;
  est.params["p"] = ec.p();
  est.params["q"] = ec.q();
  return est;
}

NormEstimate carleson_norm_lower(const Weight& sigma, double p, double q, std::uint64_t seed,
                                 const AscentOptions& options) {
  if (!(p > 1.0 && q > p && std::isfinite(q))) throw ParameterError("exponents must satisfy 1 < p < q < inf");
  const RectFamily& fam = sigma.family();
  const auto m = sigma.cell_masses();
  Vec a(fam.size());
  for (std::size_t id = 0; id < a.size(); ++id) {
    const double s = sigma.mass_of_id(id);
    a[id] = s > 0.0 ? std::pow(s, q / p - q) : 0.0;
  }

  AscentProblem prob;
  prob.config = sigma.config();
  prob.exponents = {p};
  prob.masses = {m};
  prob.degree = q;
  prob.objective = [&fam, a, m, q](const std::vector<Vec>& fs) {
    Vec t = fam.rect_sums(times_masses(fs[0], m));
    for (std::size_t id = 0; id < t.size(); ++id) t[id] = a[id] * std::pow(t[id], q);
    return pairwise_sum(t);
  };
  // Gradient of the convex objective up to the factor q; a linear-step
  // maximizer of a convex function never decreases it on the unit sphere.
  prob.gradient = [&fam, a, m, q](std::size_t, const std::vector<Vec>& fs) {
    Vec t = fam.rect_sums(times_masses(fs[0], m));
    for (std::size_t id = 0; id < t.size(); ++id) t[id] = a[id] * std::pow(t[id], q - 1.0);
    return fam.scatter(t);
  };

  const auto testing = carleson_testing_constant(sigma, p, q);
  std::optional<ProductRect> witness;
  if (testing.witness) witness = testing.witness->rect;
  NormEstimate est = best_of_starts(prob, witness, seed, options);
  est.params["p"] = p;
  est.params["q"] = q;
  est.params["c2"] = testing.value;
  return est;
}

Weight WeightSpec::make(int depth) const {
  const GridConfig cfg(dims, depth);
  if (kind == "uniform") return gen_uniform(cfg);
  if (kind == "power") return gen_power(cfg, exponents, center);
  if (kind == "cascade") return gen_cascade(cfg, rho, seed);
  throw ParameterError("unknown weight kind '" + kind + "' (uniform, power, cascade)");
}

Kernel make_embed_kernel(const std::string& kind, const Weight& mu, std::span<const Weight* const> weights,
                         std::span<const double> exponents, double alpha, std::uint64_t seed) {
  if (kind == "random") return Kernel::random_uniform(mu.config(), seed);
  if (kind == "balanced") return Kernel::random_balanced(weights, exponents, seed);
  if (kind == "fractional") return Kernel::fractional(mu, alpha);
  throw ParameterError("unknown kernel '" + kind + "' (random, balanced, fractional)");
}

std::vector<SweepRow> depth_sweep(const SweepSpec& spec, int kmin, int kmax) {
  if (kmin < 0 || kmax < kmin || kmax > kMaxDepth)
    throw EnumerationBoundError("depth range must satisfy 0 <= kmin <= kmax <= " + std::to_string(kMaxDepth));
  std::vector<SweepRow> rows;
  std::vector<GridFunction> previous;
  for (int depth = kmin; depth <= kmax; ++depth) {
    const auto t0 = std::chrono::steady_clock::now();
    const Weight w = spec.weight.make(depth);
    AscentOptions opt = spec.ascent;
    if (spec.warm_start && !previous.empty()) {
      opt.warm_start.clear();
      for (const auto& f : previous) opt.warm_start.push_back(f.upsample());
    }
    SweepRow row;
    row.depth = depth;
    NormEstimate est;
    switch (spec.task) {
      case SweepTask::embed: {
        std::vector<const Weight*> ws(spec.exponents.size(), &w);
        const Kernel kernel = make_embed_kernel(spec.kernel, w, ws, spec.exponents, spec.alpha, spec.seed);
        row.c2 = fp_constant(kernel, ws, spec.exponents).value;
        est = embed_norm_lower(kernel, ws, spec.exponents, spec.seed, opt);
        break;
      }
      case SweepTask::hls: {
        if (spec.exponents.empty()) throw ParameterError("hls sweep needs p");
        const auto ec = ExponentConfig::hls_from_p(w.config().total_dim(), spec.alpha, spec.exponents[0]);
        const Kernel frac = Kernel::fractional(w, spec.alpha);
        const Weight* ws[] = {&w, &w};
        const double ex[] = {ec.p(), conjugate(ec.q())};
        row.c2 = fp_constant(frac, ws, ex).value;
        est = operator_norm_lower(w, spec.alpha, ec.p(), ec.q(), spec.form, spec.seed, opt);
        break;
      }
      case SweepTask::carleson: {
        if (spec.exponents.size() != 2) throw ParameterError("carleson sweep needs p and q");
        row.c2 = carleson_testing_constant(w, spec.exponents[0], spec.exponents[1]).value;
        est = carleson_norm_lower(w, spec.exponents[0], spec.exponents[1], spec.seed, opt);
        break;
      }
    }
    row.c1_hat = est.value;
    row.ratio = row.c2 > 0.0 ? row.c1_hat / row.c2 : std::numeric_limits<double>::infinity();
    previous = std::move(est.maximizers);
    if (spec.timing)
      row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rows.push_back(row);
  }
  return rows;
}

std::string sweep_csv(std::span<const SweepRow> rows) {
  std::ostringstream out;
  out << "K,c2,c1_hat,ratio,seconds\n";
  out << std::setprecision(17);
  for (const auto& r : rows)
    out << r.depth << ',' << r.c2 << ',' << r.c1_hat << ',' << r.ratio << ',' << r.seconds << '\n';
  return out.str();
}

}  // namespace rfrac
