#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rfrac/conditions.hpp"
#include "rfrac/errors.hpp"
#include "rfrac/rng.hpp"
#include "rfrac/serialize.hpp"
#include "rfrac/weight_io.hpp"

namespace rfrac::cli {
namespace {

using json = nlohmann::json;

json num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  return v;
}

json check(const std::string& name, bool pass, double value = std::numeric_limits<double>::quiet_NaN()) {
  json c{{"name", name}, {"pass", pass}};
  if (!std::isnan(value)) c["value"] = num(value);
  return c;
}

bool all_pass(const json& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const json& c) { return c.at("pass").get<bool>(); });
}

std::string envelope(const std::string& subcommand, const CommonOptions& common, json body, const json& checks) {
  body["schema_version"] = kReportSchemaVersion;
  body["subcommand"] = subcommand;
  body["seed"] = common.seed;
  body["checks"] = checks;
  body["pass"] = all_pass(checks);
  if (common.out != "-") {
    const auto slash = common.out.find_last_of('/');
    body["manifest"] = (slash == std::string::npos ? common.out : common.out.substr(slash + 1)) + ".manifest.json";
  }
  return body.dump(2) + "\n";
}

void require_json_or_csv(const CommonOptions& common) {
  if (common.format != "json" && common.format != "csv")
    throw ParameterError("--format must be json or csv");
}

Weight weight_at(const WeightOptions& w, const CommonOptions& common, int depth, CommandResult& result) {
  if (!w.file.empty()) {
    result.weight_files.push_back(w.file);
    return load_weight(w.file);
  }
  return w.spec(common.seed).make(depth);
}

std::pair<int, int> depth_range(const CommonOptions& common, const DepthRange& range) {
  const int kmin = range.kmin.value_or(common.depth);
  const int kmax = range.kmax.value_or(range.kmin ? std::max(kmin, common.depth) : common.depth);
  if (kmax < kmin) throw ParameterError("--kmax must be >= --kmin");
  return {kmin, kmax};
}

void reject_file_for_sweep(const WeightOptions& w, const char* cmd) {
  if (!w.file.empty())
    throw ParameterError(std::string(cmd) + " regenerates the weight at every depth; give --kind/--dims/... instead of --weight");
}

json rows_json(std::span<const SweepRow> rows) {
  json out = json::array();
  double prev = 0.0;
  for (const auto& r : rows) {
    json row{{"K", r.depth}, {"c2", num(r.c2)}, {"c1_hat", num(r.c1_hat)}, {"ratio", num(r.ratio)},
             {"seconds", r.seconds}};
    if (prev > 0.0) row["relative_change"] = num(r.c1_hat / prev - 1.0);
    prev = r.c1_hat;
    out.push_back(row);
  }
  return out;
}

json ratio_checks(std::span<const SweepRow> rows) {
  json checks = json::array();
  for (const auto& r : rows)
    checks.push_back(check("c2_le_c1_hat@K=" + std::to_string(r.depth), r.c1_hat >= r.c2 - 1e-9 * std::max(1.0, r.c2),
                           r.c1_hat - r.c2));
  return checks;
}

}  // namespace

WeightSpec WeightOptions::spec(std::uint64_t fallback_seed) const {
  WeightSpec s;
  s.kind = kind;
  s.dims = dims;
  s.rho = rho;
  s.seed = weight_seed.value_or(fallback_seed);
  if (kind == "power") {
    if (power_exponents.empty()) throw ParameterError("--power-exp is required for power weights");
    s.exponents = power_exponents;
    s.center = center.empty() ? std::vector<double>{0.5} : center;
  }
  return s;
}

AscentOptions AscentFlags::options() const {
  AscentOptions o;
  o.tol = tol;
  o.max_sweeps = max_sweeps;
  o.restarts = restarts;
  return o;
}

CommandResult cmd_gen_weight(const CommonOptions& common, const WeightOptions& weight) {
  require_json_or_csv(common);
  if (!weight.file.empty()) throw ParameterError("gen-weight writes a weight; --weight is not accepted");
  const Weight w = weight.spec(common.seed).make(common.depth);
  CommandResult r;
  if (common.format == "json") {
    r.text = weight_to_json(w).dump(2) + "\n";
  } else {
    std::ostringstream out;
    out << "cell,density\n";
    const auto d = w.density();
    for (std::size_t i = 0; i < d.size(); ++i) out << i << ',' << format_double(d[i]) << '\n';
    r.text = out.str();
  }
  return r;
}

CommandResult cmd_check_weight(const CommonOptions& common, const WeightOptions& weight, std::vector<double> eps) {
  require_json_or_csv(common);
  CommandResult result;
  const Weight w = weight_at(weight, common, common.depth, result);
  if (eps.empty()) eps = {0.25, 0.5, 1.0};
  const auto delta = doubling_constant(w);
  const auto gamma = reverse_doubling_constant(w);
  const auto& dims = w.config().dims();
  const int max_dim = *std::max_element(dims.begin(), dims.end());

  json checks = json::array();
  json margins = json::object();
  json forward = json::array();
  for (std::size_t j = 0; j < dims.size(); ++j) {
    const double gj = gamma.per_factor[j];
    const double dj = delta.per_factor[j];
    if (!std::isfinite(gj)) {
      forward.push_back(nullptr);
      continue;
    }
    const double bound = 1.0 + (std::ldexp(1.0, dims[j]) - 1.0) / dj;
    const double margin = gj - bound;
    forward.push_back(margin);
    checks.push_back(check("reverse_doubling_from_doubling[j=" + std::to_string(j) + "]",
                           margin >= -1e-12 * std::max(1.0, bound), margin));
  }
  margins["reverse_doubling_from_doubling"] = forward;
  const double threshold = std::ldexp(1.0, max_dim) - 1.0;
  if (std::isfinite(gamma.value) && gamma.value > threshold) {
    const double bound = gamma.value / (gamma.value + 1.0 - std::ldexp(1.0, max_dim));
    const double margin = bound - delta.value;
    margins["doubling_from_reverse_doubling"] = num(margin);
    checks.push_back(check("doubling_from_reverse_doubling", margin >= -1e-12 * std::max(1.0, bound), margin));
  } else {
    margins["doubling_from_reverse_doubling"] = nullptr;
  }

  json cond = json::array();
  std::vector<std::pair<double, double>> csv_d;
  for (double e : eps) {
    const auto rep = condition_d_constant(w, e, gamma.value > 1.0 ? std::optional<double>(gamma.value) : std::nullopt);
    json entry = to_json(rep);
    if (rep.params.contains("series_bound")) {
      const double bound = rep.params["series_bound"].get<double>();
      const double margin = bound - rep.value;
      entry["series_margin"] = margin;
      checks.push_back(check("condition_d_series_bound[eps=" + format_double(e) + "]",
                             margin >= -1e-12 * std::max(1.0, bound), margin));
    }
    cond.push_back(entry);
    csv_d.emplace_back(e, rep.value);
  }

  if (common.format == "csv") {
    std::ostringstream out;
    out << "name,param,value\n";
    out << "doubling,," << format_double(delta.value) << '\n';
    out << "reverse_doubling,," << format_double(gamma.value) << '\n';
    for (auto [e, v] : csv_d) out << "condition_d," << format_double(e) << ',' << format_double(v) << '\n';
    result.text = out.str();
  } else {
    json body{{"doubling", to_json(delta)},
              {"reverse_doubling", to_json(gamma)},
              {"condition_d", cond},
              {"margins", margins},
              {"depth", w.config().depth()},
              {"dims", dims}};
    result.text = envelope("check-weight", common, body, checks);
  }
  result.pass = all_pass(checks);
  return result;
}

CommandResult cmd_fp(const CommonOptions& common, const WeightOptions& weight, const FpOptions& fp) {
  require_json_or_csv(common);
  CommandResult result;
  const Weight w = weight_at(weight, common, common.depth, result);
  json checks = json::array();
  ConstantReport rep;
  if (fp.kernel == "fractional") {
    const int n = w.config().total_dim();
    const auto ec = fp.q ? ExponentConfig::hls(n, fp.alpha, fp.p, *fp.q) : ExponentConfig::hls_from_p(n, fp.alpha, fp.p);
    const Weight* ws[] = {&w, &w};
    const double ex[] = {ec.p(), conjugate(ec.q())};
    rep = fp_constant(Kernel::fractional(w, fp.alpha), ws, ex);
    rep.params["alpha"] = fp.alpha;
    rep.params["q"] = ec.q();
    checks.push_back(check("hls_balanced_equals_one", std::abs(rep.value - 1.0) <= 1e-9, rep.value - 1.0));
  } else {
    if (fp.exponents.empty()) throw ParameterError("--exponents is required for kernel " + fp.kernel);
    std::vector<const Weight*> ws(fp.exponents.size(), &w);
    const Kernel k = make_embed_kernel(fp.kernel, w, ws, fp.exponents, fp.alpha, common.seed);
    rep = fp_constant(k, ws, fp.exponents);
  }
  rep.params["kernel"] = fp.kernel;
  if (common.format == "csv") {
    result.text = "name,value\n" + rep.name + "," + format_double(rep.value) + "\n";
  } else {
    result.text = envelope("fp", common, json{{"report", to_json(rep)}}, checks);
  }
  result.pass = all_pass(checks);
  return result;
}

CommandResult cmd_embed_norm(const CommonOptions& common, const WeightOptions& weight, const EmbedOptions& embed,
                             const DepthRange& range, const AscentFlags& ascent) {
  require_json_or_csv(common);
  reject_file_for_sweep(weight, "embed-norm");
  const auto [kmin, kmax] = depth_range(common, range);
  SweepSpec spec;
  spec.task = SweepTask::embed;
  spec.weight = weight.spec(common.seed);
  spec.exponents = embed.exponents;
  spec.alpha = embed.alpha;
  spec.kernel = embed.kernel;
  spec.seed = common.seed;
  spec.ascent = ascent.options();
  spec.timing = common.timing;
  ExponentConfig::mlinear(embed.exponents);
  const auto rows = depth_sweep(spec, kmin, kmax);
  const json checks = ratio_checks(rows);
  CommandResult result;
  if (common.format == "csv") {
    result.text = sweep_csv(rows);
  } else {
    json body{{"kernel", embed.kernel}, {"exponents", embed.exponents}, {"rows", rows_json(rows)}};
    result.text = envelope("embed-norm", common, body, checks);
  }
  result.pass = all_pass(checks);
  return result;
}

CommandResult cmd_hls(const CommonOptions& common, const WeightOptions& weight, const HlsOptions& hls,
                      const DepthRange& range, const AscentFlags& ascent) {
  require_json_or_csv(common);
  reject_file_for_sweep(weight, "hls");
  const auto [kmin, kmax] = depth_range(common, range);
  const WeightSpec ws = weight.spec(common.seed);
  int n = 0;
  for (int d : ws.dims) n += d;
  const auto ec = hls.q ? ExponentConfig::hls(n, hls.alpha, hls.p, *hls.q) : ExponentConfig::hls_from_p(n, hls.alpha, hls.p);

  std::vector<OperatorForm> forms;
  if (hls.form == "all") {
    forms = {OperatorForm::dyadic, OperatorForm::perez, OperatorForm::kernel, OperatorForm::shifted_sum};
    if (common.format == "csv") throw ParameterError("--form all needs --format json");
  } else {
    forms = {operator_form_from_string(hls.form)};
  }

  json checks = json::array();
  json by_form = json::object();
  CommandResult result;
  for (OperatorForm form : forms) {
    SweepSpec spec;
    spec.task = SweepTask::hls;
    spec.weight = ws;
    spec.exponents = {ec.p()};
    spec.alpha = hls.alpha;
    spec.form = form;
    spec.seed = common.seed;
    spec.ascent = ascent.options();
    spec.timing = common.timing;
    const auto rows = depth_sweep(spec, kmin, kmax);
    for (auto c : ratio_checks(rows)) {
      c["name"] = std::string(to_string(form)) + ":" + c["name"].get<std::string>();
      checks.push_back(c);
    }
    by_form[to_string(form)] = rows_json(rows);
    if (common.format == "csv") result.text = sweep_csv(rows);
  }
  if (common.format == "json") {
    json body{{"alpha", hls.alpha}, {"p", ec.p()}, {"q", ec.q()}, {"forms", by_form}};
    result.text = envelope("hls", common, body, checks);
  }
  result.pass = all_pass(checks);
  return result;
}

CommandResult cmd_kernel_equiv(const CommonOptions& common, const WeightOptions& weight,
                               const KernelEquivOptions& opts, const DepthRange& range) {
  require_json_or_csv(common);
  if (opts.pairs < 1) throw ParameterError("--pairs must be positive");
  CommandResult result;
  std::vector<int> depths;
  if (!weight.file.empty()) {
    depths.push_back(-1);
  } else {
    const auto [kmin, kmax] = depth_range(common, range);
    for (int k = kmin; k <= kmax; ++k) depths.push_back(k);
  }
  json rows = json::array();
  json checks = json::array();
  std::ostringstream csv;
  csv << "K,pairs,r_min,r_max,log_spread\n";
  // Pairs are cell centers of the first lattice and stay fixed across depths,
  // so the rows differ only in the depth of the family.
  std::vector<std::pair<Point, Point>> pairs;
  for (int depth : depths) {
    const Weight mu = weight_at(weight, common, depth, result);
    const GridConfig& cfg = mu.config();
    if (pairs.empty()) {
      const auto cells = static_cast<std::uint64_t>(cfg.cells_per_axis());
      const auto n = static_cast<std::size_t>(cfg.total_dim());
      Rng rng(hash_key(common.seed, {0x6b657175}));
      for (int i = 0; i < opts.pairs; ++i) {
        Point x{std::vector<std::int64_t>(n), cfg.resolution()};
        Point y{std::vector<std::int64_t>(n), cfg.resolution()};
        for (std::size_t a = 0; a < n; ++a) {
          std::uint64_t cx = 0;
          std::uint64_t cy = 0;
          do {
            cx = rng.below(cells);
            cy = rng.below(cells);
          } while (cx == cy);
          x.coords[a] = 2 * static_cast<std::int64_t>(cx) + 1;
          y.coords[a] = 2 * static_cast<std::int64_t>(cy) + 1;
        }
        pairs.emplace_back(std::move(x), std::move(y));
      }
    }
    double rmin = std::numeric_limits<double>::infinity();
    double rmax = 0.0;
    for (const auto& [x, y] : pairs) {
      const double r = kernel_sum(mu, opts.alpha, x, y) / kernel_value(mu, opts.alpha, x, y);
      rmin = std::min(rmin, r);
      rmax = std::max(rmax, r);
    }
    const double spread = std::log(rmax / rmin);
    const bool finite = rmin > 0.0 && std::isfinite(rmax);
    rows.push_back({{"K", cfg.depth()}, {"pairs", opts.pairs}, {"r_min", num(rmin)}, {"r_max", num(rmax)},
                    {"log_spread", num(spread)}});
    checks.push_back(check("finite_interval@K=" + std::to_string(cfg.depth()), finite));
    csv << cfg.depth() << ',' << opts.pairs << ',' << format_double(rmin) << ',' << format_double(rmax) << ','
        << format_double(spread) << '\n';
  }
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i]["log_spread"].is_number() && rows[i - 1]["log_spread"].is_number())
      rows[i]["log_spread_change"] = rows[i]["log_spread"].get<double>() - rows[i - 1]["log_spread"].get<double>();
  }
  if (common.format == "csv") {
    result.text = csv.str();
  } else {
    result.text = envelope("kernel-equiv", common, json{{"alpha", opts.alpha}, {"rows", rows}}, checks);
  }
  result.pass = all_pass(checks);
  return result;
}

CommandResult cmd_shift_cover(const CommonOptions& common, int dim, int max_level) {
  require_json_or_csv(common);
  if (dim < 1 || dim > kMaxFactorDim) throw ParameterError("--dim must be in 1.." + std::to_string(kMaxFactorDim));
  if (max_level < 0 || max_level > kMaxDepth) throw ParameterError("--maxlevel must be in 0.." + std::to_string(kMaxDepth));
  json levels = json::array();
  std::ostringstream csv;
  csv << "level,cubes,failures\n";
  std::size_t total = 0;
  std::size_t failures = 0;
  json first_failure = nullptr;
  for (int k = -max_level; k <= max_level; ++k) {
    // Every residue class mod 8 appears on each axis, including negative indices.
    const std::int64_t lo = -8;
    const std::int64_t hi = std::max<std::int64_t>(8, k >= 0 ? (std::int64_t{1} << k) : 0);
    std::vector<std::int64_t> m(static_cast<std::size_t>(dim), lo);
    std::size_t count = 0;
    std::size_t bad = 0;
    while (true) {
      const DyadicCube q(k, m);
      const auto sc = shift_cover(q);
      bool ok = sc.cover.level() == k - 3 && sc.cover.shift() == sc.tau;
      for (int a = 0; a < dim && ok; ++a) {
        const ExactCoord qlo{q.lower_num(a) - 3, k};
        const ExactCoord qhi{q.lower_num(a) + 6, k};
        ok = sc.cover.lower(a) <= qlo && qhi <= sc.cover.upper(a);
      }
      ++count;
      if (!ok) {
        ++bad;
        if (first_failure.is_null()) first_failure = to_json(q);
      }
      int a = dim - 1;
      for (; a >= 0; --a) {
        if (++m[static_cast<std::size_t>(a)] < hi) break;
        m[static_cast<std::size_t>(a)] = lo;
      }
      if (a < 0) break;
    }
    total += count;
    failures += bad;
    levels.push_back({{"level", k}, {"cubes", count}, {"failures", bad}});
    csv << k << ',' << count << ',' << bad << '\n';
  }
  CommandResult result;
  json checks = json::array({check("every_tripled_cube_covered", failures == 0, static_cast<double>(failures))});
  if (common.format == "csv") {
    result.text = csv.str();
  } else {
    json body{{"dim", dim},       {"max_level", max_level}, {"cubes", total},
              {"failures", failures}, {"levels", levels},     {"first_failure", first_failure}};
    result.text = envelope("shift-cover", common, body, checks);
  }
  result.pass = failures == 0;
  return result;
}

CommandResult cmd_carleson(const CommonOptions& common, const WeightOptions& weight, const CarlesonOptions& opts,
                           const DepthRange& range, const AscentFlags& ascent) {
  require_json_or_csv(common);
  reject_file_for_sweep(weight, "carleson");
  if (!(opts.p > 1.0 && opts.q > opts.p)) throw ParameterError("exponents must satisfy 1 < p < q < inf");
  const auto [kmin, kmax] = depth_range(common, range);
  SweepSpec spec;
  spec.task = SweepTask::carleson;
  spec.weight = weight.spec(common.seed);
  spec.exponents = {opts.p, opts.q};
  spec.seed = common.seed;
  spec.ascent = ascent.options();
  spec.timing = common.timing;
  const auto rows = depth_sweep(spec, kmin, kmax);
  const json checks = ratio_checks(rows);
  CommandResult result;
  if (common.format == "csv") {
    result.text = sweep_csv(rows);
  } else {
    const auto n = static_cast<int>(spec.weight.dims.size());
    json rj = rows_json(rows);
    double cmin = std::numeric_limits<double>::infinity();
    double cmax = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const double c = rows[i].c1_hat / std::pow(rows[i].c2, n);
      rj[i]["C"] = num(c);
      cmin = std::min(cmin, c);
      cmax = std::max(cmax, c);
    }
    json body{{"p", opts.p}, {"q", opts.q}, {"n", n}, {"rows", rj}, {"C_drift", num(cmax / cmin - 1.0)}};
    result.text = envelope("carleson", common, body, checks);
  }
  result.pass = all_pass(checks);
  return result;
}

}  // namespace rfrac::cli
