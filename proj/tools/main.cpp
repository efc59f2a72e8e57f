#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "manifest.hpp"
#include "rfrac/parallel.hpp"

namespace {

using namespace rfrac::cli;

void add_common(CLI::App* sub, CommonOptions& c) {
  sub->add_option("--format", c.format, "json or csv")->capture_default_str();
  sub->add_option("--seed", c.seed, "Seed for every random draw")->capture_default_str();
  sub->add_option("--threads", c.threads, "Worker threads (never changes output)")->capture_default_str();
  sub->add_option("--depth", c.depth, "Lattice depth K")->capture_default_str();
  sub->add_option("--out", c.out, "Output file, - for stdout")->capture_default_str();
  sub->add_flag("--timing", c.timing, "Fill the seconds column (breaks byte-identical output)");
}

void add_weight(CLI::App* sub, WeightOptions& w) {
  sub->add_option("--weight", w.file, "Weight file (instead of a generator recipe)");
  sub->add_option("--kind", w.kind, "uniform, power or cascade")->capture_default_str();
  sub->add_option("--dims", w.dims, "Factor dimensions, e.g. 1,1")->delimiter(',')->capture_default_str();
  sub->add_option("--rho", w.rho, "Cascade ratio bound in (1,4]")->capture_default_str();
  sub->add_option("--power-exp", w.power_exponents, "Power weight exponent, one value or one per axis")->delimiter(',');
  sub->add_option("--center", w.center, "Power weight center, one value or one per axis")->delimiter(',');
  sub->add_option("--weight-seed", w.weight_seed, "Cascade seed (defaults to --seed)");
}

void add_ascent(CLI::App* sub, AscentFlags& a) {
  sub->add_option("--tol", a.tol, "Relative stopping gain")->capture_default_str();
  sub->add_option("--max-sweeps", a.max_sweeps, "Sweep limit per start")->capture_default_str();
  sub->add_option("--restarts", a.restarts, "Extra random starts")->capture_default_str();
}

void add_range(CLI::App* sub, DepthRange& r) {
  sub->add_option("--kmin", r.kmin, "First depth of the sweep (defaults to --depth)");
  sub->add_option("--kmax", r.kmax, "Last depth of the sweep");
}

nlohmann::json collect_params(const CLI::App* sub) {
  nlohmann::json params = nlohmann::json::object();
  for (const CLI::Option* opt : sub->get_options()) {
    const std::string name = opt->get_name();
    if (name == "--help" || name.empty()) continue;
    if (opt->count() > 0) {
      params[name] = opt->results();
    } else if (!opt->get_default_str().empty()) {
      params[name] = opt->get_default_str();
    }
  }
  return params;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rectangular dyadic fractional integrals: weights, constants, norm estimates"};
  app.set_version_flag("--version", RFRAC_VERSION);
  app.require_subcommand(1);

  CommonOptions common;
  WeightOptions weight;
  AscentFlags ascent;
  DepthRange range;
  std::vector<double> eps;
  FpOptions fp;
  EmbedOptions embed;
  HlsOptions hls;
  KernelEquivOptions equiv;
  CarlesonOptions carleson;
  int cover_dim = 1;
  int cover_level = 6;

  auto* gen = app.add_subcommand("gen-weight", "Write a weight file");
  add_common(gen, common);
  add_weight(gen, weight);

  auto* chk = app.add_subcommand("check-weight", "Doubling, reverse doubling and condition (D) constants");
  add_common(chk, common);
  add_weight(chk, weight);
  chk->add_option("--eps", eps, "Condition (D) exponents")->delimiter(',');

  auto* fpc = app.add_subcommand("fp", "Fefferman-Phong constant of a kernel");
  add_common(fpc, common);
  add_weight(fpc, weight);
  fpc->add_option("--kernel", fp.kernel, "fractional, random or balanced")->capture_default_str();
  fpc->add_option("--alpha", fp.alpha, "Fractional order")->capture_default_str();
  fpc->add_option("--p", fp.p, "p (fractional kernel)")->capture_default_str();
  fpc->add_option("--q", fp.q, "q (defaults to 1/q = 1/p - alpha/N)");
  fpc->add_option("--exponents", fp.exponents, "p_1,...,p_M (random kernels)")->delimiter(',');

  auto* emb = app.add_subcommand("embed-norm", "M-linear embedding constant, depth sweep");
  add_common(emb, common);
  add_weight(emb, weight);
  add_ascent(emb, ascent);
  add_range(emb, range);
  emb->add_option("--kernel", embed.kernel, "random, balanced or fractional")->capture_default_str();
  emb->add_option("--exponents", embed.exponents, "p_1,...,p_M")->delimiter(',')->capture_default_str();
  emb->add_option("--alpha", embed.alpha, "Fractional order (fractional kernel)")->capture_default_str();

  auto* hl = app.add_subcommand("hls", "L^p -> L^q norm of the fractional operators, depth sweep");
  add_common(hl, common);
  add_weight(hl, weight);
  add_ascent(hl, ascent);
  add_range(hl, range);
  hl->add_option("--alpha", hls.alpha, "Fractional order")->capture_default_str();
  hl->add_option("--p", hls.p, "p")->capture_default_str();
  hl->add_option("--q", hls.q, "q (defaults to 1/q = 1/p - alpha/N)");
  hl->add_option("--form", hls.form, "dyadic, perez, kernel, shifted-sum or all")->capture_default_str();

  auto* eq = app.add_subcommand("kernel-equiv", "Kernel sum versus mu(R(x,y))^(alpha/N-1) on sampled pairs");
  add_common(eq, common);
  add_weight(eq, weight);
  add_range(eq, range);
  eq->add_option("--alpha", equiv.alpha, "Fractional order")->capture_default_str();
  eq->add_option("--pairs", equiv.pairs, "Sampled pairs (cell centers of the first depth, reused at every depth)")->capture_default_str();

  auto* sc = app.add_subcommand("shift-cover", "Exhaustive check of the one-third shifted cover");
  add_common(sc, common);
  sc->add_option("--dim", cover_dim, "Cube dimension")->capture_default_str();
  sc->add_option("--maxlevel", cover_level, "Levels -L..L")->capture_default_str();

  auto* car = app.add_subcommand("carleson", "Carleson embedding constant against its testing constant");
  add_common(car, common);
  add_weight(car, weight);
  add_ascent(car, ascent);
  add_range(car, range);
  car->add_option("--p", carleson.p, "p")->capture_default_str();
  car->add_option("--q", carleson.q, "q")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  CLI::App* active = app.get_subcommands().front();
  RunManifest manifest;
  manifest.subcommand = active->get_name();
  manifest.params = collect_params(active);
  manifest.seed = common.seed;
  manifest.started = utc_timestamp();

  try {
    rfrac::set_thread_count(common.threads);
    CommandResult result;
    const std::string name = active->get_name();
    if (name == "gen-weight") {
      result = cmd_gen_weight(common, weight);
    } else if (name == "check-weight") {
      result = cmd_check_weight(common, weight, eps);
    } else if (name == "fp") {
      result = cmd_fp(common, weight, fp);
    } else if (name == "embed-norm") {
      result = cmd_embed_norm(common, weight, embed, range, ascent);
    } else if (name == "hls") {
      result = cmd_hls(common, weight, hls, range, ascent);
    } else if (name == "kernel-equiv") {
      result = cmd_kernel_equiv(common, weight, equiv, range);
    } else if (name == "shift-cover") {
      result = cmd_shift_cover(common, cover_dim, cover_level);
    } else {
      result = cmd_carleson(common, weight, carleson, range, ascent);
    }

    if (common.out == "-") {
      std::cout << result.text;
    } else {
      std::ofstream out(common.out, std::ios::binary);
      if (!out) throw std::runtime_error("cannot write " + common.out);
      out << result.text;
      out.close();
      manifest.weight_files = result.weight_files;
      manifest.finished = utc_timestamp();
      std::ofstream mf(manifest_path(common.out), std::ios::binary);
      mf << manifest.to_json().dump(2) << '\n';
    }
    if (!result.pass) {
      std::cerr << "rfrac " << name << ": one or more checks failed\n";
      return 1;
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "rfrac " << active->get_name() << ": " << e.what() << '\n';
    return 2;
  }
}
