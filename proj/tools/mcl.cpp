#include <CLI11.hpp>

#include <climits>
#include <iostream>
#include <optional>
#include <string>

#include "mhdcouette/experiment.hpp"

namespace {

using namespace mhdc;

struct Common {
  std::string config;
  std::string out = "out";
  int jobs = 1;
  std::optional<std::uint64_t> seed;
  bool allow = false;
};

std::string self_path(const char* argv0) {
  char buf[PATH_MAX];
  const ssize_t n = readlink("/proc/self/exe", buf, sizeof buf - 1);
  if (n <= 0) return argv0;
  buf[n] = '\0';
  return buf;
}

int run_plan(cfg::Kind kind, const Common& o, const std::string& exe) {
  exp::ExperimentPlan plan;
  plan.kind = kind;
  if (!o.config.empty()) {
    plan.config = cfg::parse_config(o.config);
    plan.config_path = o.config;
  } else {
    plan.config = cfg::from_entries(cfg::environment_entries());
  }
  if (o.seed) plan.config.sim.seed = *o.seed;
  plan.out_dir = o.out;
  plan.jobs = o.jobs;
  plan.allow_out_of_theorem = o.allow;
  const auto res = exp::execute(plan, exe, std::cout, std::cerr);
  return res.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pseudo-spectral lab for magnetized Couette flow perturbations"};
  app.require_subcommand(1);
  app.footer(cfg::documented_defaults());
  const std::string exe = self_path(argv[0]);

  Common opts;
  struct Sub {
    const char* name;
    cfg::Kind kind;
    const char* help;
  };
  const Sub subs[] = {
      {"multiplier-check", cfg::Kind::multiplier_check, "Tabulate M1, M2, M3, Upsilon and M against quadrature"},
      {"linear-mode", cfg::Kind::linear_mode, "Integrate one linear mode system, write its time series"},
      {"linear-sweep", cfg::Kind::linear_sweep, "Peak homogeneous amplification over a nu list with a log-log fit"},
      {"simulate", cfg::Kind::simulate, "Nonlinear run with bootstrap and theorem panels"},
      {"threshold-sweep", cfg::Kind::threshold_sweep, "Nonlinear runs over (nu, epsilon) with a combined peak table"},
      {"norms-report", cfg::Kind::norms_report, "Nonlinear run writing only the norm panel CSV"},
  };
  std::optional<cfg::Kind> chosen;
  for (const auto& s : subs) {
    auto* sc = app.add_subcommand(s.name, s.help);
    sc->add_option("--config", opts.config, "INI config file")->check(CLI::ExistingFile);
    sc->add_option("--out", opts.out, "output directory")->capture_default_str();
    sc->add_option("--jobs", opts.jobs, "child runs at once")->capture_default_str()->check(CLI::PositiveNumber);
    sc->add_option("--seed", opts.seed, "override run.seed");
    sc->add_flag("--allow-out-of-theorem", opts.allow, "run even when alpha <= 8p");
    sc->footer(cfg::documented_defaults());
    sc->callback([&chosen, k = s.kind] { chosen = k; });
  }

  std::string cell_kind, cell_dir;
  auto* cell = app.add_subcommand("run-cell", "internal: run one prepared cell directory");
  cell->group("");
  cell->add_option("--kind", cell_kind)->required();
  cell->add_option("dir", cell_dir)->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (cell->parsed()) {
      exp::run_cell(cfg::kind_from_string(cell_kind), cell_dir, std::cout);
      return 0;
    }
    return run_plan(*chosen, opts, exe);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
