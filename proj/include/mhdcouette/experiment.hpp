#pragma once

#include <fcntl.h>
#include <openssl/evp.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mhdcouette/config.hpp"
#include "mhdcouette/diagnostics.hpp"

namespace mhdc::exp {

namespace fs = std::filesystem;
using cfg::ExperimentConfig;
using cfg::Kind;

// ---------------------------------------------------------------------------
// Digests
// ---------------------------------------------------------------------------

inline std::string sha1_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha1(), nullptr) != 1) throw Error("SHA-1 failed");
  std::ostringstream os;
  for (unsigned i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

/// Same id git assigns to a file with these contents.
inline std::string git_blob_id(const std::string& contents) {
  return sha1_hex("blob " + std::to_string(contents.size()) + '\0' + contents);
}

inline std::string read_file(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw Error("cannot read " + p.string());
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

inline void write_file(const fs::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw Error("cannot write " + p.string());
  os << text;
  if (!os) throw Error("write failed: " + p.string());
}

/// Tree-style digest of a directory: blob ids of the regular files, sorted
/// by name, hashed together.
inline std::string directory_digest(const fs::path& dir) {
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file()) names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  std::string listing;
  for (const auto& n : names) listing += git_blob_id(read_file(dir / n)) + ' ' + n + '\n';
  return sha1_hex(listing);
}

// ---------------------------------------------------------------------------
// Plans and cells
// ---------------------------------------------------------------------------

struct ExperimentPlan {
  Kind kind = Kind::simulate;
  ExperimentConfig config{};
  std::string config_path;
  fs::path out_dir = "out";
  int jobs = 1;
  bool allow_out_of_theorem = false;
};

inline std::string plan_text(const ExperimentPlan& p) {
  return std::string("# kind = ") + cfg::to_string(p.kind) + "\n" + cfg::serialize(p.config);
}

inline std::string plan_hash(const ExperimentPlan& p) { return sha1_hex(plan_text(p)).substr(0, 12); }

struct Cell {
  std::string id;
  ExperimentConfig config;
};

/// Cartesian product of the sweep axes, sigma outermost and epsilon
/// innermost. linear_sweep keeps the nu list inside a single cell since
/// the fit needs all of them.
inline std::vector<Cell> materialize(const ExperimentPlan& plan) {
  const auto& base = plan.config;
  const auto& w = base.sweep;
  const bool nu_inside = plan.kind == Kind::linear_sweep;
  const auto sigmas = w.sigma.value_or(std::vector{base.sim.params.sigma});
  const auto alphas = w.alpha.value_or(std::vector{base.sim.params.alpha});
  const auto nus = nu_inside ? std::vector{base.sim.params.nu} : w.nu.value_or(std::vector{base.sim.params.nu});
  const auto eps = w.epsilon.value_or(std::vector{base.sim.epsilon});
  if (nu_inside && w.nu && w.nu->empty()) return {};
  std::vector<Cell> out;
  for (const auto& s : sigmas)
    for (double a : alphas)
      for (double n : nus)
        for (double e : eps) {
          Cell c{"", base};
          c.config.sim.params.sigma = s;
          c.config.sim.params.alpha = a;
          c.config.sim.params.nu = n;
          c.config.sim.epsilon = e;
          c.config.sweep = {};
          if (nu_inside) c.config.sweep.nu = w.nu;
          char buf[16];
          std::snprintf(buf, sizeof buf, "c%03zu", out.size());
          c.id = buf;
          out.push_back(std::move(c));
        }
  return out;
}

/// Field-strength gate over all cells. Warnings go to err; throws when a
/// cell is out of range and the override is not set.
inline void check_field_strength(const ExperimentPlan& plan, const std::vector<Cell>& cells, std::ostream& err) {
  if (!cfg::uses_field(plan.kind)) return;
  bool refused = false;
  for (const auto& c : cells) {
    const auto w = cfg::field_strength_warning(c.config.sim.params);
    if (w.empty()) continue;
    err << w << " [" << c.id << "]\n";
    refused = refused || !plan.allow_out_of_theorem;
  }
  if (refused) throw Error("refusing to run outside |alpha| > 8p without --allow-out-of-theorem");
}

// ---------------------------------------------------------------------------
// CSV helpers
// ---------------------------------------------------------------------------

using CsvRow = std::map<std::string, std::string>;

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string get(std::size_t r, const std::string& col) const {
    const auto it = std::find(header.begin(), header.end(), col);
    if (it == header.end()) throw Error("missing CSV column " + col);
    return rows.at(r).at(static_cast<std::size_t>(it - header.begin()));
  }
};

inline CsvTable read_csv(const fs::path& p) {
  std::istringstream is(read_file(p));
  CsvTable t;
  std::string line;
  if (!std::getline(is, line)) throw Error("empty CSV " + p.string());
  t.header = split_csv_line(line);
  while (std::getline(is, line))
    if (!line.empty()) t.rows.push_back(split_csv_line(line));
  return t;
}

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

// ---------------------------------------------------------------------------
// Cell work. Runs in the child process; everything written here must be a
// pure function of the cell config.
// ---------------------------------------------------------------------------

namespace detail {
using cfg::fmt;

inline void write_multiplier_check(const ExperimentConfig& c, std::ostream& csv, std::ostream& log) {
  const auto& M = c.multiplier;
  if (M.samples < 2) throw Error("multiplier samples must be >= 2");
  const auto& p = c.sim.params;
  PhysParams pp = p;
  pp.delta0 = c.delta0 ? *c.delta0 : PhysParams::default_delta0(p.alpha);
  const mult::Wavevector w{M.k, M.eta, M.l};
  csv << "which,t,k,eta,l,nu,alpha,value,method,error_bound\n";
  auto row = [&](mult::Which which, double t, double v, mult::Method m, double err) {
    csv << mult::to_string(which) << ',' << fmt(t) << ',' << M.k << ',' << fmt(M.eta) << ',' << M.l << ','
        << fmt(p.nu) << ',' << fmt(p.alpha) << ',' << fmt(v) << ',' << mult::to_string(m) << ',' << fmt(err) << '\n';
  };
  double log_m3 = 0.0, m3_err = 0.0, t_prev = 0.0;
  for (int i = 0; i < M.samples; ++i) {
    const double t = M.t_max * i / (M.samples - 1);
    if (M.k != 0) {
      row(mult::Which::M1, t, mult::m1_value(t, w), mult::Method::closed_form, 0.0);
      const auto q1 = mult::m1_value_quadrature(t, w);
      row(mult::Which::M1, t, q1.value, mult::Method::quadrature, q1.error);
      if (p.nu > 0.0) {
        row(mult::Which::M2, t, mult::m2_value(t, w, p.nu), mult::Method::closed_form, 0.0);
        const auto q2 = mult::m2_value_quadrature(t, w, p.nu);
        row(mult::Which::M2, t, q2.value, mult::Method::quadrature, q2.error);
      }
      row(mult::Which::M, t, mult::m_combined(t, w, pp, M.upsilon_kmax), mult::Method::closed_form, 0.0);
    } else {
      const auto u = mult::upsilon(t, 0, M.eta, M.upsilon_kmax);
      row(mult::Which::Upsilon, t, u.value, mult::Method::truncated_sum, u.error_bound);
      const auto inc = mult::m3_increment(t_prev, t, 0, M.eta, M.upsilon_kmax);
      log_m3 += inc.log_value;
      m3_err += inc.quad_error + u.error_bound * (t - t_prev);
      const double v = std::exp(log_m3);
      row(mult::Which::M3, t, v, mult::Method::quadrature, v * std::expm1(m3_err));
      row(mult::Which::M, t, v, mult::Method::quadrature, v * std::expm1(m3_err));
      t_prev = t;
    }
  }
  log << "samples " << M.samples << "\n";
}

inline linear::ModeState linear_initial(const ExperimentConfig& c) {
  const auto& L = c.linear;
  if (L.system != linear::SystemKind::zero_mode_liftup) return {L.plus, L.minus};
  // U^2, U^3 with eta U^2 + l U^3 = 0, unit length
  const double n = std::hypot(double(L.l), L.eta);
  if (n == 0.0) throw Error("lift-up needs (eta, l) != 0");
  return {0.0, L.l / n, -L.eta / n, 0.0, 0.0, 0.0};
}

inline void linear_prefix(std::ostream& csv, const char* kind, int k, double eta, int l, const PhysParams& p) {
  csv << kind << ',' << k << ',' << fmt(eta) << ',' << l << ',' << fmt(p.nu) << ',' << fmt(p.alpha) << ','
      << p.sigma.q() << ',' << p.sigma.p() << ',';
}

inline void write_linear_mode(const ExperimentConfig& c, std::ostream& csv, std::ostream& log) {
  const auto& L = c.linear;
  const auto& p = c.sim.params;
  const mult::Wavevector w{L.k, L.eta, L.l};
  const double T = cfg::resolved_linear_T(c);
  linear::IntegratorOptions opt;
  opt.samples = L.samples;
  const auto sol = linear::integrate_system({L.system, w, p, linear_initial(c)}, T, opt);
  csv << "kind,k,eta,l,nu,alpha,sigma_q,sigma_p,t,amplification,tracked\n";
  for (std::size_t i = 0; i < sol.times.size(); ++i) {
    linear_prefix(csv, linear::to_string(L.system), L.k, L.eta, L.l, p);
    csv << fmt(sol.times[i]) << ',' << fmt(sol.amplification[i]) << ',' << fmt(sol.tracked[i]) << '\n';
  }
  log << "T " << fmt(T) << "\npeak " << fmt(sol.peak) << "\nt_peak " << fmt(sol.t_peak) << "\n";
}

inline void write_linear_sweep(const ExperimentConfig& c, std::ostream& csv, std::ostream& log) {
  const auto& L = c.linear;
  const auto& p = c.sim.params;
  const auto nus = c.sweep.nu.value_or(std::vector<double>{1e-2, 1e-3, 1e-4, 1e-5});
  const auto fit = linear::fit_homogeneous_scaling(L.k, L.l, p.sigma, nus, L.quantity, L.m_eta);
  const std::string kind = std::string("homogeneous_") + cfg::detail::to_string(L.quantity);
  csv << "kind,k,eta,l,nu,alpha,sigma_q,sigma_p,t_peak,peak,slope\n";
  for (std::size_t i = 0; i < fit.nus.size(); ++i) {
    PhysParams q = p;
    q.nu = fit.nus[i];
    linear_prefix(csv, kind.c_str(), L.k, fit.etas[i], L.l, q);
    csv << fmt(fit.t_peaks[i]) << ',' << fmt(fit.peaks[i]) << ',' << fmt(fit.slope) << '\n';
  }
  log << "slope " << fmt(fit.slope) << "\nr_squared " << fmt(fit.r_squared) << "\n";
}

inline void write_simulation(Kind kind, const ExperimentConfig& c, const fs::path& dir, std::ostream& log) {
  const SimConfig sim = cfg::resolved_sim(c);
  diag::Panels panels = diag::make_panels(sim);
  MhdState last;
  auto tr = run(sim, [&](const MhdState& s) {
    panels.bootstrap.record(s);
    panels.theorem.record(s);
    last = s;
  });
  auto rows = diag::bootstrap_panel(panels, sim.epsilon);
  const auto thm = diag::theorem_bound_check(panels, sim.epsilon);
  rows.insert(rows.end(), thm.begin(), thm.end());
  {
    std::ostringstream os;
    diag::write_csv(os, rows);
    write_file(dir / "diagnostics.csv", os.str());
  }
  if (kind == Kind::norms_report) {
    log << "steps " << sim.steps() << "\n";
    return;
  }
  std::ostringstream energy;
  energy << "t,energy,dissipation,stress\n";
  double e0 = tr.energy.front().energy, peak = 1.0, t_peak = 0.0;
  for (const auto& r : tr.energy) {
    energy << fmt(r.t) << ',' << fmt(r.energy) << ',' << fmt(r.dissipation) << ',' << fmt(r.stress) << '\n';
    if (e0 > 0.0 && r.energy / e0 > peak) {
      peak = r.energy / e0;
      t_peak = r.t;
    }
  }
  write_file(dir / "energy.csv", energy.str());
  write_snapshot((dir / "states.bin").string(), last);

  double peak_const = 0.0, b1 = 0.0;
  std::string peak_row;
  bool finite = true;
  for (const auto& r : rows) {
    finite = finite && r.finite();
    if (r.measured_constant > peak_const || peak_row.empty()) {
      peak_const = r.measured_constant;
      peak_row = r.id;
    }
    if (r.id == "thm_b1") b1 = r.measured_constant;
  }
  const auto& p = sim.params;
  std::ostringstream sum;
  sum << "nu,alpha,sigma_q,sigma_p,epsilon,t_final,peak_energy_ratio,t_peak_energy,peak_constant,peak_row,"
         "thm_b1_constant,all_finite\n"
      << fmt(p.nu) << ',' << fmt(p.alpha) << ',' << p.sigma.q() << ',' << p.sigma.p() << ',' << fmt(sim.epsilon) << ','
      << fmt(sim.T_final) << ',' << fmt(peak) << ',' << fmt(t_peak) << ',' << fmt(peak_const) << ',' << peak_row
      << ',' << fmt(b1) << ',' << (finite ? "true" : "false") << '\n';
  write_file(dir / "summary.csv", sum.str());
  log << "steps " << sim.steps() << "\nremaps " << tr.remaps.size() << "\nmax_div_defect " << fmt(tr.max_div_defect)
      << "\npeak_energy_ratio " << fmt(peak) << "\n";
}
}  // namespace detail

/// Does the work of one cell inside dir, which must hold its config.
/// Output goes to files in dir and progress lines to log.
inline void run_cell(Kind kind, const fs::path& dir, std::ostream& log) {
  const auto c = cfg::parse_config_text(read_file(dir / "config"));
  log << "kind " << cfg::to_string(kind) << "\n";
  std::ostringstream csv;
  switch (kind) {
    case Kind::multiplier_check: detail::write_multiplier_check(c, csv, log); break;
    case Kind::linear_mode: detail::write_linear_mode(c, csv, log); break;
    case Kind::linear_sweep: detail::write_linear_sweep(c, csv, log); break;
    case Kind::simulate:
    case Kind::threshold_sweep:
    case Kind::norms_report: detail::write_simulation(kind, c, dir, log); return;
  }
  write_file(dir / "diagnostics.csv", csv.str());
}

// ---------------------------------------------------------------------------
// Orchestration
// ---------------------------------------------------------------------------

struct RunRecord {
  std::string cell_id;
  std::string plan_hash;
  std::string config;  // snapshot of the cell config
  std::string digest;  // empty when the cell failed
  double wall_seconds = 0.0;
  bool ok = false;
  int exit_code = 0;
  fs::path dir;
};

struct ExecutionResult {
  std::string plan_hash;
  fs::path dir;
  std::vector<RunRecord> records;
  int exit_code() const {
    for (const auto& r : records)
      if (!r.ok) return 1;
    return 0;
  }
};

namespace detail {
struct Child {
  pid_t pid;
  std::size_t index;
  std::chrono::steady_clock::time_point start;
};

inline pid_t spawn_cell(const std::string& exe, Kind kind, const fs::path& dir) {
  posix_spawn_file_actions_t fa;
  posix_spawn_file_actions_init(&fa);
  const std::string log = (dir / "log").string();
  posix_spawn_file_actions_addopen(&fa, STDOUT_FILENO, log.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  posix_spawn_file_actions_adddup2(&fa, STDOUT_FILENO, STDERR_FILENO);
  const std::string k = cfg::to_string(kind), d = dir.string();
  std::vector<char*> argv{const_cast<char*>(exe.c_str()), const_cast<char*>("run-cell"),
                          const_cast<char*>("--kind"),    const_cast<char*>(k.c_str()),
                          const_cast<char*>(d.c_str()),   nullptr};
  pid_t pid = 0;
  const int rc = posix_spawn(&pid, exe.c_str(), &fa, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&fa);
  if (rc != 0) throw Error("cannot start " + exe + ": " + std::strerror(rc));
  return pid;
}

inline void write_threshold_table(const ExecutionResult& res) {
  std::ostringstream os;
  os << "cell_id,status,nu,epsilon,alpha,peak_energy_ratio,t_peak_energy,peak_constant,peak_row,thm_b1_constant,"
        "all_finite\n";
  for (const auto& r : res.records) {
    const auto c = cfg::parse_config_text(r.config);
    os << r.cell_id << ',' << (r.ok ? "ok" : "failed") << ',' << cfg::fmt(c.sim.params.nu) << ','
       << cfg::fmt(c.sim.epsilon) << ',' << cfg::fmt(c.sim.params.alpha) << ',';
    if (r.ok) {
      const auto t = read_csv(r.dir / "summary.csv");
      os << t.get(0, "peak_energy_ratio") << ',' << t.get(0, "t_peak_energy") << ',' << t.get(0, "peak_constant")
         << ',' << t.get(0, "peak_row") << ',' << t.get(0, "thm_b1_constant") << ',' << t.get(0, "all_finite");
    } else {
      os << ",,,,,";
    }
    os << '\n';
  }
  write_file(res.dir / "threshold_sweep.csv", os.str());
}
}  // namespace detail

/// Tidy CSVs per figure family in dir. Every family is written, header-only
/// when no record contributes to it.
///   g2_scaling.csv        nu,peak,t_peak,slope_global
///   envelopes.csv         cell_id,kind,k,eta,l,nu,alpha,t,amplification,tracked
///   bootstrap_panels.csv  cell_id,nu,alpha,epsilon + the diagnostics columns
///   norms_report.csv      the diagnostics columns, unchanged
inline void emit_plot_data(const std::vector<RunRecord>& records, Kind kind, const fs::path& dir) {
  fs::create_directories(dir);
  const std::string diag_header = "bound_id,paper_eq,lhs,rhs_scale,measured_constant,class,N_used";
  std::ostringstream g2, env, boot, norms;
  g2 << "nu,peak,t_peak,slope_global\n";
  env << "cell_id,kind,k,eta,l,nu,alpha,t,amplification,tracked\n";
  boot << "cell_id,nu,alpha,epsilon," << diag_header << '\n';
  norms << diag_header << '\n';
  for (const auto& r : records) {
    if (!r.ok) continue;
    const auto t = read_csv(r.dir / "diagnostics.csv");
    const auto c = cfg::parse_config_text(r.config);
    if (kind == Kind::linear_sweep) {
      for (std::size_t i = 0; i < t.rows.size(); ++i)
        if (t.get(i, "kind") == "homogeneous_G2")
          g2 << t.get(i, "nu") << ',' << t.get(i, "peak") << ',' << t.get(i, "t_peak") << ',' << t.get(i, "slope")
             << '\n';
    } else if (kind == Kind::linear_mode) {
      for (std::size_t i = 0; i < t.rows.size(); ++i) {
        env << r.cell_id;
        for (const char* col : {"kind", "k", "eta", "l", "nu", "alpha", "t", "amplification", "tracked"})
          env << ',' << t.get(i, col);
        env << '\n';
      }
    } else if (kind == Kind::norms_report) {
      const auto text = read_file(r.dir / "diagnostics.csv");
      norms << text.substr(text.find('\n') + 1);
    } else if (kind == Kind::simulate || kind == Kind::threshold_sweep) {
      for (const auto& row : t.rows) {
        boot << r.cell_id << ',' << cfg::fmt(c.sim.params.nu) << ',' << cfg::fmt(c.sim.params.alpha) << ','
             << cfg::fmt(c.sim.epsilon);
        for (const auto& v : row) boot << ',' << csv_quote(v);
        boot << '\n';
      }
    }
  }
  write_file(dir / "g2_scaling.csv", g2.str());
  write_file(dir / "envelopes.csv", env.str());
  write_file(dir / "bootstrap_panels.csv", boot.str());
  write_file(dir / "norms_report.csv", norms.str());
}

/// Runs every cell of the plan as a child process of exe (at most
/// plan.jobs at once), then writes the summary, the combined tables and the
/// plot data under out_dir/<plan hash>/.
inline ExecutionResult execute(const ExperimentPlan& plan, const std::string& exe, std::ostream& out,
                               std::ostream& err) {
  if (plan.jobs < 1) throw Error("--jobs must be >= 1");
  const auto cells = materialize(plan);
  for (const auto& c : cells) {
    cfg::resolved_sim(c.config).validate();
    c.config.sim.params.validate();
  }
  check_field_strength(plan, cells, err);

  ExecutionResult res;
  res.plan_hash = plan_hash(plan);
  res.dir = plan.out_dir / res.plan_hash;
  std::error_code ec;
  fs::create_directories(res.dir, ec);
  if (ec) throw Error("output directory not writable: " + res.dir.string() + ": " + ec.message());
  write_file(res.dir / "plan.ini", plan_text(plan));

  for (const auto& c : cells) {
    RunRecord r;
    r.cell_id = c.id;
    r.plan_hash = res.plan_hash;
    r.config = cfg::serialize(c.config);
    r.dir = res.dir / c.id;
    fs::remove_all(r.dir);
    fs::create_directories(r.dir);
    write_file(r.dir / "config", r.config);
    res.records.push_back(std::move(r));
  }

  std::vector<detail::Child> running;
  std::size_t next = 0;
  while (next < res.records.size() || !running.empty()) {
    while (next < res.records.size() && static_cast<int>(running.size()) < plan.jobs) {
      running.push_back({detail::spawn_cell(exe, plan.kind, res.records[next].dir), next,
                         std::chrono::steady_clock::now()});
      ++next;
    }
    int status = 0;
    const pid_t pid = waitpid(-1, &status, 0);
    if (pid < 0) throw Error("waitpid failed");
    const auto it = std::find_if(running.begin(), running.end(), [&](const auto& c) { return c.pid == pid; });
    if (it == running.end()) continue;
    auto& r = res.records[it->index];
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - it->start).count();
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
    r.ok = r.exit_code == 0;
    if (r.ok) r.digest = directory_digest(r.dir);
    running.erase(it);
  }

  std::ostringstream summary;
  summary << "cell_id,status,exit_code,digest\n";
  for (const auto& r : res.records)
    summary << r.cell_id << ',' << (r.ok ? "ok" : "failed") << ',' << r.exit_code << ',' << r.digest << '\n';
  write_file(res.dir / "summary.csv", summary.str());
  if (plan.kind == Kind::threshold_sweep) detail::write_threshold_table(res);
  emit_plot_data(res.records, plan.kind, res.dir / "plot");

  out << "plan " << res.plan_hash << "  " << res.records.size() << " cell(s)  " << res.dir.string() << "\n";
  out << std::left << std::setw(8) << "cell" << std::setw(8) << "status" << std::setw(14) << "digest"
      << "wall_s\n";
  for (const auto& r : res.records)
    out << std::setw(8) << r.cell_id << std::setw(8) << (r.ok ? "ok" : "FAILED") << std::setw(14)
        << (r.ok ? r.digest.substr(0, 12) : "-") << std::fixed << std::setprecision(2) << r.wall_seconds << "\n";
  out.unsetf(std::ios::fixed);
  return res;
}

}  // namespace mhdc::exp
