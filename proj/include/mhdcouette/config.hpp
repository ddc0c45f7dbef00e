#pragma once

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mhdcouette/solver.hpp"

extern char** environ;

namespace mhdc::cfg {

enum class Kind { multiplier_check, linear_mode, linear_sweep, simulate, threshold_sweep, norms_report };

inline const char* to_string(Kind k) {
  switch (k) {
    case Kind::multiplier_check: return "multiplier_check";
    case Kind::linear_mode: return "linear_mode";
    case Kind::linear_sweep: return "linear_sweep";
    case Kind::simulate: return "simulate";
    case Kind::threshold_sweep: return "threshold_sweep";
    case Kind::norms_report: return "norms_report";
  }
  return "?";
}

inline Kind kind_from_string(const std::string& s) {
  for (Kind k : {Kind::multiplier_check, Kind::linear_mode, Kind::linear_sweep, Kind::simulate, Kind::threshold_sweep,
                 Kind::norms_report}) {
    std::string dashed = to_string(k);
    std::replace(dashed.begin(), dashed.end(), '_', '-');
    if (s == to_string(k) || s == dashed) return k;
  }
  throw Error("unknown experiment kind: " + s);
}

/// Kinds whose results depend on the field strength.
inline bool uses_field(Kind k) { return k != Kind::multiplier_check && k != Kind::linear_sweep; }

struct MultiplierSettings {
  int k = 1;
  double eta = 0.0;
  int l = 0;
  double t_max = 10.0;
  int samples = 11;
  int upsilon_kmax = mult::kDefaultUpsilonKmax;
};

struct LinearSettings {
  linear::SystemKind system = linear::SystemKind::homogeneous_QG;
  int k = 1;
  double eta = 0.0;
  int l = -1;
  std::optional<double> T;  // unset: 10 nu^{-1/3}
  double plus = 1.0;        // two-component systems
  double minus = 0.0;
  int samples = 2001;
  linear::HomogeneousQuantity quantity = linear::HomogeneousQuantity::G2;
  int m_eta = 8;
};

/// Lists of values to take the cartesian product over. An absent axis uses
/// the base value; an axis given as [] yields no cells at all.
struct SweepAxes {
  std::optional<std::vector<double>> nu, alpha, epsilon;
  std::optional<std::vector<RationalShearAngle>> sigma;
};

struct ExperimentConfig {
  SimConfig sim{};
  std::optional<double> delta0;   // unset: 1/(100 alpha)
  std::optional<double> T_final;  // unset: 4 nu^{-1/3}, rounded up to a multiple of dt
  LinearSettings linear{};
  MultiplierSettings multiplier{};
  SweepAxes sweep{};
};

// ---------------------------------------------------------------------------
// Value formatting and parsing
// ---------------------------------------------------------------------------

/// Shortest text that reads back to the same double.
inline std::string fmt(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline std::string fmt(const RationalShearAngle& s) { return std::to_string(s.q()) + "/" + std::to_string(s.p()); }

template <class T>
std::string fmt_list(const std::vector<T>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + fmt(v[i]);
  return out + "]";
}

namespace detail {
inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

[[noreturn]] inline void bad(const std::string& key, const std::string& v, const std::string& what) {
  throw Error("config key " + key + " = '" + v + "': expected " + what);
}

inline double to_double(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  double x = 0.0;
  auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size() || !std::isfinite(x)) bad(key, raw, "a finite number");
  return x;
}

inline long long to_int(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  long long x = 0;
  auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) bad(key, raw, "an integer");
  return x;
}

inline bool to_bool(const std::string& key, const std::string& raw) {
  const std::string v = lower(trim(raw));
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad(key, raw, "true or false");
}

inline RationalShearAngle to_sigma(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  const auto slash = v.find('/');
  if (slash == std::string::npos) return {to_int(key, v), 1};
  const long long p = to_int(key, v.substr(slash + 1));
  if (p == 0) bad(key, raw, "a nonzero denominator");
  return {to_int(key, v.substr(0, slash)), p};
}

inline std::vector<std::string> to_items(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (v.size() < 2 || v.front() != '[' || v.back() != ']') bad(key, raw, "a list like [a, b, c]");
  std::vector<std::string> out;
  const std::string body = trim(v.substr(1, v.size() - 2));
  if (body.empty()) return out;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

inline const char* to_string(linear::HomogeneousQuantity q) { return q == linear::HomogeneousQuantity::G2 ? "G2" : "Q2"; }

template <class E>
E to_enum(const std::string& key, const std::string& raw, std::initializer_list<E> options) {
  const std::string v = trim(raw);
  std::string list;
  for (E e : options) {
    if (v == to_string(e)) return e;
    list += (list.empty() ? "" : ", ") + std::string(to_string(e));
  }
  bad(key, raw, "one of " + list);
}


inline ModeIndex to_mode(const std::string& key, const std::string& raw) {
  const auto items = to_items(key, raw);
  if (items.size() != 3) bad(key, raw, "[k, j, l]");
  return {static_cast<int>(to_int(key, items[0])), static_cast<int>(to_int(key, items[1])),
          static_cast<int>(to_int(key, items[2]))};
}
}  // namespace detail

// ---------------------------------------------------------------------------
// Key table
// ---------------------------------------------------------------------------

/// Every recognised key, "section.key", in serialization order.
inline const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys{
      "grid.nx",           "grid.ny",           "grid.nz",          "grid.m",          "grid.dealias_fraction",
      "params.nu",         "params.alpha",      "params.sigma",     "params.delta0",   "run.dt",
      "run.t_final",       "run.epsilon",       "run.seed",         "run.ic",          "run.ic_profile",
      "run.ic_width",      "run.ic_band",       "run.ic_mode",      "run.ic_file",     "run.remap",
      "run.diagnostics_every", "run.sobolev_n", "run.nonlinear",    "run.store_every", "linear.system",
      "linear.k",          "linear.eta",        "linear.l",         "linear.t",        "linear.plus",
      "linear.minus",      "linear.samples",    "linear.quantity",  "linear.m_eta",    "multiplier.k",
      "multiplier.eta",    "multiplier.l",      "multiplier.t_max", "multiplier.samples",
      "multiplier.upsilon_kmax", "sweep.nu",    "sweep.alpha",      "sweep.epsilon",   "sweep.sigma"};
  return keys;
}

/// Help text listing keys with their defaults.
inline std::string documented_defaults();

using Entries = std::map<std::string, std::string>;  // "section.key" -> raw value

inline void apply(ExperimentConfig& c, const std::string& key, const std::string& v) {
  using namespace detail;
  auto& s = c.sim;
  if (key == "grid.nx") s.grid.nx = static_cast<int>(to_int(key, v));
  else if (key == "grid.ny") s.grid.ny = static_cast<int>(to_int(key, v));
  else if (key == "grid.nz") s.grid.nz = static_cast<int>(to_int(key, v));
  else if (key == "grid.m") s.grid.m = static_cast<int>(to_int(key, v));
  else if (key == "grid.dealias_fraction") s.grid.dealias_fraction = to_double(key, v);
  else if (key == "params.nu") s.params.nu = to_double(key, v);
  else if (key == "params.alpha") s.params.alpha = to_double(key, v);
  else if (key == "params.sigma") s.params.sigma = to_sigma(key, v);
  else if (key == "params.delta0") c.delta0 = lower(trim(v)) == "auto" ? std::nullopt : std::optional(to_double(key, v));
  else if (key == "run.dt") s.dt = to_double(key, v);
  else if (key == "run.t_final") c.T_final = lower(trim(v)) == "auto" ? std::nullopt : std::optional(to_double(key, v));
  else if (key == "run.epsilon") s.epsilon = to_double(key, v);
  else if (key == "run.seed") {
    const long long x = to_int(key, v);
    if (x < 0) bad(key, v, "a non-negative integer");
    s.seed = static_cast<std::uint64_t>(x);
  } else if (key == "run.ic") s.ic_kind = to_enum(key, v, {IcKind::random_band, IcKind::single_mode, IcKind::file});
  else if (key == "run.ic_profile") s.ic_profile = to_enum(key, v, {IcProfile::flat, IcProfile::gaussian});
  else if (key == "run.ic_width") s.ic_width = to_double(key, v);
  else if (key == "run.ic_band") s.ic_band = static_cast<int>(to_int(key, v));
  else if (key == "run.ic_mode") s.ic_mode = to_mode(key, v);
  else if (key == "run.ic_file") s.ic_file = trim(v);
  else if (key == "run.remap")
    s.remap_policy = to_enum(key, v, {RemapPolicy::none, RemapPolicy::periodic_at_integer_multiples});
  else if (key == "run.diagnostics_every") s.diagnostics_every = to_double(key, v);
  else if (key == "run.sobolev_n") s.sobolev_N = to_double(key, v);
  else if (key == "run.nonlinear") s.nonlinear = to_bool(key, v);
  else if (key == "run.store_every") s.store_every = static_cast<int>(to_int(key, v));
  else if (key == "linear.system")
    c.linear.system = to_enum(key, v,
                              {linear::SystemKind::homogeneous_QG, linear::SystemKind::nonhomogeneous_F2,
                               linear::SystemKind::nonhomogeneous_sym_v2, linear::SystemKind::zero_mode_liftup});
  else if (key == "linear.k") c.linear.k = static_cast<int>(to_int(key, v));
  else if (key == "linear.eta") c.linear.eta = to_double(key, v);
  else if (key == "linear.l") c.linear.l = static_cast<int>(to_int(key, v));
  else if (key == "linear.t") c.linear.T = lower(trim(v)) == "auto" ? std::nullopt : std::optional(to_double(key, v));
  else if (key == "linear.plus") c.linear.plus = to_double(key, v);
  else if (key == "linear.minus") c.linear.minus = to_double(key, v);
  else if (key == "linear.samples") c.linear.samples = static_cast<int>(to_int(key, v));
  else if (key == "linear.quantity")
    c.linear.quantity = to_enum(key, v, {linear::HomogeneousQuantity::G2, linear::HomogeneousQuantity::Q2});
  else if (key == "linear.m_eta") c.linear.m_eta = static_cast<int>(to_int(key, v));
  else if (key == "multiplier.k") c.multiplier.k = static_cast<int>(to_int(key, v));
  else if (key == "multiplier.eta") c.multiplier.eta = to_double(key, v);
  else if (key == "multiplier.l") c.multiplier.l = static_cast<int>(to_int(key, v));
  else if (key == "multiplier.t_max") c.multiplier.t_max = to_double(key, v);
  else if (key == "multiplier.samples") c.multiplier.samples = static_cast<int>(to_int(key, v));
  else if (key == "multiplier.upsilon_kmax") c.multiplier.upsilon_kmax = static_cast<int>(to_int(key, v));
  else if (key.starts_with("sweep.")) {
    const auto items = to_items(key, v);
    if (key == "sweep.sigma") {
      std::vector<RationalShearAngle> xs;
      for (const auto& i : items) xs.push_back(to_sigma(key, i));
      c.sweep.sigma = xs;
    } else {
      std::vector<double> xs;
      for (const auto& i : items) xs.push_back(to_double(key, i));
      if (key == "sweep.nu") c.sweep.nu = xs;
      else if (key == "sweep.alpha") c.sweep.alpha = xs;
      else c.sweep.epsilon = xs;
    }
  } else
    throw Error("unknown config key: " + key);
}

/// Reads MCL_<SECTION>_<KEY> variables, e.g. MCL_PARAMS_NU=1e-3.
inline Entries environment_entries(char** env = environ) {
  Entries out;
  if (!env) return out;
  for (char** e = env; *e; ++e) {
    const std::string kv = *e;
    if (!kv.starts_with("MCL_")) continue;
    const auto eq = kv.find('=');
    if (eq == std::string::npos) continue;
    const std::string name = detail::lower(kv.substr(4, eq - 4));
    const auto us = name.find('_');
    const std::string key = us == std::string::npos ? name : name.substr(0, us) + "." + name.substr(us + 1);
    out[key] = kv.substr(eq + 1);
  }
  return out;
}

inline Entries read_entries(std::istream& is) {
  boost::property_tree::ptree pt;
  try {
    boost::property_tree::ini_parser::read_ini(is, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error(std::string("malformed config: ") + e.what());
  }
  Entries out;
  for (const auto& [section, body] : pt) {
    if (body.empty()) throw Error("malformed config: key '" + section + "' outside a section");
    for (const auto& [key, value] : body) out[detail::lower(section) + "." + detail::lower(key)] = value.data();
  }
  return out;
}

/// Builds a config from entries on top of the defaults. Unknown keys are
/// collected and reported together.
inline ExperimentConfig from_entries(const Entries& entries) {
  const auto& keys = known_keys();
  std::vector<std::string> unknown;
  for (const auto& [k, v] : entries)
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) unknown.push_back(k);
  if (!unknown.empty()) {
    std::string msg = "unknown config keys:";
    for (const auto& k : unknown) msg += " " + k;
    throw Error(msg);
  }
  ExperimentConfig c;
  for (const auto& k : keys)
    if (auto it = entries.find(k); it != entries.end()) apply(c, k, it->second);
  return c;
}

/// File entries, overridden by MCL_ environment variables.
inline ExperimentConfig parse_config(const std::string& path, char** env = environ) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open config " + path);
  Entries e = read_entries(is);
  for (const auto& [k, v] : environment_entries(env)) e[k] = v;
  return from_entries(e);
}

inline ExperimentConfig parse_config_text(const std::string& text) {
  std::istringstream is(text);
  return from_entries(read_entries(is));
}

inline std::string serialize(const ExperimentConfig& c) {
  const auto& s = c.sim;
  std::ostringstream os;
  os << "[grid]\nnx = " << s.grid.nx << "\nny = " << s.grid.ny << "\nnz = " << s.grid.nz << "\nm = " << s.grid.m
     << "\ndealias_fraction = " << fmt(s.grid.dealias_fraction) << "\n\n";
  os << "[params]\nnu = " << fmt(s.params.nu) << "\nalpha = " << fmt(s.params.alpha)
     << "\nsigma = " << fmt(s.params.sigma) << "\ndelta0 = " << (c.delta0 ? fmt(*c.delta0) : "auto") << "\n\n";
  os << "[run]\ndt = " << fmt(s.dt) << "\nt_final = " << (c.T_final ? fmt(*c.T_final) : "auto")
     << "\nepsilon = " << fmt(s.epsilon) << "\nseed = " << s.seed << "\nic = " << to_string(s.ic_kind)
     << "\nic_profile = " << to_string(s.ic_profile) << "\nic_width = " << fmt(s.ic_width)
     << "\nic_band = " << s.ic_band << "\nic_mode = [" << s.ic_mode.k << ", " << s.ic_mode.j << ", " << s.ic_mode.l
     << "]\nic_file = " << s.ic_file << "\nremap = " << to_string(s.remap_policy)
     << "\ndiagnostics_every = " << fmt(s.diagnostics_every) << "\nsobolev_n = " << fmt(s.sobolev_N)
     << "\nnonlinear = " << (s.nonlinear ? "true" : "false") << "\nstore_every = " << s.store_every << "\n\n";
  const auto& L = c.linear;
  os << "[linear]\nsystem = " << linear::to_string(L.system) << "\nk = " << L.k << "\neta = " << fmt(L.eta)
     << "\nl = " << L.l << "\nt = " << (L.T ? fmt(*L.T) : "auto") << "\nplus = " << fmt(L.plus)
     << "\nminus = " << fmt(L.minus) << "\nsamples = " << L.samples << "\nquantity = " << detail::to_string(L.quantity)
     << "\nm_eta = " << L.m_eta << "\n\n";
  const auto& M = c.multiplier;
  os << "[multiplier]\nk = " << M.k << "\neta = " << fmt(M.eta) << "\nl = " << M.l << "\nt_max = " << fmt(M.t_max)
     << "\nsamples = " << M.samples << "\nupsilon_kmax = " << M.upsilon_kmax << "\n";
  const auto& W = c.sweep;
  if (W.nu || W.alpha || W.epsilon || W.sigma) {
    os << "\n[sweep]\n";
    if (W.nu) os << "nu = " << fmt_list(*W.nu) << "\n";
    if (W.alpha) os << "alpha = " << fmt_list(*W.alpha) << "\n";
    if (W.epsilon) os << "epsilon = " << fmt_list(*W.epsilon) << "\n";
    if (W.sigma) os << "sigma = " << fmt_list(*W.sigma) << "\n";
  }
  return os.str();
}

inline std::string documented_defaults() {
  return "Config file: INI sections [grid] [params] [run] [linear] [multiplier] [sweep].\n"
         "Environment variables MCL_<SECTION>_<KEY> override file values.\n"
         "Defaults:\n" +
         serialize(ExperimentConfig{}) +
         "\n[sweep] keys nu, alpha, epsilon, sigma take lists like [1e-2, 1e-3];\n"
         "an absent axis keeps the base value, an empty list gives no runs.\n"
         "t_final = auto means 4 nu^(-1/3) rounded up to a multiple of dt;\n"
         "delta0 = auto means 1/(100 alpha); linear t = auto means 10 nu^(-1/3).\n";
}

// ---------------------------------------------------------------------------
// Resolution into runnable settings
// ---------------------------------------------------------------------------

/// SimConfig with the automatic values filled in.
inline SimConfig resolved_sim(const ExperimentConfig& c) {
  SimConfig s = c.sim;
  s.params.delta0 = c.delta0 ? *c.delta0 : PhysParams::default_delta0(s.params.alpha);
  if (c.T_final) {
    s.T_final = *c.T_final;
  } else {
    if (!(s.params.nu > 0.0)) throw Error("t_final = auto needs nu > 0");
    const double T = 4.0 / std::cbrt(s.params.nu);
    s.T_final = s.dt * std::ceil(T / s.dt - 1e-9);
  }
  return s;
}

inline double resolved_linear_T(const ExperimentConfig& c) {
  if (c.linear.T) return *c.linear.T;
  if (!(c.sim.params.nu > 0.0)) throw Error("linear t = auto needs nu > 0");
  return 10.0 / std::cbrt(c.sim.params.nu);
}

/// Field-strength check. Returns the warning text, empty if in range.
inline std::string field_strength_warning(const PhysParams& p) {
  if (p.in_theorem_regime()) return "";
  std::ostringstream os;
  os << "warning: alpha = " << fmt(p.alpha) << " with sigma = " << fmt(p.sigma) << " violates |alpha| > 8p > 0 (8p = "
     << 8 * p.sigma.p() << "); the stability theorem does not cover this run";
  return os.str();
}

}  // namespace mhdc::cfg
