#pragma once
// Experiment configuration: a flat "key = value" text format (with '#'
// comments), closed-form literals for profiles and micro functions, and a
// validator that reports every violated constraint by naming the inequality
// it checks. Parsing is strict: unknown keys, duplicate single-valued keys,
// and malformed literals are errors with line numbers.

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nfh/common.hpp"
#include "nfh/grid.hpp"
#include "nfh/io.hpp"
#include "nfh/micro.hpp"
#include "nfh/model.hpp"
#include "nfh/profiles.hpp"
#include "nfh/sigma.hpp"
#include "nfh/solver.hpp"

namespace nfh {

enum class RunMode { solve_hetero, solve_homog, sweep, verify, oracle };
enum class Integrator { picard, rk4, both };

inline const char* run_mode_name(RunMode m) {
  switch (m) {
    case RunMode::solve_hetero: return "solve-hetero";
    case RunMode::solve_homog: return "solve-homog";
    case RunMode::sweep: return "sweep";
    case RunMode::verify: return "verify";
    case RunMode::oracle: return "oracle";
  }
  return "?";
}

inline const char* integrator_name(Integrator i) {
  switch (i) {
    case Integrator::picard: return "picard";
    case Integrator::rk4: return "rk4";
    case Integrator::both: return "both";
  }
  return "?";
}

struct ExperimentConfig {
  RunMode mode = RunMode::sweep;
  int dim = 1;
  double half_width = 8.0;
  int macro_points = 8192;        // heterogeneous solve grid
  int limit_macro_points = 1024;  // two-scale (limit) macro grid
  int cell_points = 64;
  TimeGrid time{2.0, 1e-3, 100};
  Integrator integrator = Integrator::picard;
  PicardConfig picard{};
  std::vector<double> eps_schedule{0.25, 0.125, 1.0 / 16.0, 1.0 / 32.0};
  Profile initial;
  KernelSpec kernel;                    // sigma filled in by resolved_kernel()
  double kernel_mass_target = 0.9;
  FiringRate firing;
  FamilyParams psi;
  int threads = 0;                      // 0: one worker per scheduled eps
  std::string out_dir = "out";

  MacroGrid solve_grid() const { return MacroGrid{dim, half_width, macro_points}; }
  MacroGrid limit_grid() const { return MacroGrid{dim, half_width, limit_macro_points}; }
  CellGrid cell_grid() const { return CellGrid{dim, cell_points}; }

  // Kernel with sigma normalized so the worst-eps discrete mass equals the
  // configured target.
  KernelSpec resolved_kernel() const {
    KernelSpec k = kernel;
    k.sigma = normalized_sigma(k, solve_grid(), eps_schedule, kernel_mass_target);
    return k;
  }
};

// ---- defaults ---------------------------------------------------------------

// Desk-scale 1D default: box [-8, 8), finest eps = 1/32 resolved with 16
// solve-grid points per micro period, horizon 2 with 21 output slices.
inline ExperimentConfig default_config() {
  ExperimentConfig c;
  c.initial.kind = ProfileKind::costaper;
  c.initial.amplitude = 0.5;
  c.initial.radius = 1.5;

  KernelTerm term;
  term.macro.kind = ProfileKind::gaussian;
  term.macro.amplitude = 1.0;
  term.macro.width = 0.5;
  term.macro.radius = 3.0;
  term.micro = micro_one_plus_cos(0.5);
  c.kernel.terms.push_back(term);
  c.kernel_mass_target = 0.9;

  c.firing.kind = FiringKind::sigmoid;
  c.firing.beta = 2.0;
  c.firing.theta = 0.5;
  c.firing.g = micro_one_plus_cos(0.5);

  Profile taper;
  taper.kind = ProfileKind::costaper;
  taper.amplitude = 1.0;
  taper.radius = 2.5;
  Profile gauss;
  gauss.kind = ProfileKind::gaussian;
  gauss.amplitude = 1.0;
  gauss.width = 0.8;
  gauss.radius = 6.0;
  c.psi.profiles = {taper, gauss};
  c.psi.kmax = 2;
  c.psi.dim = 1;
  return c;
}

// ---- literal parsing --------------------------------------------------------

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline std::vector<std::string> whitespace_tokens(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> toks;
  std::string t;
  while (in >> t) toks.push_back(t);
  return toks;
}

// "3", "-1/4", "0.25", "1e-3"
inline double parse_number(const std::string& tok, const std::string& what) {
  const auto slash = tok.find('/');
  try {
    if (slash != std::string::npos) {
      const double num = std::stod(tok.substr(0, slash));
      const double den = std::stod(tok.substr(slash + 1));
      if (den == 0.0) throw std::invalid_argument(tok);
      return num / den;
    }
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(what + ": cannot parse number '" + tok + "'");
  }
}

inline Rational parse_rational(const std::string& tok, const std::string& what) {
  try {
    const auto slash = tok.find('/');
    const long long num = std::stoll(slash == std::string::npos ? tok : tok.substr(0, slash));
    const long long den = slash == std::string::npos ? 1 : std::stoll(tok.substr(slash + 1));
    return Rational(num, den);
  } catch (const std::exception&) {
    throw ConfigError(what + ": cannot parse rational frequency '" + tok + "'");
  }
}

inline std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  return parts;
}

struct LiteralArgs {
  std::string head;
  std::map<std::string, std::string> kv;
};

inline LiteralArgs parse_literal(const std::string& text, const std::string& what) {
  const auto toks = whitespace_tokens(text);
  if (toks.empty()) throw ConfigError(what + ": empty literal");
  LiteralArgs args;
  args.head = toks[0];
  for (std::size_t i = 1; i < toks.size(); ++i) {
    const auto eq = toks[i].find('=');
    if (eq == std::string::npos || eq == 0)
      throw ConfigError(what + ": expected key=value, got '" + toks[i] + "'");
    const std::string key = toks[i].substr(0, eq);
    if (args.kv.count(key)) throw ConfigError(what + ": duplicate argument '" + key + "'");
    args.kv[toks[i].substr(0, eq)] = toks[i].substr(eq + 1);
  }
  return args;
}

// gaussian amp=1 width=0.5 radius=3 [center=c or center=c1,c2]
// indicator amp=1 radius=1 | bump amp=1 radius=1 | costaper amp=1 radius=1
inline Profile parse_profile(const std::string& text, int dim, const std::string& what) {
  LiteralArgs args = parse_literal(text, what);
  Profile p;
  p.dim = dim;
  if (args.head == "gaussian") p.kind = ProfileKind::gaussian;
  else if (args.head == "indicator") p.kind = ProfileKind::indicator;
  else if (args.head == "bump") p.kind = ProfileKind::bump;
  else if (args.head == "costaper") p.kind = ProfileKind::costaper;
  else throw ConfigError(what + ": unknown profile kind '" + args.head + "'");
  for (const auto& [key, value] : args.kv) {
    if (key == "amp") p.amplitude = parse_number(value, what);
    else if (key == "width") p.width = parse_number(value, what);
    else if (key == "radius") p.radius = parse_number(value, what);
    else if (key == "center") {
      const auto parts = split_on(value, ',');
      if (parts.size() > 2 || static_cast<int>(parts.size()) > dim)
        throw ConfigError(what + ": center has more coordinates than the dimension");
      for (std::size_t a = 0; a < parts.size(); ++a) p.center[a] = parse_number(parts[a], what);
    } else {
      throw ConfigError(what + ": unknown profile argument '" + key + "'");
    }
  }
  p.validate();
  return p;
}

// const v=1
// one_plus_cos amp=0.5 k=1                       (1D)
// cos k=1[,k2] amp=1 phase=0                     (single cosine, rational k)
inline MicroFunction parse_micro(const std::string& text, int dim, const std::string& what) {
  LiteralArgs args = parse_literal(text, what);
  auto reject_extra = [&](std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : args.kv) {
      (void)value;
      if (std::find_if(allowed.begin(), allowed.end(),
                       [&](const char* a) { return key == a; }) == allowed.end())
        throw ConfigError(what + ": unknown micro argument '" + key + "'");
    }
  };
  if (args.head == "const") {
    reject_extra({"v"});
    const double v = args.kv.count("v") ? parse_number(args.kv.at("v"), what) : 1.0;
    return micro_const(v, dim);
  }
  if (args.head == "one_plus_cos") {
    reject_extra({"amp", "k"});
    if (dim != 1) throw ConfigError(what + ": one_plus_cos is a 1D literal");
    const double amp = args.kv.count("amp") ? parse_number(args.kv.at("amp"), what) : 0.5;
    const long long k = args.kv.count("k")
                            ? static_cast<long long>(parse_number(args.kv.at("k"), what))
                            : 1;
    return micro_one_plus_cos(amp, k);
  }
  if (args.head == "cos") {
    reject_extra({"amp", "k", "phase"});
    TrigTerm term;
    const auto parts = args.kv.count("k") ? split_on(args.kv.at("k"), ',')
                                          : std::vector<std::string>{"1"};
    if (static_cast<int>(parts.size()) != dim)
      throw ConfigError(what + ": frequency must have one entry per dimension");
    for (const auto& part : parts) term.freq.push_back(parse_rational(part, what));
    term.amplitude = args.kv.count("amp") ? parse_number(args.kv.at("amp"), what) : 1.0;
    term.phase = args.kv.count("phase") ? parse_number(args.kv.at("phase"), what) : 0.0;
    return micro_trig(dim, {term});
  }
  throw ConfigError(what + ": unknown micro kind '" + args.head + "'");
}

// "<profile literal> * <micro literal>"
inline KernelTerm parse_kernel_term(const std::string& text, int dim, const std::string& what) {
  const auto star = text.find('*');
  if (star == std::string::npos)
    throw ConfigError(what + ": kernel term needs the shape '<profile> * <micro>'");
  KernelTerm term;
  term.macro = parse_profile(trim(text.substr(0, star)), dim, what);
  term.micro = parse_micro(trim(text.substr(star + 1)), dim, what);
  return term;
}

}  // namespace detail

// ---- config text parsing ----------------------------------------------------

inline ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c = default_config();
  // keys that fully replace the default when present
  bool kernel_cleared = false;
  bool psi_cleared = false;
  std::map<std::string, int> seen;

  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string what = "config line " + std::to_string(lineno);
    std::string line = raw;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(what + ": expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) throw ConfigError(what + ": expected 'key = value'");

    const bool repeatable = (key == "kernel_term" || key == "psi_profile");
    if (!repeatable && seen.count(key))
      throw ConfigError(what + ": duplicate key '" + key + "' (first on line " +
                        std::to_string(seen[key]) + ")");
    seen[key] = lineno;

    if (key == "mode") {
      if (value == "solve-hetero") c.mode = RunMode::solve_hetero;
      else if (value == "solve-homog") c.mode = RunMode::solve_homog;
      else if (value == "sweep") c.mode = RunMode::sweep;
      else if (value == "verify") c.mode = RunMode::verify;
      else if (value == "oracle") c.mode = RunMode::oracle;
      else throw ConfigError(what + ": unknown mode '" + value + "'");
    } else if (key == "dim") {
      c.dim = static_cast<int>(detail::parse_number(value, what));
      c.psi.dim = c.dim;
    } else if (key == "half_width") {
      c.half_width = detail::parse_number(value, what);
    } else if (key == "macro_points") {
      c.macro_points = static_cast<int>(detail::parse_number(value, what));
    } else if (key == "limit_macro_points") {
      c.limit_macro_points = static_cast<int>(detail::parse_number(value, what));
    } else if (key == "cell_points") {
      c.cell_points = static_cast<int>(detail::parse_number(value, what));
    } else if (key == "horizon") {
      c.time.horizon = detail::parse_number(value, what);
    } else if (key == "step") {
      c.time.step = detail::parse_number(value, what);
    } else if (key == "output_stride") {
      c.time.stride = static_cast<long long> (detail::parse_number(value, what));
    } else if (key == "integrator") {
      if (value == "picard") c.integrator = Integrator::picard;
      else if (value == "rk4") c.integrator = Integrator::rk4;
      else if (value == "both") c.integrator = Integrator::both;
      else throw ConfigError(what + ": unknown integrator '" + value + "'");
    } else if (key == "picard_rho") {
      c.picard.rho = detail::parse_number(value, what);
    } else if (key == "picard_max_sweeps") {
      c.picard.max_sweeps = static_cast<int>(detail::parse_number(value, what));
    } else if (key == "picard_tol") {
      c.picard.tol = detail::parse_number(value, what);
    } else if (key == "eps_schedule") {
      c.eps_schedule.clear();
      for (const auto& tok : detail::whitespace_tokens(value))
        c.eps_schedule.push_back(detail::parse_number(tok, what));
    } else if (key == "initial") {
      c.initial = detail::parse_profile(value, c.dim, what);
    } else if (key == "kernel_term") {
      if (!kernel_cleared) {
        c.kernel.terms.clear();
        kernel_cleared = true;
      }
      c.kernel.terms.push_back(detail::parse_kernel_term(value, c.dim, what));
    } else if (key == "kernel_mass") {
      c.kernel_mass_target = detail::parse_number(value, what);
    } else if (key == "firing") {
      const auto args = detail::parse_literal(value, what);
      if (args.head == "sigmoid") c.firing.kind = FiringKind::sigmoid;
      else if (args.head == "linear") c.firing.kind = FiringKind::linear;
      else throw ConfigError(what + ": unknown firing kind '" + args.head + "'");
      for (const auto& [k, v] : args.kv) {
        if (k == "beta") c.firing.beta = detail::parse_number(v, what);
        else if (k == "theta") c.firing.theta = detail::parse_number(v, what);
        else throw ConfigError(what + ": unknown firing argument '" + k + "'");
      }
    } else if (key == "gain") {
      c.firing.g = detail::parse_micro(value, c.dim, what);
    } else if (key == "psi_profile") {
      if (!psi_cleared) {
        c.psi.profiles.clear();
        psi_cleared = true;
      }
      c.psi.profiles.push_back(detail::parse_profile(value, c.dim, what));
    } else if (key == "psi_kmax") {
      c.psi.kmax = static_cast<int>(detail::parse_number(value, what));
    } else if (key == "threads") {
      c.threads = static_cast<int>(detail::parse_number(value, what));
    } else if (key == "out_dir") {
      c.out_dir = value;
    } else {
      throw ConfigError(what + ": unknown key '" + key + "'");
    }
  }
  c.psi.dim = c.dim;
  return c;
}

// ---- validation -------------------------------------------------------------

namespace detail {

inline bool has_microstructure(const ExperimentConfig& c) {
  auto varies = [](const MicroFunction& w) {
    if (const auto* t = std::get_if<TrigPoly>(&w.fn)) {
      for (const auto& term : t->terms) {
        const bool zero_freq = std::all_of(term.freq.begin(), term.freq.end(),
                                           [](const Rational& r) { return r.num == 0; });
        if (!zero_freq && term.amplitude != 0.0) return true;
      }
      return false;
    }
    return true;  // sampled / vanishing kinds count as structure
  };
  for (const auto& term : c.kernel.terms)
    if (varies(term.micro)) return true;
  return varies(c.firing.g);
}

}  // namespace detail

// Every violated constraint, one human-readable line each, naming the
// inequality that failed. Empty means the config is runnable.
inline std::vector<std::string> validate(const ExperimentConfig& c) {
  std::vector<std::string> bad;
  auto check = [&](bool ok, const std::string& msg) {
    if (!ok) bad.push_back(msg);
  };

  check(c.dim == 1 || c.dim == 2, "dim must be 1 or 2");
  check(c.half_width > 0.0, "half_width must satisfy L > 0");
  check(is_power_of_two(c.macro_points) && c.macro_points >= 2,
        "macro_points must be a power of two >= 2");
  check(is_power_of_two(c.limit_macro_points) && c.limit_macro_points >= 2,
        "limit_macro_points must be a power of two >= 2");
  check(is_power_of_two(c.cell_points) && c.cell_points >= 2,
        "cell_points must be a power of two >= 2");
  if (is_power_of_two(c.macro_points) && is_power_of_two(c.limit_macro_points))
    check(c.macro_points % c.limit_macro_points == 0,
          "limit grid must subdivide the solve grid: macro_points % limit_macro_points == 0");

  try {
    c.time.validate();
  } catch (const std::exception& e) {
    bad.emplace_back(e.what());
  }

  if (c.eps_schedule.empty()) {
    bad.emplace_back("eps_schedule must not be empty");
  } else {
    for (std::size_t k = 1; k < c.eps_schedule.size(); ++k)
      if (!(c.eps_schedule[k] < c.eps_schedule[k - 1])) {
        bad.emplace_back("eps_schedule must be strictly decreasing");
        break;
      }
    for (double eps : c.eps_schedule) {
      if (!(eps > 0.0) || !is_commensurate(c.solve_grid(), eps) ||
          !is_commensurate(c.limit_grid(), eps)) {
        bad.push_back("eps = " + format_double(eps) +
                      " violates commensurability: 2L/eps must be a positive integer");
      }
    }
    // resolution rule, only binding when some micro factor actually varies
    if (detail::has_microstructure(c)) {
      const double h = c.solve_grid().spacing();
      const double finest = c.eps_schedule.back();
      check(finest / h >= 8.0 - 1e-9,
            "finest eps must keep >= 8 solve-grid points per micro period: eps/h >= 8");
    }
  }

  try {
    c.initial.validate();
  } catch (const std::exception& e) {
    bad.emplace_back(std::string("initial: ") + e.what());
  }

  // domain margin: the heterogeneity-driven deviation from the far-field
  // state spreads at most (kernel support radius) per unit time
  const double r0 = c.initial.support_radius();
  const double rj = c.kernel.support_radius();
  check(c.half_width >= r0 + c.time.horizon * rj + 0.5,
        "domain margin violated: need L >= (initial radius " + format_double(r0) +
            ") + T*(kernel radius " + format_double(rj) + ") + 0.5");

  check(c.kernel_mass_target > 0.0 && c.kernel_mass_target <= 1.0,
        "kernel_mass must satisfy 0 < mass <= 1");
  if (!c.eps_schedule.empty()) {
    try {
      validate_kernel(c.resolved_kernel(), c.solve_grid(), c.eps_schedule);
    } catch (const std::exception& e) {
      bad.emplace_back(std::string("kernel: ") + e.what());
    }
  }

  double k1 = 0.0;
  try {
    c.firing.validate();
    k1 = c.firing.k1();
  } catch (const std::exception& e) {
    bad.emplace_back(std::string("firing: ") + e.what());
  }

  if (k1 > 0.0 && c.integrator != Integrator::rk4) {
    try {
      c.picard.validate(k1);
    } catch (const std::exception& e) {
      bad.emplace_back(e.what());
    }
  }

  check(c.psi.kmax >= 0, "psi_kmax must satisfy kmax >= 0");
  for (const auto& prof : c.psi.profiles) {
    TestFunction tf{prof, micro_const(1.0, c.dim), {}};
    try {
      tf.validate(c.limit_grid());
    } catch (const std::exception& e) {
      bad.emplace_back(std::string("psi_profile: ") + e.what());
    }
  }
  if (c.mode == RunMode::sweep)
    check(!c.psi.profiles.empty(), "sweep mode needs at least one psi_profile");

  if (c.mode == RunMode::sweep || c.mode == RunMode::solve_homog) {
    bool periodic = true;
    for (const auto& term : c.kernel.terms) periodic = periodic && is_one_periodic(term.micro);
    periodic = periodic && is_one_periodic(c.firing.g);
    check(periodic, "homogenized runs require 1-periodic micro factors");
  }

  check(c.threads >= 0, "threads must satisfy threads >= 0");
  check(!c.out_dir.empty(), "out_dir must not be empty");
  return bad;
}

}  // namespace nfh
