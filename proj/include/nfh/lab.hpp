// Experiment orchestration: the scheduled heterogeneous solves, the
// homogenized reference solve, the convergence diagnostics tying them
// together, and the on-disk report tree. Also hosts the self-check batteries
// behind the verify and oracle run modes.
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <functional>
#include <limits>
#include <mutex>
#include <ostream>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "nfh/common.hpp"
#include "nfh/config.hpp"
#include "nfh/convolve.hpp"
#include "nfh/grid.hpp"
#include "nfh/io.hpp"
#include "nfh/micro.hpp"
#include "nfh/model.hpp"
#include "nfh/oracles.hpp"
#include "nfh/profiles.hpp"
#include "nfh/sigma.hpp"
#include "nfh/solver.hpp"

namespace nfh {

// ---- worker pool ------------------------------------------------------------

namespace detail {

// Number of workers for `jobs` independent tasks. The configured count is the
// baseline; the NFH_THREADS environment variable overrides it; 0 means one
// worker per job.
inline int resolve_threads(int configured, int jobs) {
  int t = configured;
  if (const char* env = std::getenv("NFH_THREADS")) {
    const std::string s(env);
    std::size_t used = 0;
    int v = -1;
    try {
      v = std::stoi(s, &used);
    } catch (...) {
      used = 0;
    }
    if (used != s.size() || v < 0)
      throw ConfigError("NFH_THREADS must be a nonnegative integer, got '" + s + "'");
    t = v;
  }
  if (t <= 0) t = jobs;
  return std::clamp(t, 1, std::max(1, jobs));
}

// Runs fn(0), ..., fn(jobs - 1) on a fixed-size pool. Every job executes even
// if an earlier one failed; the first exception is rethrown on the calling
// thread once the pool drains.
template <class Fn>
void parallel_jobs(int jobs, int workers, Fn&& fn) {
  if (jobs <= 0) return;
  if (workers <= 1) {
    for (int i = 0; i < jobs; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  auto drain = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= jobs) return;
      try {
        fn(i);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(drain);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

inline std::vector<double> random_values(std::mt19937_64& rng, std::size_t n, double lo = -1.0,
                                         double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = dist(rng);
  return v;
}

}  // namespace detail

// ---- restriction between nested grids ---------------------------------------

// Subsamples a field down to a coarser grid over the same box whose nodes are
// an exact subset of the fine nodes (point counts divide evenly), so no
// interpolation error enters.
inline MacroField restrict_to(const MacroField& fine, const MacroGrid& coarse) {
  const MacroGrid& fg = fine.grid;
  if (fg.dim != coarse.dim || fg.half_width != coarse.half_width)
    throw std::invalid_argument("restriction: grids must share dimension and box");
  if (coarse.points < 1 || fg.points % coarse.points != 0)
    throw std::invalid_argument("restriction: coarse point count must divide the fine one");
  const long long r = fg.points / coarse.points;
  MacroField out = MacroField::zeros(coarse);
  if (fg.dim == 1) {
    for (long long i = 0; i < coarse.points; ++i)
      out.values[static_cast<std::size_t>(i)] = fine.values[static_cast<std::size_t>(i * r)];
  } else {
    for (long long i = 0; i < coarse.points; ++i)
      for (long long j = 0; j < coarse.points; ++j)
        out.values[static_cast<std::size_t>(i * coarse.points + j)] =
            fine.values[static_cast<std::size_t>(i * r * fg.points + j * r)];
  }
  return out;
}

// Largest over recorded times of the L2 distance between two trajectories.
inline double sup_l2_gap(const Trajectory& a, const Trajectory& b, double node_measure) {
  if (a.states.size() != b.states.size())
    throw std::invalid_argument("trajectory gap: slice counts differ");
  double worst = 0.0;
  std::vector<double> diff;
  for (std::size_t k = 0; k < a.states.size(); ++k) {
    if (a.states[k].size() != b.states[k].size())
      throw std::invalid_argument("trajectory gap: slice shapes differ");
    diff.resize(a.states[k].size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = a.states[k][i] - b.states[k][i];
    worst = std::max(worst, detail::lp_of(diff, 2.0, node_measure));
  }
  return worst;
}

// ---- sweep ------------------------------------------------------------------

// One scheduled scale: solve report, a priori monitor, the recorded
// trajectory on the solve grid, and (under integrator = both) the sup-L2 gap
// between the two integrators.
struct EpsSolve {
  double eps = 0.0;
  SolveReport report;
  AprioriReport apriori;
  double integrator_gap = 0.0;
  Trajectory trajectory;
};

struct SweepResult {
  std::vector<EpsSolve> hetero;  // one per scheduled eps, schedule order
  SolveReport homog_report;
  double homog_integrator_gap = 0.0;
  Trajectory homog_trajectory;  // two-scale slices on the limit grids

  std::vector<TestFunction> family;      // the configured test family
  std::vector<PairingReport> pairings;   // one per family member, space-time
  std::vector<double> corrector_weak;    // per eps: max over slices and family
  std::vector<double> corrector_l2;      // per eps: max over slices
  double norm_spread = 0.0;              // (max - min) / max of sup_t (L1 + L2) across eps

  bool pairings_pass() const {
    for (const auto& p : pairings)
      if (!p.pass) return false;
    return !pairings.empty();
  }
  bool apriori_pass() const {
    for (const auto& h : hetero)
      if (!h.apriori.ok) return false;
    return !hetero.empty();
  }
  double max_corrector_weak() const {
    double m = 0.0;
    for (double v : corrector_weak) m = std::max(m, v);
    return m;
  }
  double max_corrector_l2() const {
    double m = 0.0;
    for (double v : corrector_l2) m = std::max(m, v);
    return m;
  }
  double max_integrator_gap() const {
    double m = homog_integrator_gap;
    for (const auto& h : hetero) m = std::max(m, h.integrator_gap);
    return m;
  }
  double max_final_pairing_error() const {
    double m = 0.0;
    for (const auto& p : pairings)
      if (!p.abs_error.empty()) m = std::max(m, p.abs_error.back());
    return m;
  }
};

namespace detail {

inline void throw_if_invalid(const ExperimentConfig& cfg) {
  const std::vector<std::string> bad = validate(cfg);
  if (bad.empty()) return;
  std::string msg = "invalid configuration:";
  for (const std::string& b : bad) msg += "\n  - " + b;
  throw ConfigError(msg);
}

}  // namespace detail

// Full homogenization study: one heterogeneous solve per scheduled scale plus
// the homogenized reference solve (run as one extra job in the same pool),
// then single-threaded diagnostics in schedule order.
inline SweepResult run_sweep(const ExperimentConfig& cfg, std::ostream* log = nullptr) {
  detail::throw_if_invalid(cfg);
  const MacroGrid sg = cfg.solve_grid();
  const MacroGrid lg = cfg.limit_grid();
  const CellGrid cg = cfg.cell_grid();
  const KernelSpec J = cfg.resolved_kernel();
  const FiringRate& f = cfg.firing;
  const MacroField init = sample_macro(sg, cfg.initial);
  const MacroField init0 = sample_macro(lg, cfg.initial);
  const int n = static_cast<int>(cfg.eps_schedule.size());

  SweepResult res;
  res.hetero.resize(static_cast<std::size_t>(n));
  const int jobs = n + 1;  // last job: homogenized reference solve
  const int workers = detail::resolve_threads(cfg.threads, jobs);
  std::mutex log_mutex;
  if (log)
    *log << "sweep: " << n << " scales + limit solve on " << workers << " worker(s)\n";

  detail::parallel_jobs(jobs, workers, [&](int j) {
    if (j < n) {
      const double e = cfg.eps_schedule[static_cast<std::size_t>(j)];
      try {
        SolveResult sr = cfg.integrator == Integrator::rk4
                             ? rk4_solve(J, f, e, init, cfg.time)
                             : picard_solve(J, f, e, init, cfg.time, cfg.picard);
        double gap = 0.0;
        if (cfg.integrator == Integrator::both) {
          const SolveResult alt = rk4_solve(J, f, e, init, cfg.time);
          gap = sup_l2_gap(sr.trajectory, alt.trajectory, sg.cell_measure());
        }
        EpsSolve& slot = res.hetero[static_cast<std::size_t>(j)];
        slot.eps = e;
        slot.apriori = apriori_monitor(sr.trajectory, sg.cell_measure(), f.k1(), c1_norm(f, e, sg));
        slot.integrator_gap = gap;
        slot.report = std::move(sr.report);
        slot.trajectory = std::move(sr.trajectory);
        if (log) {
          const std::lock_guard<std::mutex> lock(log_mutex);
          *log << "  scale eps = " << format_double(e) << " done ("
               << slot.report.wall_seconds << " s)\n";
        }
      } catch (const std::exception& ex) {
        throw std::runtime_error("solve at eps = " + format_double(e) + ": " + ex.what());
      }
    } else {
      try {
        SolveResult sr = cfg.integrator == Integrator::rk4
                             ? homog_solve_rk4(J, f, init0, cfg.time, cg)
                             : homog_solve(J, f, init0, cfg.time, cfg.picard, cg);
        if (cfg.integrator == Integrator::both) {
          const SolveResult alt = homog_solve_rk4(J, f, init0, cfg.time, cg);
          res.homog_integrator_gap =
              sup_l2_gap(sr.trajectory, alt.trajectory, lg.cell_measure() * cg.cell_measure());
        }
        res.homog_report = std::move(sr.report);
        res.homog_trajectory = std::move(sr.trajectory);
        if (log) {
          const std::lock_guard<std::mutex> lock(log_mutex);
          *log << "  limit solve done (" << res.homog_report.wall_seconds << " s)\n";
        }
      } catch (const std::exception& ex) {
        throw std::runtime_error(std::string("homogenized solve: ") + ex.what());
      }
    }
  });

  // Space-time pairings of every scale against every family member, compared
  // with the two-scale pairing of the limit trajectory.
  res.family = test_family(cfg.psi);
  for (const TestFunction& psi : res.family) {
    const double limit = spacetime_limit_pairing(lg, cg, res.homog_trajectory, psi);
    std::vector<double> vals(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      vals[static_cast<std::size_t>(i)] = spacetime_pairing(
          sg, res.hetero[static_cast<std::size_t>(i)].trajectory, psi,
          res.hetero[static_cast<std::size_t>(i)].eps);
    res.pairings.push_back(detail::finish_report(cfg.eps_schedule, std::move(vals), limit, true));
  }

  // Corrector-trace comparison: restrict each fine slice to the limit macro
  // grid (exact node subsampling) and measure the residual against the
  // oscillating trace of the limit slice, in L2 and weakly against the family.
  const std::size_t slices = res.homog_trajectory.states.size();
  res.corrector_weak.assign(static_cast<std::size_t>(n), 0.0);
  res.corrector_l2.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    const EpsSolve& hs = res.hetero[static_cast<std::size_t>(i)];
    if (hs.trajectory.states.size() != slices)
      throw std::runtime_error("sweep: recorded slice counts disagree across solves");
    for (std::size_t k = 0; k < slices; ++k) {
      const MacroField coarse = restrict_to(state_field(sg, hs.trajectory, k), lg);
      const MacroField trace =
          corrector_trace(state_field(lg, cg, res.homog_trajectory, k), hs.eps);
      MacroField diff = coarse;
      for (std::size_t m = 0; m < diff.values.size(); ++m) diff.values[m] -= trace.values[m];
      res.corrector_l2[static_cast<std::size_t>(i)] =
          std::max(res.corrector_l2[static_cast<std::size_t>(i)], l2_norm(diff));
      for (const TestFunction& psi : res.family)
        res.corrector_weak[static_cast<std::size_t>(i)] =
            std::max(res.corrector_weak[static_cast<std::size_t>(i)],
                     std::fabs(weak_sigma_pairing(diff, psi, hs.eps)));
    }
  }

  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (const EpsSolve& h : res.hetero) {
    lo = std::min(lo, h.apriori.sup_l1_plus_l2);
    hi = std::max(hi, h.apriori.sup_l1_plus_l2);
  }
  res.norm_spread = hi > 0.0 ? (hi - lo) / hi : 0.0;
  return res;
}

// ---- artifact emission ------------------------------------------------------

inline std::string profile_label(const Profile& p) {
  std::string s(profile_kind_name(p.kind));
  s += " amplitude=" + format_double(p.amplitude);
  if (p.kind == ProfileKind::gaussian) s += " width=" + format_double(p.width);
  s += " radius=" + format_double(p.radius);
  bool shifted = false;
  for (int a = 0; a < p.dim; ++a) shifted = shifted || p.center[static_cast<std::size_t>(a)] != 0.0;
  if (shifted) {
    s += " center=" + format_double(p.center[0]);
    if (p.dim == 2) s += "," + format_double(p.center[1]);
  }
  return s;
}

// Human-readable descriptions of the members produced by test_family, in the
// same order.
inline std::vector<std::string> family_labels(const FamilyParams& fp) {
  std::vector<std::string> micros;
  micros.push_back("1");
  if (fp.dim == 1) {
    for (long long k = 1; k <= fp.kmax; ++k) {
      micros.push_back("cos(2 pi " + std::to_string(k) + " y)");
      micros.push_back("sin(2 pi " + std::to_string(k) + " y)");
    }
  } else {
    for (long long k0 = -fp.kmax; k0 <= fp.kmax; ++k0)
      for (long long k1 = -fp.kmax; k1 <= fp.kmax; ++k1) {
        if (k0 < 0 || (k0 == 0 && k1 <= 0)) continue;
        const std::string vec = "(" + std::to_string(k0) + "," + std::to_string(k1) + ")";
        micros.push_back("cos(2 pi " + vec + ".y)");
        micros.push_back("sin(2 pi " + vec + ".y)");
      }
  }
  std::vector<std::string> labels;
  for (const Profile& p : fp.profiles)
    for (const std::string& m : micros) labels.push_back(profile_label(p) + "  x  " + m);
  return labels;
}

namespace detail {

inline std::vector<std::vector<double>> norm_rows(const SolveReport& rep) {
  std::vector<std::vector<double>> rows;
  rows.reserve(rep.times.size());
  for (std::size_t k = 0; k < rep.times.size(); ++k)
    rows.push_back({rep.times[k], rep.l1[k], rep.l2[k]});
  return rows;
}

inline std::string joined_eps(std::span<const double> eps) {
  std::string s;
  for (std::size_t i = 0; i < eps.size(); ++i) s += (i ? " " : "") + format_double(eps[i]);
  return s;
}

}  // namespace detail

// Writes the sweep report tree under cfg.out_dir: final states, per-scale
// norm histories, one pairing table per family member, the corrector-error
// table, the family legend, and the run summary. Every file is re-loadable
// through the io module and bit-stable across reruns.
inline void write_sweep_artifacts(const ExperimentConfig& cfg, const SweepResult& res) {
  namespace fs = std::filesystem;
  const fs::path out(cfg.out_dir);
  const MacroGrid sg = cfg.solve_grid();
  const MacroGrid lg = cfg.limit_grid();
  const CellGrid cg = cfg.cell_grid();

  for (std::size_t i = 0; i < res.hetero.size(); ++i) {
    const EpsSolve& h = res.hetero[i];
    const std::string tag = "hetero_" + std::to_string(i);
    write_field(out / (tag + "_final.nfh"),
                state_field(sg, h.trajectory, h.trajectory.states.size() - 1));
    write_table_csv(out / (tag + "_norms.csv"), {"t", "l1", "l2"}, detail::norm_rows(h.report));
  }
  write_field(out / "homog_final.nfh",
              state_field(lg, cg, res.homog_trajectory, res.homog_trajectory.states.size() - 1));
  write_table_csv(out / "homog_norms.csv", {"t", "l1", "l2"},
                  detail::norm_rows(res.homog_report));

  for (std::size_t j = 0; j < res.pairings.size(); ++j)
    write_pairing_csv(out / ("pairing_psi" + std::to_string(j) + ".csv"), res.pairings[j]);

  const std::vector<std::string> labels = family_labels(cfg.psi);
  std::vector<std::pair<std::string, std::string>> legend;
  for (std::size_t j = 0; j < labels.size(); ++j)
    legend.emplace_back("psi" + std::to_string(j), labels[j]);
  write_summary(out / "family.txt", legend);

  std::vector<std::vector<double>> corr;
  for (std::size_t i = 0; i < res.hetero.size(); ++i)
    corr.push_back({res.hetero[i].eps, res.corrector_weak[i], res.corrector_l2[i]});
  write_table_csv(out / "corrector.csv", {"eps", "weak_error", "l2_error"}, corr);

  std::vector<std::pair<std::string, std::string>> kv;
  kv.emplace_back("mode", run_mode_name(cfg.mode));
  kv.emplace_back("dim", std::to_string(cfg.dim));
  kv.emplace_back("half_width", format_double(cfg.half_width));
  kv.emplace_back("solve_points", std::to_string(cfg.macro_points));
  kv.emplace_back("limit_points", std::to_string(cfg.limit_macro_points));
  kv.emplace_back("cell_points", std::to_string(cfg.cell_points));
  kv.emplace_back("horizon", format_double(cfg.time.horizon));
  kv.emplace_back("step", format_double(cfg.time.step));
  kv.emplace_back("stride", std::to_string(cfg.time.stride));
  kv.emplace_back("integrator", integrator_name(cfg.integrator));
  kv.emplace_back("sigma", format_double(cfg.resolved_kernel().sigma));
  kv.emplace_back("eps_schedule", detail::joined_eps(cfg.eps_schedule));
  kv.emplace_back("family_size", std::to_string(res.family.size()));
  kv.emplace_back("pairings_pass", res.pairings_pass() ? "1" : "0");
  kv.emplace_back("pairing_max_final_error", format_double(res.max_final_pairing_error()));
  kv.emplace_back("corrector_weak_max", format_double(res.max_corrector_weak()));
  kv.emplace_back("corrector_l2_max", format_double(res.max_corrector_l2()));
  kv.emplace_back("apriori_pass", res.apriori_pass() ? "1" : "0");
  kv.emplace_back("norm_spread", format_double(res.norm_spread));
  if (cfg.integrator == Integrator::both)
    kv.emplace_back("integrator_gap_max", format_double(res.max_integrator_gap()));
  write_summary(out / "summary.txt", kv);
}

// ---- single-solve modes -----------------------------------------------------

// Heterogeneous solves at every scheduled scale; dumps every recorded slice.
inline void run_solve_hetero(const ExperimentConfig& cfg, std::ostream& log) {
  namespace fs = std::filesystem;
  const MacroGrid sg = cfg.solve_grid();
  const KernelSpec J = cfg.resolved_kernel();
  const MacroField init = sample_macro(sg, cfg.initial);
  const int n = static_cast<int>(cfg.eps_schedule.size());
  std::vector<SolveResult> primary(static_cast<std::size_t>(n));
  std::vector<double> gaps(static_cast<std::size_t>(n), 0.0);
  const int workers = detail::resolve_threads(cfg.threads, n);
  log << "solve-hetero: " << n << " scale(s) on " << workers << " worker(s)\n";

  detail::parallel_jobs(n, workers, [&](int i) {
    const double e = cfg.eps_schedule[static_cast<std::size_t>(i)];
    try {
      primary[static_cast<std::size_t>(i)] =
          cfg.integrator == Integrator::rk4 ? rk4_solve(J, cfg.firing, e, init, cfg.time)
                                            : picard_solve(J, cfg.firing, e, init, cfg.time,
                                                           cfg.picard);
      if (cfg.integrator == Integrator::both) {
        const SolveResult alt = rk4_solve(J, cfg.firing, e, init, cfg.time);
        gaps[static_cast<std::size_t>(i)] = sup_l2_gap(
            primary[static_cast<std::size_t>(i)].trajectory, alt.trajectory, sg.cell_measure());
      }
    } catch (const std::exception& ex) {
      throw std::runtime_error("solve at eps = " + format_double(e) + ": " + ex.what());
    }
  });

  const fs::path out(cfg.out_dir);
  std::vector<std::pair<std::string, std::string>> kv;
  kv.emplace_back("mode", run_mode_name(cfg.mode));
  kv.emplace_back("integrator", integrator_name(cfg.integrator));
  kv.emplace_back("sigma", format_double(J.sigma));
  kv.emplace_back("eps_schedule", detail::joined_eps(cfg.eps_schedule));
  for (int i = 0; i < n; ++i) {
    const SolveResult& sr = primary[static_cast<std::size_t>(i)];
    const double e = cfg.eps_schedule[static_cast<std::size_t>(i)];
    const fs::path dir = out / ("eps_" + std::to_string(i));
    for (std::size_t k = 0; k < sr.trajectory.states.size(); ++k)
      write_field(dir / ("state_" + std::to_string(k) + ".nfh"),
                  state_field(sg, sr.trajectory, k));
    write_table_csv(dir / "norms.csv", {"t", "l1", "l2"}, detail::norm_rows(sr.report));
    const AprioriReport mon =
        apriori_monitor(sr.trajectory, sg.cell_measure(), cfg.firing.k1(), c1_norm(cfg.firing, e, sg));
    const std::string tag = "eps_" + std::to_string(i);
    kv.emplace_back(tag, format_double(e));
    kv.emplace_back(tag + "_sup_l1_plus_l2", format_double(mon.sup_l1_plus_l2));
    kv.emplace_back(tag + "_apriori_ok", mon.ok ? "1" : "0");
    if (cfg.integrator != Integrator::rk4)
      kv.emplace_back(tag + "_max_contraction_ratio",
                      format_double(sr.report.max_contraction_ratio()));
    if (cfg.integrator == Integrator::both)
      kv.emplace_back(tag + "_integrator_gap", format_double(gaps[static_cast<std::size_t>(i)]));
    log << "  eps = " << format_double(e) << ": " << sr.trajectory.states.size()
        << " slices dumped, sup(L1+L2) = " << format_double(mon.sup_l1_plus_l2) << "\n";
  }
  write_summary(out / "summary.txt", kv);
}

// Homogenized solve on the limit grids; dumps every recorded two-scale slice.
inline void run_solve_homog(const ExperimentConfig& cfg, std::ostream& log) {
  namespace fs = std::filesystem;
  const MacroGrid lg = cfg.limit_grid();
  const CellGrid cg = cfg.cell_grid();
  const KernelSpec J = cfg.resolved_kernel();
  const MacroField init0 = sample_macro(lg, cfg.initial);
  log << "solve-homog: limit grids " << cfg.limit_macro_points << " x " << cfg.cell_points
      << "\n";
  SolveResult sr = cfg.integrator == Integrator::rk4
                       ? homog_solve_rk4(J, cfg.firing, init0, cfg.time, cg)
                       : homog_solve(J, cfg.firing, init0, cfg.time, cfg.picard, cg);
  double gap = 0.0;
  if (cfg.integrator == Integrator::both) {
    const SolveResult alt = homog_solve_rk4(J, cfg.firing, init0, cfg.time, cg);
    gap = sup_l2_gap(sr.trajectory, alt.trajectory, lg.cell_measure() * cg.cell_measure());
  }

  const fs::path out(cfg.out_dir);
  for (std::size_t k = 0; k < sr.trajectory.states.size(); ++k)
    write_field(out / ("state_" + std::to_string(k) + ".nfh"),
                state_field(lg, cg, sr.trajectory, k));
  write_table_csv(out / "norms.csv", {"t", "l1", "l2"}, detail::norm_rows(sr.report));
  std::vector<std::pair<std::string, std::string>> kv;
  kv.emplace_back("mode", run_mode_name(cfg.mode));
  kv.emplace_back("integrator", integrator_name(cfg.integrator));
  kv.emplace_back("sigma", format_double(J.sigma));
  kv.emplace_back("slices", std::to_string(sr.trajectory.states.size()));
  if (cfg.integrator != Integrator::rk4)
    kv.emplace_back("max_contraction_ratio", format_double(sr.report.max_contraction_ratio()));
  if (cfg.integrator == Integrator::both)
    kv.emplace_back("integrator_gap", format_double(gap));
  write_summary(out / "summary.txt", kv);
  log << "  " << sr.trajectory.states.size() << " two-scale slices dumped\n";
}

// ---- check batteries --------------------------------------------------------

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

namespace detail {

inline CheckResult guarded(const std::string& name, const std::function<CheckResult()>& body) {
  try {
    return body();
  } catch (const std::exception& ex) {
    return CheckResult{name, false, std::string("exception: ") + ex.what()};
  }
}

}  // namespace detail

// FFT convolution against the quadratic-cost direct sum on random fields.
inline CheckResult check_conv_oracle(int n1d, int n2d, std::uint64_t seed) {
  const std::string name = "conv-fft-vs-direct";
  return detail::guarded(name, [=] {
    std::mt19937_64 rng(seed);
    double worst1 = 0.0;
    const MacroGrid g1{1, 4.0, 64};
    for (int t = 0; t < n1d; ++t) {
      const MacroField u{g1, detail::random_values(rng, g1.size())};
      const MacroField v{g1, detail::random_values(rng, g1.size())};
      const MacroField a = conv_macro(u, v);
      const MacroField b = conv_direct(u, v);
      double sup = 0.0;
      double gap = 0.0;
      for (std::size_t i = 0; i < a.values.size(); ++i) {
        sup = std::max(sup, std::fabs(b.values[i]));
        gap = std::max(gap, std::fabs(a.values[i] - b.values[i]));
      }
      worst1 = std::max(worst1, gap / std::max(1.0, sup));
    }
    double worst2 = 0.0;
    const MacroGrid g2{2, 4.0, 32};
    for (int t = 0; t < n2d; ++t) {
      const MacroField u{g2, detail::random_values(rng, g2.size())};
      const MacroField v{g2, detail::random_values(rng, g2.size())};
      const MacroField a = conv_macro(u, v);
      const MacroField b = conv_direct(u, v);
      double sup = 0.0;
      double gap = 0.0;
      for (std::size_t i = 0; i < a.values.size(); ++i) {
        sup = std::max(sup, std::fabs(b.values[i]));
        gap = std::max(gap, std::fabs(a.values[i] - b.values[i]));
      }
      worst2 = std::max(worst2, gap / std::max(1.0, sup));
    }
    const bool pass = worst1 <= 1e-12 && worst2 <= 1e-12;
    return CheckResult{name, pass,
                       "rel error <= 1e-12: 1D worst " + format_double(worst1) + " (" +
                           std::to_string(n1d) + " fields), 2D worst " + format_double(worst2) +
                           " (" + std::to_string(n2d) + " fields)"};
  });
}

// Two-scale double convolution of separable inputs against the product of the
// macro convolution and the direct circular cell convolution.
inline CheckResult check_conv_separability(std::uint64_t seed) {
  const std::string name = "conv-separability";
  return detail::guarded(name, [=] {
    std::mt19937_64 rng(seed);
    const MacroGrid g{1, 8.0, 64};
    const CellGrid c{1, 16};
    double worst = 0.0;
    for (int t = 0; t < 5; ++t) {
      const std::vector<double> a = detail::random_values(rng, g.size());
      const std::vector<double> b = detail::random_values(rng, g.size());
      const std::vector<double> p = detail::random_values(rng, c.size());
      const std::vector<double> q = detail::random_values(rng, c.size());
      TwoScaleField u = TwoScaleField::zeros(g, c);
      TwoScaleField v = TwoScaleField::zeros(g, c);
      for (std::size_t i = 0; i < g.size(); ++i)
        for (std::size_t j = 0; j < c.size(); ++j) {
          u.values[i * c.size() + j] = a[i] * p[j];
          v.values[i * c.size() + j] = b[i] * q[j];
        }
      const MacroField ab = conv_macro(MacroField{g, a}, MacroField{g, b});
      const long long my = c.points;
      std::vector<double> pq(c.size(), 0.0);
      for (long long j = 0; j < my; ++j)
        pq[static_cast<std::size_t>(j)] =
            c.cell_measure() * pairwise_map_sum(c.size(), [&](std::size_t l) {
              const long long ll = static_cast<long long>(l);
              return p[l] * q[static_cast<std::size_t>(((j - ll) % my + my) % my)];
            });
      const TwoScaleField joint = double_conv(u, v);
      for (std::size_t i = 0; i < g.size(); ++i)
        for (std::size_t j = 0; j < c.size(); ++j)
          worst = std::max(worst,
                           std::fabs(joint.values[i * c.size() + j] - ab.values[i] * pq[j]));
    }
    return CheckResult{name, worst <= 1e-11,
                       "separable factorization gap " + format_double(worst) + " <= 1e-11"};
  });
}

// Cell-average facts: the unit function averages to 1 exactly, averages are
// translation invariant, and large-ball averages of the configured micro
// factors approach their cell means.
inline CheckResult check_mean_value(const ExperimentConfig& cfg, std::uint64_t seed) {
  const std::string name = "mean-value";
  return detail::guarded(name, [&name, &cfg, seed] {
    if (mean_value(micro_const(1.0, cfg.dim)) != 1.0)
      return CheckResult{name, false, "mean of the unit function is not exactly 1"};

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<long long> freq(-3, 3);
    std::uniform_real_distribution<double> amp(-1.0, 1.0);
    std::uniform_real_distribution<double> phase(-kPi, kPi);
    std::uniform_real_distribution<double> shift_dist(-5.0, 5.0);
    double worst_shift = 0.0;
    for (int t = 0; t < 20; ++t) {
      std::vector<TrigTerm> terms;
      terms.push_back(TrigTerm{std::vector<Rational>(static_cast<std::size_t>(cfg.dim)),
                               amp(rng), 0.0});
      for (int j = 0; j < 3; ++j) {
        TrigTerm term;
        for (int a = 0; a < cfg.dim; ++a) term.freq.push_back(Rational(freq(rng)));
        term.amplitude = amp(rng);
        term.phase = phase(rng);
        terms.push_back(term);
      }
      std::vector<double> shift(static_cast<std::size_t>(cfg.dim));
      for (double& s : shift) s = shift_dist(rng);
      std::vector<TrigTerm> moved = terms;
      for (TrigTerm& term : moved) {
        double delta = 0.0;
        for (std::size_t a = 0; a < term.freq.size(); ++a)
          delta += kTwoPi * term.freq[a].value() * shift[a];
        term.phase += delta;
      }
      worst_shift = std::max(worst_shift, std::fabs(mean_value(micro_trig(cfg.dim, moved)) -
                                                    mean_value(micro_trig(cfg.dim, terms))));
    }

    double worst_ball = 0.0;
    std::vector<MicroFunction> micros;
    micros.push_back(cfg.firing.g);
    for (const KernelTerm& term : cfg.kernel.terms) micros.push_back(term.micro);
    for (const MicroFunction& w : micros)
      worst_ball = std::max(
          worst_ball,
          std::fabs(ball_average(w, 100.0, cfg.dim == 1 ? 32 : 8) - mean_value(w)));

    const bool pass = worst_shift <= 1e-12 && worst_ball <= 1e-2;
    return CheckResult{name, pass,
                       "translation gap " + format_double(worst_shift) +
                           " <= 1e-12, ball-average gap at R=100 " + format_double(worst_ball) +
                           " <= 1e-2"};
  });
}

// Weak pairings are bounded by the product of the L2 norms of the field and
// the sampled test-function trace.
inline CheckResult check_pairing_bound(std::uint64_t seed) {
  const std::string name = "pairing-bound";
  return detail::guarded(name, [=] {
    std::mt19937_64 rng(seed);
    const MacroGrid g{1, 4.0, 256};
    const double eps = 0.25;
    std::uniform_real_distribution<double> amp(0.2, 1.5);
    std::uniform_real_distribution<double> cen(-0.5, 0.5);
    std::uniform_int_distribution<long long> freq(0, 3);
    double worst_excess = 0.0;
    for (int t = 0; t < 20; ++t) {
      const MacroField u{g, detail::random_values(rng, g.size())};
      Profile phi;
      phi.kind = ProfileKind::gaussian;
      phi.dim = 1;
      phi.amplitude = amp(rng);
      phi.width = 0.5;
      phi.radius = 3.0;
      phi.center[0] = cen(rng);
      TestFunction psi{phi, micro_one_plus_cos(0.5, freq(rng)), TimeFactor{}};
      const double p = std::fabs(weak_sigma_pairing(u, psi, eps));
      const double bound = l2_norm(u) * l2_norm(sample_trace(g, psi.phi, psi.w, eps));
      worst_excess = std::max(worst_excess, p - bound);
    }
    return CheckResult{name, worst_excess <= 1e-12,
                       "max excess over the norm-product bound " + format_double(worst_excess)};
  });
}

// Convolution norm inequality ||u * v||_p <= ||u||_p ||v||_1 on random
// nonnegative data, macro and two-scale.
inline CheckResult check_young(std::uint64_t seed) {
  const std::string name = "young-inequality";
  return detail::guarded(name, [=] {
    std::mt19937_64 rng(seed);
    const MacroGrid g{1, 4.0, 128};
    const CellGrid c{1, 8};
    bool all = true;
    double tightest = std::numeric_limits<double>::infinity();
    for (int t = 0; t < 10; ++t) {
      const MacroField u{g, detail::random_values(rng, g.size(), 0.0, 1.0)};
      const MacroField v{g, detail::random_values(rng, g.size(), 0.0, 1.0)};
      const TwoScaleField tu{g, c, detail::random_values(rng, g.size() * c.size(), 0.0, 1.0)};
      const TwoScaleField tv{g, c, detail::random_values(rng, g.size() * c.size(), 0.0, 1.0)};
      for (double p : {1.0, 2.0}) {
        const NormProductCheck m = young_check(u, v, p);
        const NormProductCheck w = young_check(tu, tv, p);
        all = all && m.pass && w.pass;
        tightest = std::min({tightest, m.rhs - m.lhs, w.rhs - w.lhs});
      }
    }
    return CheckResult{name, all,
                       "norm-product inequality held on 40 cases; smallest slack " +
                           format_double(tightest)};
  });
}

// Binary field dumps and report tables round-trip bit-exactly through disk.
inline CheckResult check_io_roundtrip() {
  const std::string name = "io-round-trip";
  return detail::guarded(name, [&name] {
    namespace fs = std::filesystem;
    const fs::path tmp = fs::temp_directory_path() / "nfh-verify-scratch";
    fs::remove_all(tmp);
    const MacroGrid g{1, 2.0, 16};
    const CellGrid c{1, 8};
    MacroField u = MacroField::zeros(g);
    for (std::size_t i = 0; i < u.values.size(); ++i)
      u.values[i] = 0.1 + 0.2 * static_cast<double>(i) / 7.0;
    TwoScaleField w = TwoScaleField::zeros(g, c);
    for (std::size_t i = 0; i < w.values.size(); ++i)
      w.values[i] = std::sin(static_cast<double>(i)) / 3.0;
    write_field(tmp / "u.nfh", u);
    write_field(tmp / "w.nfh", w);
    const LoadedField lu = read_field(tmp / "u.nfh");
    const LoadedField lw = read_field(tmp / "w.nfh");
    bool ok = lu.values == u.values && lw.values == w.values && lu.cell_points == 0 &&
              lw.cell_points == c.points;
    const PairingReport rep = detail::finish_report({0.25, 0.125}, {1.5, 1.25}, 1.0, true);
    write_pairing_csv(tmp / "p.csv", rep);
    const PairingReport back = read_pairing_csv(tmp / "p.csv");
    ok = ok && back.eps == rep.eps && back.pairing == rep.pairing && back.limit == rep.limit;
    fs::remove_all(tmp);
    return CheckResult{name, ok, ok ? "field and table dumps reload bit-exactly"
                                    : "reloaded values differ from written ones"};
  });
}

// The active configuration validates cleanly and targeted mutations are
// rejected with messages naming the violated inequality.
inline CheckResult check_config_guards(const ExperimentConfig& cfg) {
  const std::string name = "config-validation";
  return detail::guarded(name, [&name, &cfg] {
    const bool clean = validate(cfg).empty();

    auto mentions = [](const std::vector<std::string>& msgs, const std::string& needle) {
      for (const std::string& m : msgs)
        if (m.find(needle) != std::string::npos) return true;
      return false;
    };
    ExperimentConfig bad_rho = cfg;
    bad_rho.picard.rho = 1.0 / (cfg.firing.k1() + 1.0);
    const bool rho_named = mentions(validate(bad_rho), "2(k1+1)rho");
    ExperimentConfig bad_sched = cfg;
    bad_sched.eps_schedule = {0.25, 0.25};
    const bool order_named = mentions(validate(bad_sched), "strictly decreasing");
    ExperimentConfig bad_eps = cfg;
    bad_eps.eps_schedule = {0.3};
    const bool comm_named = mentions(validate(bad_eps), "commensur");

    const bool pass = clean && rho_named && order_named && comm_named;
    std::string detail = clean ? "active config clean" : "active config has violations";
    detail += rho_named ? "; rho guard named" : "; rho guard MISSING";
    detail += order_named ? "; schedule guard named" : "; schedule guard MISSING";
    detail += comm_named ? "; commensurability guard named" : "; commensurability guard MISSING";
    return CheckResult{name, pass, detail};
  });
}

// The family expands to the expected size and every member is admissible on
// the limit grid.
inline CheckResult check_family_structure(const ExperimentConfig& cfg) {
  const std::string name = "family-structure";
  return detail::guarded(name, [&name, &cfg] {
    const std::vector<TestFunction> fam = test_family(cfg.psi);
    const std::vector<std::string> labels = family_labels(cfg.psi);
    if (fam.size() != labels.size())
      return CheckResult{name, false, "family size does not match its legend"};
    const MacroGrid lg = cfg.limit_grid();
    for (const TestFunction& psi : fam) psi.validate(lg);
    return CheckResult{name, true,
                       std::to_string(fam.size()) + " members, all admissible on the limit grid"};
  });
}

namespace detail {

// Shared solve for the contraction and a priori checks: the configured model
// on a reduced grid over the same box, one subinterval chain.
struct ContractionFixture {
  MacroGrid grid;
  KernelSpec kernel;
  double eps = 0.0;
  SolveResult solved;
  AprioriReport monitor;
  double bound = 0.0;

  explicit ContractionFixture(const ExperimentConfig& cfg)
      : grid{cfg.dim, cfg.half_width, cfg.dim == 1 ? 512 : 64} {
    eps = cfg.eps_schedule.front();
    kernel = cfg.kernel;
    const std::vector<double> sched{eps};
    kernel.sigma = normalized_sigma(kernel, grid, sched, cfg.kernel_mass_target);
    const MacroField init = sample_macro(grid, cfg.initial);
    const TimeGrid tg{1.0, 1e-3, 100};
    solved = picard_solve(kernel, cfg.firing, eps, init, tg, PicardConfig{});
    monitor = apriori_monitor(solved.trajectory, grid.cell_measure(), cfg.firing.k1(),
                              c1_norm(cfg.firing, eps, grid));
    const double k1 = cfg.firing.k1();
    const double rho = PicardConfig{}.resolved_rho(k1);
    bound = 2.0 * (k1 + 1.0) * rho + 0.05;
  }
};

}  // namespace detail

// Observed fixed-point contraction ratios stay under the analytic bound on
// every subinterval.
inline CheckResult check_picard_contraction(const ExperimentConfig& cfg) {
  const std::string name = "picard-contraction";
  return detail::guarded(name, [&name, &cfg] {
    const detail::ContractionFixture fx(cfg);
    double worst = 0.0;
    for (const SubintervalStats& s : fx.solved.report.subintervals)
      for (double r : s.ratios) worst = std::max(worst, r);
    const bool pass = !fx.solved.report.subintervals.empty() && worst <= fx.bound;
    return CheckResult{name, pass,
                       "max observed ratio " + format_double(worst) + " <= bound " +
                           format_double(fx.bound) + " over " +
                           std::to_string(fx.solved.report.subintervals.size()) +
                           " subintervals"};
  });
}

// The L2 norm along the same solve stays under the dissipative threshold
// bound at every recorded time.
inline CheckResult check_apriori_bound(const ExperimentConfig& cfg) {
  const std::string name = "a-priori-bound";
  return detail::guarded(name, [&name, &cfg] {
    const detail::ContractionFixture fx(cfg);
    return CheckResult{name, fx.monitor.ok,
                       "worst margin " + format_double(fx.monitor.worst_margin) +
                           " (<= 0 required), sup(L1+L2) = " +
                           format_double(fx.monitor.sup_l1_plus_l2)};
  });
}

// Subinterval lengths violating the contraction inequality are rejected with
// a message naming it.
inline CheckResult check_rho_rejection(const ExperimentConfig& cfg) {
  const std::string name = "rho-rejection";
  return detail::guarded(name, [&name, &cfg] {
    PicardConfig bad;
    bad.rho = 1.0 / (cfg.firing.k1() + 1.0);
    try {
      bad.validate(cfg.firing.k1());
    } catch (const ConfigError& ex) {
      const std::string msg = ex.what();
      const bool named = msg.find("2(k1+1)rho") != std::string::npos;
      return CheckResult{name, named,
                         named ? "rejected with the contraction inequality named"
                               : "rejected but the inequality is not named: " + msg};
    }
    return CheckResult{name, false, "contraction-violating rho was accepted"};
  });
}

// Both integrators against closed-form or independently integrated references
// on three fixtures: pure decay, a linear plane wave against the discrete
// kernel symbol, and a spatially constant state against an adaptive scalar
// integration. Also checks the cross-integrator gap on each.
inline CheckResult check_integrator_oracles() {
  const std::string name = "integrator-oracles";
  return detail::guarded(name, [&name] {
    std::string detail;
    bool pass = true;

    auto sup_pointwise = [](const Trajectory& traj,
                            const std::vector<std::vector<double>>& ref) {
      double worst = 0.0;
      for (std::size_t k = 0; k < traj.states.size(); ++k)
        for (std::size_t i = 0; i < traj.states[k].size(); ++i)
          worst = std::max(worst, std::fabs(traj.states[k][i] - ref[k][i]));
      return worst;
    };
    auto gaussian_kernel = [](const MacroGrid& g, double mass) {
      Profile p;
      p.kind = ProfileKind::gaussian;
      p.dim = 1;
      p.amplitude = 1.0;
      p.width = 0.5;
      p.radius = 3.0;
      KernelSpec J;
      J.terms.push_back({p, micro_const(1.0)});
      const std::vector<double> sched{1.0};
      J.sigma = normalized_sigma(J, g, sched, mass);
      return J;
    };

    {  // fixture 1: no kernel, every state decays like e^{-t}
      const MacroGrid g{1, 8.0, 128};
      const KernelSpec none;
      FiringRate f;
      Profile p;
      p.kind = ProfileKind::costaper;
      p.dim = 1;
      p.amplitude = 0.5;
      p.radius = 1.5;
      const MacroField u0 = sample_macro(g, p);
      const TimeGrid tg{1.0, 1e-3, 100};
      const SolveResult pic = picard_solve(none, f, 0.25, u0, tg, PicardConfig{});
      const SolveResult rk = rk4_solve(none, f, 0.25, u0, tg);
      std::vector<std::vector<double>> ref;
      for (double t : pic.trajectory.times) {
        std::vector<double> s(u0.values);
        for (double& v : s) v *= std::exp(-t);
        ref.push_back(std::move(s));
      }
      const double e1 = std::max(sup_pointwise(pic.trajectory, ref),
                                 sup_pointwise(rk.trajectory, ref));
      const double gap = sup_l2_gap(pic.trajectory, rk.trajectory, g.cell_measure());
      pass = pass && e1 <= 1e-6 && gap <= 1e-6;
      detail += "decay err " + format_double(e1) + " <= 1e-6, gap " + format_double(gap);
    }

    {  // fixture 2: linear rate, plane wave evolves by the kernel symbol
      const MacroGrid g{1, 8.0, 256};
      const KernelSpec J = gaussian_kernel(g, 0.8);
      FiringRate f;
      f.kind = FiringKind::linear;
      const long long mode = 3;
      const double xi = kPi * static_cast<double>(mode) / g.half_width;
      const MacroField u0 = sample_macro(g, [&](double x) { return std::cos(xi * x); });
      const TimeGrid tg{1.0, 5e-4, 200};
      const SolveResult pic = picard_solve(J, f, 0.25, u0, tg, PicardConfig{});
      const SolveResult rk = rk4_solve(J, f, 0.25, u0, tg);
      const MacroField ktrace = kernel_trace(J, 0.25, g);
      const std::complex<double> raw = direct_dft_coeff(ktrace.values, mode);
      const double sign = (mode % 2 == 0) ? 1.0 : -1.0;  // node 0 sits at x = -L
      const double s = (ktrace.grid.spacing() * sign * raw).real();
      std::vector<std::vector<double>> ref;
      for (double t : pic.trajectory.times) {
        std::vector<double> st(u0.values);
        for (double& v : st) v *= std::exp((s - 1.0) * t);
        ref.push_back(std::move(st));
      }
      const double e2 = std::max(sup_pointwise(pic.trajectory, ref),
                                 sup_pointwise(rk.trajectory, ref));
      const double gap = sup_l2_gap(pic.trajectory, rk.trajectory, g.cell_measure());
      pass = pass && e2 <= 1e-6 && gap <= 1e-6;
      detail += "; symbol err " + format_double(e2) + " <= 1e-6, gap " + format_double(gap);
    }

    {  // fixture 3: constant state follows the scalar dynamics u' = -u + m h(u)
      const MacroGrid g{1, 8.0, 128};
      const KernelSpec J = gaussian_kernel(g, 0.8);
      FiringRate f;  // sigmoid defaults
      const double mass = kernel_mass(J, 1.0, g);
      const MacroField u0{g, std::vector<double>(g.size(), 0.2)};
      const TimeGrid tg{2.0, 2.5e-4, 800};
      const SolveResult pic = picard_solve(J, f, 1.0, u0, tg, PicardConfig{});
      const SolveResult rk = rk4_solve(J, f, 1.0, u0, tg);
      std::vector<std::vector<double>> ref;
      for (double t : pic.trajectory.times) {
        const double u = t == 0.0 ? 0.2
                                  : dp45_solve([&](double, double v) { return -v + mass * f.h(v); },
                                               0.2, 0.0, t);
        ref.emplace_back(g.size(), u);
      }
      const double e3 = std::max(sup_pointwise(pic.trajectory, ref),
                                 sup_pointwise(rk.trajectory, ref));
      const double gap = sup_l2_gap(pic.trajectory, rk.trajectory, g.cell_measure());
      pass = pass && e3 <= 1e-7 && gap <= 1e-6;
      detail += "; scalar err " + format_double(e3) + " <= 1e-7, gap " + format_double(gap);
    }

    return CheckResult{name, pass, detail + "; cross gaps <= 1e-6"};
  });
}

// The verify battery: invariants of every module at desk scale.
inline std::vector<CheckResult> verify_battery(const ExperimentConfig& cfg, std::uint64_t seed) {
  std::vector<CheckResult> out;
  out.push_back(check_config_guards(cfg));
  out.push_back(check_io_roundtrip());
  out.push_back(check_conv_oracle(20, 5, seed));
  out.push_back(check_conv_separability(seed + 1));
  out.push_back(check_mean_value(cfg, seed + 2));
  out.push_back(check_pairing_bound(seed + 3));
  out.push_back(check_young(seed + 4));
  out.push_back(check_picard_contraction(cfg));
  out.push_back(check_apriori_bound(cfg));
  out.push_back(check_rho_rejection(cfg));
  out.push_back(check_integrator_oracles());
  out.push_back(check_family_structure(cfg));
  return out;
}

// The oracle battery: transform-vs-direct and integrator-vs-reference only.
inline std::vector<CheckResult> oracle_battery(const ExperimentConfig& cfg, std::uint64_t seed) {
  (void)cfg;
  std::vector<CheckResult> out;
  out.push_back(check_conv_oracle(100, 20, seed));
  out.push_back(check_conv_separability(seed + 1));
  out.push_back(check_integrator_oracles());
  return out;
}

// ---- entry point ------------------------------------------------------------

inline int report_checks(const std::vector<CheckResult>& checks, std::ostream& log) {
  bool all = true;
  for (const CheckResult& c : checks) {
    log << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << ": " << c.detail << "\n";
    all = all && c.pass;
  }
  log << (all ? "all checks passed\n" : "some checks FAILED\n");
  return all ? 0 : 1;
}

// Dispatches a validated configuration to its run mode. Returns 0 on success,
// 1 on solver or check failure, 2 on validation failure.
inline int run(const ExperimentConfig& cfg, std::ostream& log, std::uint64_t seed = 20240817) {
  const std::vector<std::string> bad = validate(cfg);
  if (!bad.empty()) {
    log << "configuration invalid:\n";
    for (const std::string& b : bad) log << "  - " << b << "\n";
    return 2;
  }
  try {
    switch (cfg.mode) {
      case RunMode::solve_hetero:
        run_solve_hetero(cfg, log);
        return 0;
      case RunMode::solve_homog:
        run_solve_homog(cfg, log);
        return 0;
      case RunMode::sweep: {
        const SweepResult res = run_sweep(cfg, &log);
        write_sweep_artifacts(cfg, res);
        log << "pairings decreasing for all " << res.pairings.size()
            << " members: " << (res.pairings_pass() ? "yes" : "NO") << "\n"
            << "corrector errors: weak max " << format_double(res.max_corrector_weak())
            << ", L2 max " << format_double(res.max_corrector_l2()) << "\n"
            << "a priori bound: " << (res.apriori_pass() ? "held" : "VIOLATED")
            << ", norm spread " << format_double(res.norm_spread) << "\n"
            << "artifacts written to " << cfg.out_dir << "\n";
        return 0;
      }
      case RunMode::verify:
        return report_checks(verify_battery(cfg, seed), log);
      case RunMode::oracle:
        return report_checks(oracle_battery(cfg, seed), log);
    }
  } catch (const std::exception& ex) {
    log << "error: " << ex.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace nfh
