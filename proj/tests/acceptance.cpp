// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "metastab/config.hpp"
#include "metastab/damping.hpp"
#include "metastab/errors.hpp"
#include "metastab/geodesic.hpp"
#include "metastab/harness.hpp"
#include "metastab/layer_profile.hpp"
#include "metastab/solver.hpp"
#include "oracles.hpp"

using namespace metastab;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Check {
 public:
  void require(bool ok, const std::string& what) {
    if (!ok) {
      out_.pass = false;
      out_.detail += "[failed: " + what + "] ";
    }
  }
  void note(const char* text) { out_.detail += std::string(text) + ' '; }
  template <class T, class... R>
  void note(const char* fmt, T first, R... rest) {
    char buf[512];
    std::snprintf(buf, sizeof buf, fmt, first, rest...);
    out_.detail += buf;
    out_.detail += ' ';
  }
  Outcome result() const { return out_; }

 private:
  Outcome out_;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const char* kTwoLayer = R"(
layer.jumps = 0.35:0>1,0.65:1>0
layer.r = 0.15
interface.delta1 = 0.05
interface.rho_d = 0.5
experiment.concurrent = false
)";

// Snapshot-level Young counts accumulated by every simulation below.
double g_snapshot_young_violations = 0.0;
double g_snapshot_young_faces = 0.0;

void tally_young(const std::vector<ResultRow>& rows) {
  for (const auto& r : rows) {
    g_snapshot_young_violations += r.young_violations;
    g_snapshot_young_faces += r.young_faces;
  }
}

ExperimentResult run_config(const std::string& text) { return run_experiment(ExperimentConfig::from_config(Config::parse(text))); }

Outcome profile_oracle() {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  const auto pc = solve_profile_ode(PotentialSpec::quartic(), PathPolyline::segment({-1.0}, {1.0}, 2, -1.0, 1.0));
  double worst = 0.0;
  for (int k = -100000; k <= 100000; ++k) {
    const double x = 1e-4 * k;
    worst = std::max(worst, std::abs(pc(x) - std::tanh(x / std::sqrt(2.0))));
  }
  const double dt = seconds_since(t0);
  c.note("max|w - tanh| = %.3e, %.3f s", worst, dt);
  c.require(worst <= 1e-6, "error <= 1e-6");
  c.require(pc(0.0) == 0.0, "w(0) = 0");
  c.require(pc.monotone(), "monotone");
  c.require(dt < 1.0, "runtime < 1 s");
  return c.result();
}

Outcome geodesic_oracle() {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  const auto q = PotentialSpec::quartic();
  const double exact = 2.0 * std::sqrt(2.0) / 3.0;
  const double closed = phi(q, {-1.0}, {1.0});
  const double string1d = optimize_path(q, {-1.0}, {1.0}).action;
  c.note("closed %.3e, 1-D string %.3e;", std::abs(closed - exact), std::abs(string1d - exact));
  c.require(std::abs(closed - exact) <= 1e-4, "closed form within 1e-4");
  c.require(std::abs(string1d - exact) <= 1e-3, "1-D optimizer within 1e-3");

  struct Case {
    std::vector<Vec> wells;
    std::size_t i, j;
    double lo, hi;
    std::size_t n;
  };
  const std::vector<Case> cases{{{{-1.0, 0.0}, {1.0, 0.0}}, 0, 1, -2.0, 2.0, 401},
                                {{{-1.0, 0.0}, {1.0, 0.0}, {0.0, 1.5}}, 0, 2, -2.0, 2.5, 451},
                                {{{-1.0, 0.0}, {1.0, 0.0}, {0.0, 1.5}}, 1, 2, -2.0, 2.5, 451}};
  for (const auto& k : cases) {
    const auto p = PotentialSpec::product_wells(k.wells);
    auto F = [&p](double x, double y) {
      const double u[2] = {x, y};
      return p.value_unchecked(u);
    };
    const double opt = optimal_path(p, k.i, k.j).action;
    const Vec& a = p.zeros()[k.i];
    const Vec& b = p.zeros()[k.j];
    const double lat = oracle::lattice_phi(F, k.lo, k.hi, k.n, a[0], a[1], b[0], b[1]);
    const double rel = (opt - lat) / lat;
    c.note("m=2 K=%zu (%zu,%zu) rel %+.2e;", k.wells.size(), k.i, k.j, rel);
    c.require(std::abs(rel) <= 0.02, "lattice within 2%");
  }
  const double dt = seconds_since(t0);
  c.note("%.2f s", dt);
  c.require(dt < 30.0, "runtime < 30 s");
  return c.result();
}

Outcome metric_axioms() {
  Check c;
  const auto p = PotentialSpec::product_wells({{-1.0, 0.0}, {1.0, 0.0}, {0.0, 1.5}});
  const PathOptions opt;
  const MetricTable t = build_metric_table(p, opt);
  const auto rep = check_metric_axioms(t);
  c.note("diag %.1e, asym %.1e, triangle excess %.1e;", rep.max_diagonal, rep.max_asymmetry, rep.max_triangle_excess);
  c.require(rep.pass, "table axioms (diagonal, symmetry, triangle within tolerance)");
  c.require(rep.max_diagonal == 0.0, "zero diagonal");
  // Symmetry against independent reverse optimizations.
  double worst = 0.0;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      if (i != j) worst = std::max(worst, std::abs(t(i, j) - optimal_path(p, j, i, opt).action));
  const double allowance = opt.tol_path + 1e-6;
  c.note("reverse-optimization asym %.2e (allowance %.1e)", worst, allowance);
  c.require(worst <= allowance, "symmetry");
  return c.result();
}

Outcome young_random() {
  Check c;
  const auto q = PotentialSpec::quartic();
  const auto p = PotentialSpec::product_wells({{-1.0, 0.0}, {1.0, 0.0}, {0.0, 1.5}});
  std::mt19937_64 rng(20261014);
  std::normal_distribution<double> N;
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::size_t violations = 0, faces = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const PotentialSpec& pot = trial % 2 ? p : q;
    const Grid1D g(0.0, 1.0, 50 + trial % 300);
    const double eps = 0.01 + 0.2 * U(rng);
    Field u(g.size(), pot.dimension());
    // Alternate rough noise with smooth random layers.
    const double scale = 0.1 + 2.0 * U(rng);
    const double centre = 0.2 + 0.6 * U(rng);
    for (std::size_t i = 0; i < g.size(); ++i)
      for (std::size_t k = 0; k < pot.dimension(); ++k)
        u(i, k) = trial % 4 < 2 ? scale * N(rng) : std::tanh((g.x(i) - centre) / eps) + 0.05 * N(rng);
    const auto rep = young_bound(g, u, eps, pot);
    violations += rep.violations;
    faces += rep.faces;
    if (rep.energy < rep.lower_bound * (1.0 - 1e-12)) ++violations;
  }
  c.note("random: %zu violations over %zu faces;", violations, faces);
  c.require(violations == 0, "random profiles");
  return c.result();
}

struct EnergyRun {
  ResultRow coarse, fine;
  double seconds = 0.0;
};

// Same run at n and 2n cells; dt follows dx through the CFL rule.
EnergyRun energy_pair(const std::string& extra, std::size_t cells) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string base = std::string(kTwoLayer) + extra + "solver.t_end = 100\nexperiment.stop_on_exit = false\n";
  EnergyRun er;
  const auto a = run_config(base + "solver.cells = " + std::to_string(cells) + "\n");
  const auto b = run_config(base + "solver.cells = " + std::to_string(2 * cells) + "\n");
  tally_young(a.rows);
  tally_young(b.rows);
  er.coarse = a.rows.at(0);
  er.fine = b.rows.at(0);
  er.seconds = seconds_since(t0);
  return er;
}

void judge_energy(Check& c, const EnergyRun& er) {
  const double ratio = er.coarse.residual / er.fine.residual;
  c.note("dt %.3e -> %.3e, residual %.3e -> %.3e (ratio %.2f), monotone violations %g/%g, worst rel increase %.1e, t %.0f/%.0f, %.1f s;",
         er.coarse.dt, er.fine.dt, er.coarse.residual, er.fine.residual, ratio, er.coarse.monotone_violations,
         er.fine.monotone_violations, std::max(er.coarse.worst_relative_increase, er.fine.worst_relative_increase),
         er.coarse.t_reached, er.fine.t_reached, er.seconds);
  c.require(er.coarse.status.rfind("ok", 0) == 0 && er.fine.status.rfind("ok", 0) == 0, "runs completed");
  c.require(er.coarse.t_reached >= 100.0 - 1e-9 && er.fine.t_reached >= 100.0 - 1e-9, "t_end reached");
  c.require(er.coarse.monotone_violations == 0 && er.fine.monotone_violations == 0, "E nonincreasing every step");
  c.require(std::abs(er.fine.dt / er.coarse.dt - 0.5) < 1e-12, "dt halved");
  c.require(ratio >= 3.0, "residual ratio >= 3");
  c.require(er.coarse.young_violations == 0 && er.fine.young_violations == 0, "Young on snapshots");
}

Outcome energy_identity() {
  Check c;
  const EnergyRun er = energy_pair("layer.eps = [0.05]\nmodel.tau = 1\ndamping.kind = identity\n", 400);
  judge_energy(c, er);
  c.require(er.seconds < 300.0, "runtime < 5 min");
  return c.result();
}

Outcome energy_excess() {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  const auto q = PotentialSpec::quartic();
  const MetricTable t = build_metric_table(q);
  const auto v = StepFunction::parse("0.35:0>1,0.65:1>0", 0.0, 1.0, 0.15);
  const double P0 = asymptotic_energy_P0(q, v, t);
  Vec eps{0.1, 0.05, 0.025}, excess;
  for (double e : eps) {
    const auto d = build_initial_datum(q, v, e, t);
    const auto rep = verify_transition_layer_structure(d, Grid1D::with_max_spacing(0.0, 1.0, e / 20), P0);
    excess.push_back(rep.excess);
    c.note("eps %.3f excess %.3e;", e, rep.excess);
    c.require(rep.excess > 0.0, "excess positive");
  }
  const auto fit = fit_log_linear(eps, excess);
  const double dt = seconds_since(t0);
  c.note("slope %.3f R2 %.4f, %.2f s", fit.slope, fit.r2, dt);
  c.require(fit.used == 3, "all points fitted");
  c.require(fit.slope < 0.0, "negative slope");
  c.require(fit.r2 >= 0.9, "R2 >= 0.9");
  c.require(dt < 60.0, "runtime < 1 min");
  return c.result();
}

Outcome equipartition() {
  Check c;
  const auto q = PotentialSpec::quartic();
  const MetricTable t = build_metric_table(q);
  const auto v = StepFunction::parse("0.35:0>1,0.65:1>0", 0.0, 1.0, 0.15);
  for (double e : {0.1, 0.05, 0.025}) {
    const auto d = build_initial_datum(q, v, e, t);
    const double res = equipartition_residual(d, Grid1D::with_max_spacing(0.0, 1.0, e / 50));
    c.note("eps %.3f residual %.2e;", e, res);
    c.require(res <= 1e-4, "residual <= 1e-4");
  }
  return c.result();
}

ExperimentResult g_sweep;

Outcome slow_motion() {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  g_sweep = run_config(std::string(kTwoLayer) +
                       "layer.eps = [0.08, 0.07, 0.06, 0.05]\n"
                       "experiment.horizon_multiplier = 2\n"
                       "experiment.wall_budget = 600\n"
                       "experiment.window_begin = 1\n"
                       "experiment.window_end = 50\n");
  tally_young(g_sweep.rows);
  const auto& rows = g_sweep.rows;
  for (const auto& r : rows) {
    c.note("eps %.2f: exit %s%.4g drift %.3e budget %.3e%s;", r.eps, r.exited > 0 ? "" : ">", r.exited > 0 ? r.exit_time : r.t_reached,
           r.drift_speed, r.ut_budget, r.wall_capped > 0 ? " (wall-capped)" : "");
    c.require(r.status.rfind("ok", 0) == 0, "run status ok");
    c.require(r.window_complete > 0, "window [1, 50] covered");
  }
  try {
    const auto fit = fit_rate(rows, QuantityKind::drift_speed);
    c.note("drift fit slope %.4f R2 %.4f (n=%zu);", fit.slope, fit.r2, fit.used);
    c.require(fit.slope < 0.0, "drift slope < 0");
    c.require(fit.r2 >= 0.9, "drift R2 >= 0.9");
  } catch (const InsufficientDataError& e) {
    c.require(false, e.what());
  }
  try {
    const auto fit = fit_rate(rows, QuantityKind::exit_time);
    c.note("exit-time fit slope %.3f (n=%zu, report only);", fit.slope, fit.used);
  } catch (const InsufficientDataError&) {
    c.note("exit-time fit: too few uncensored exits (report only);");
  }
  for (std::size_t i = 1; i < rows.size(); ++i) c.require(rows[i].ut_budget < rows[i - 1].ut_budget, "budget strictly decreasing");
  c.note("%.1f s", seconds_since(t0));
  return c.result();
}

Outcome l1_stability() {
  Check c;
  const auto& rows = g_sweep.rows;
  c.require(rows.size() == 4, "criterion-8 sweep available");
  for (const auto& r : rows) {
    c.note("eps %.2f: sup increase %.3e on [0, %.4g], full-run %.3e, L1 bound %.3e, violations %g;", r.eps,
           r.l1_sup_increase_common, r.l1_common_window, r.l1_sup_increase, r.ut_l1_total, r.l1_bound_violations);
    c.require(r.l1_bound_violations == 0, "sup increase <= ledgered bound at every row");
    c.require(r.l1_sup_increase <= r.ut_l1_total * (1.0 + 1e-12) + 1e-12, "run-level bound");
  }
  for (std::size_t i = 1; i < rows.size(); ++i)
    c.require(rows[i].l1_sup_increase_common < rows[i - 1].l1_sup_increase_common, "decreases with eps");
  return c.result();
}

Outcome relaxation() {
  Check c;
  const auto G = relaxation_preset(std::make_shared<const PotentialSpec>(PotentialSpec::quartic()), 0.1);
  const auto cert = certify_positivity(G, Box{{-2.0}, {2.0}}, 4096);
  c.note("alpha %.10f at u = %.2e;", cert.alpha, cert.worst_point.at(0));
  c.require(cert.accepted(), "certified");
  c.require(std::abs(cert.alpha - 0.9) <= 1e-6, "alpha = 1 - tau");
  const EnergyRun er = energy_pair("layer.eps = [0.06]\nmodel.tau = 0.1\ndamping.kind = relaxation\ndamping.certify_box = [[-2], [2]]\n", 334);
  judge_energy(c, er);
  c.note("min damping eig %.4f", std::min(er.coarse.min_damping_eig, er.fine.min_damping_eig));
  c.require(er.coarse.min_damping_eig >= cert.alpha - 1e-8, "damping stays above alpha");
  return c.result();
}

Outcome young_all() {
  Outcome o = young_random();
  Check c;
  c.note("snapshots: %g violations over %g faces", g_snapshot_young_violations, g_snapshot_young_faces);
  c.require(g_snapshot_young_violations == 0, "simulation snapshots");
  c.require(g_snapshot_young_faces > 0, "snapshots were checked");
  const Outcome s = c.result();
  o.pass = o.pass && s.pass;
  o.detail += s.detail;
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> fn;
  };
  // Criterion 4 also covers every simulation snapshot, so it runs after the simulations.
  const std::vector<Criterion> order{{1, "profile oracle", profile_oracle},
                                     {2, "geodesic oracle", geodesic_oracle},
                                     {3, "metric axioms", metric_axioms},
                                     {5, "energy monotonicity and dissipation identity", energy_identity},
                                     {6, "transition-layer energy excess", energy_excess},
                                     {7, "equipartition", equipartition},
                                     {8, "slow-motion scaling", slow_motion},
                                     {9, "L1 stability", l1_stability},
                                     {10, "relaxation damping", relaxation},
                                     {4, "discrete Young bound", young_all}};
  std::vector<std::pair<int, std::string>> lines;
  bool all = true;
  for (const auto& cr : order) {
    Outcome o;
    try {
      o = cr.fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    all = all && o.pass;
    std::ostringstream os;
    os << (o.pass ? "PASS" : "FAIL") << "  criterion " << cr.id << " (" << cr.name << "): " << o.detail;
    lines.emplace_back(cr.id, os.str());
    std::fprintf(stderr, "%s\n", os.str().c_str());
  }
  std::sort(lines.begin(), lines.end());
  for (const auto& l : lines) std::printf("%s\n", l.second.c_str());
  return all ? 0 : 1;
}
