#include "metastab/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace metastab {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;

double cell_distance(std::span<const double> a, std::span<const double> b) { return distance(a, b); }

double face_gradient_sq(const Field& u, std::size_t i, double dx) {
  double q2 = 0.0;
  for (std::size_t k = 0; k < u.components(); ++k) {
    const double d = (u(i + 1, k) - u(i, k)) / dx;
    q2 += d * d;
  }
  return q2;
}

void check_state(const State& s, const char* where) {
  if (!(s.eps > 0.0) || !(s.tau > 0.0)) throw ConfigError(std::string(where) + ": eps and tau must be positive");
  if (s.u.cells() != s.w.cells() || s.u.components() != s.w.components())
    throw ConfigError(std::string(where) + ": u and u_t shapes differ");
}

/// Crank-Nicolson solve of tau w' = -G(u) w over h with u frozen. Returns the kinetic energy removed.
double damp(State& s, const Grid1D& grid, double h, const DampingSpec& damping) {
  const std::size_t n = s.u.cells();
  const std::size_t m = s.u.components();
  const double dx = grid.dx();
  double removed = 0.0;
  if (damping.kind() == DampingKind::identity) {
    const double c = (s.tau - 0.5 * h) / (s.tau + 0.5 * h);
    for (std::size_t i = 0; i < n; ++i) {
      auto w = s.w.cell(i);
      double wbar2 = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        const double wn = c * w[k];
        const double wb = 0.5 * (w[k] + wn);
        wbar2 += wb * wb;
        w[k] = wn;
      }
      removed += wbar2;
    }
    return h / s.eps * removed * dx;
  }
  Vec rhs(m), wbar(m);
  for (std::size_t i = 0; i < n; ++i) {
    const Matrix G = damping(s.u.cell(i));
    auto w = s.w.cell(i);
    Matrix lhs(m, m);
    for (std::size_t r = 0; r < m; ++r) {
      double acc = s.tau * w[r];
      for (std::size_t c = 0; c < m; ++c) {
        lhs(r, c) = 0.5 * h * G(r, c) + (r == c ? s.tau : 0.0);
        acc -= 0.5 * h * G(r, c) * w[c];
      }
      rhs[r] = acc;
    }
    solve_in_place(lhs, rhs);
    for (std::size_t k = 0; k < m; ++k) wbar[k] = 0.5 * (w[k] + rhs[k]);
    const Vec gw = G.apply(wbar);
    removed += dot(wbar, gw);
    std::copy(rhs.begin(), rhs.end(), w.begin());
  }
  return h / s.eps * removed * dx;
}

void kick(State& s, const Grid1D& grid, double h, const PotentialSpec& potential) {
  const Field lap = laplacian_neumann(grid, s.u);
  const std::size_t n = s.u.cells();
  const std::size_t m = s.u.components();
  const double e2 = s.eps * s.eps;
  const double c = h / s.tau;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec g = potential.gradient(s.u.cell(i));
    for (std::size_t k = 0; k < m; ++k) s.w(i, k) += c * (e2 * lap(i, k) - g[k]);
  }
}

double l2sq(const Grid1D& grid, const Field& w) {
  double acc = 0.0;
  for (double x : w.values()) acc += x * x;
  return acc * grid.dx();
}

}  // namespace

Field laplacian_neumann(const Grid1D& grid, const Field& u) {
  const std::size_t n = u.cells();
  const std::size_t m = u.components();
  if (n < 2) throw ConfigError("laplacian_neumann: need at least two cells");
  const double inv = 1.0 / (grid.dx() * grid.dx());
  Field out(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t l = i == 0 ? 0 : i - 1;
    const std::size_t r = i + 1 == n ? n - 1 : i + 1;
    for (std::size_t k = 0; k < m; ++k) out(i, k) = (u(r, k) - 2.0 * u(i, k) + u(l, k)) * inv;
  }
  return out;
}

double energy_P(const Grid1D& grid, const Field& u, double eps, const PotentialSpec& potential, CellRange range) {
  const std::size_t n = u.cells();
  if (range.first >= range.last || range.last > n) throw ConfigError("energy_P: empty or out-of-range cell range");
  const double dx = grid.dx();
  double grad = 0.0;
  for (std::size_t i = range.first; i + 1 < range.last; ++i) grad += face_gradient_sq(u, i, dx);
  // Faces shared with the neighbouring range count half.
  if (range.first > 0) grad += 0.5 * face_gradient_sq(u, range.first - 1, dx);
  if (range.last < n) grad += 0.5 * face_gradient_sq(u, range.last - 1, dx);
  double pot = 0.0;
  for (std::size_t i = range.first; i < range.last; ++i) pot += potential.value_unchecked(u.cell(i));
  return 0.5 * eps * grad * dx + pot * dx / eps;
}

double energy_P(const Grid1D& grid, const Field& u, double eps, const PotentialSpec& potential) {
  return energy_P(grid, u, eps, potential, CellRange{0, u.cells()});
}

double energy_P(const Grid1D& grid, const Field& u, double eps, const PotentialSpec& potential, double c, double d) {
  auto to_face = [&grid](double x) {
    const double k = (x - grid.a()) / grid.dx();
    const double r = std::round(k);
    if (std::abs(k - r) > 1e-9 || r < 0 || r > static_cast<double>(grid.size()))
      throw ConfigError("energy_P: interval end is not a cell boundary");
    return static_cast<std::size_t>(r);
  };
  return energy_P(grid, u, eps, potential, CellRange{to_face(c), to_face(d)});
}

double kinetic_energy(const Grid1D& grid, const State& s) { return s.tau / (2.0 * s.eps) * l2sq(grid, s.w); }

double energy_E(const Grid1D& grid, const State& s, const PotentialSpec& potential) {
  return kinetic_energy(grid, s) + energy_P(grid, s.u, s.eps, potential);
}

YoungReport young_bound(const Grid1D& grid, const Field& u, double eps, const PotentialSpec& potential) {
  const std::size_t n = u.cells();
  const double dx = grid.dx();
  Vec F(n);
  for (std::size_t i = 0; i < n; ++i) F[i] = std::max(potential.value_unchecked(u.cell(i)), 0.0);
  YoungReport rep;
  // Mirror faces sit half inside the domain.
  auto face = [&](double q, double fbar, double weight) {
    const double lhs = 0.5 * eps * q * q + fbar / eps;
    const double rhs = kSqrt2 * std::sqrt(fbar) * q;
    rep.energy += weight * lhs * dx;
    rep.lower_bound += weight * rhs * dx;
    rep.min_gap = std::min(rep.min_gap, lhs - rhs);
    if (lhs - rhs < -1e-12 * (lhs + rhs)) ++rep.violations;
    ++rep.faces;
  };
  face(0.0, F[0], 0.5);
  for (std::size_t i = 0; i + 1 < n; ++i) face(std::sqrt(face_gradient_sq(u, i, dx)), 0.5 * (F[i] + F[i + 1]), 1.0);
  face(0.0, F[n - 1], 0.5);
  return rep;
}

double cfl_time_step(const Grid1D& grid, double eps, double tau, double cfl) {
  return cfl * grid.dx() * std::sqrt(tau) / eps;
}

StepStats step(State& state, const Grid1D& grid, double dt, const PotentialSpec& potential,
               const DampingSpec& damping, double cfl) {
  check_state(state, "step");
  if (!(dt > 0.0)) throw ConfigError("step: dt must be positive");
  if (dt > cfl_time_step(grid, state.eps, state.tau, cfl) * (1.0 + 1e-12))
    throw ConfigError("step: dt violates the CFL limit");
  if (state.u.cells() != grid.size() || state.u.components() != potential.dimension())
    throw ConfigError("step: state does not match grid or potential");

  const State before = state;
  StepStats stats;
  const double h = 0.5 * dt;
  kick(state, grid, h, potential);
  stats.dissipation += damp(state, grid, h, damping);
  auto u = state.u.values();
  auto w = state.w.values();
  for (std::size_t j = 0; j < u.size(); ++j) u[j] += dt * w[j];
  stats.dissipation += damp(state, grid, h, damping);
  kick(state, grid, h, potential);
  state.t = before.t + dt;

  if (!all_finite(state.u.values()) || !all_finite(state.w.values())) {
    std::ostringstream os;
    os << "non-finite state after step at t = " << before.t;
    throw BlowUpError(os.str(), before);
  }
  stats.l1_increment = l1_distance(grid, state.u, before.u);
  return stats;
}

double l1_distance(const Grid1D& grid, const Field& a, const Field& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.cells(); ++i) acc += cell_distance(a.cell(i), b.cell(i));
  return acc * grid.dx();
}

const LedgerRow& EnergyLedger::at(double t) const {
  if (rows.empty()) throw ConfigError("EnergyLedger: empty ledger");
  const auto it = std::min_element(rows.begin(), rows.end(), [t](const LedgerRow& l, const LedgerRow& r) {
    return std::abs(l.t - t) < std::abs(r.t - t);
  });
  return *it;
}

double dissipation_residual(const EnergyLedger& ledger, double t0, double t1) {
  const LedgerRow& r0 = ledger.at(t0);
  const LedgerRow& r1 = ledger.at(t1);
  return std::abs((r1.D_cum - r0.D_cum) - (r0.E - r1.E));
}

RunSummary run(const Grid1D& grid, State initial, const PotentialSpec& potential, const DampingSpec& damping,
               const RunOptions& opt, const RowHook& hook) {
  check_state(initial, "run");
  if (!(opt.cfl > 0.0 && opt.cfl <= 1.0)) throw ConfigError("run: cfl must lie in (0, 1]");
  if (!(opt.t_end >= 0.0)) throw ConfigError("run: t_end must be nonnegative");
  if (opt.t_end > 0.0) {
    if (!(opt.dt > 0.0)) throw ConfigError("run: dt must be positive");
    if (opt.dt > cfl_time_step(grid, initial.eps, initial.tau, opt.cfl) * (1.0 + 1e-12))
      throw ConfigError("run: dt violates the CFL condition");
  }
  if (initial.u.cells() != grid.size() || initial.u.components() != potential.dimension())
    throw ConfigError("run: state does not match grid or potential");
  if (opt.reference && (opt.reference->cells() != grid.size() || opt.reference->components() != potential.dimension()))
    throw ConfigError("run: reference field shape mismatch");

  const auto wall_start = std::chrono::steady_clock::now();
  RunSummary sum;
  sum.stride = opt.snapshot_stride;
  if (sum.stride == 0 && opt.t_end > 0.0)
    sum.stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(opt.t_end / (200.0 * opt.dt))));
  if (sum.stride == 0) sum.stride = 1;

  State s = std::move(initial);
  const double t0 = s.t;
  const Field u0 = s.u;
  const double l1_init = opt.reference ? l1_distance(grid, u0, *opt.reference) : 0.0;
  double D = 0.0, ut_l1 = 0.0, ut_l2sq = 0.0;
  double E_prev = energy_E(grid, s, potential);
  double w2_prev = l2sq(grid, s.w);
  bool warned_damping = false;

  auto make_row = [&]() {
    LedgerRow row;
    row.t = s.t;
    row.kinetic = kinetic_energy(grid, s);
    row.P = energy_P(grid, s.u, s.eps, potential);
    row.E = row.kinetic + row.P;
    row.D_cum = D;
    row.ut_l1_cum = ut_l1;
    row.ut_l2sq_cum = ut_l2sq;
    if (opt.reference) {
      row.l1_to_v = l1_distance(grid, s.u, *opt.reference);
      // Triangle inequality through u_0, with a rounding allowance.
      const double slack = 1e-12 * (1.0 + l1_init + ut_l1);
      if (row.l1_to_v - l1_init > ut_l1 + slack) ++sum.l1_bound_violations;
    }
    if (damping.kind() == DampingKind::identity) {
      row.min_damping_eig = 1.0;
    } else {
      double e = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < s.u.cells(); ++i) e = std::min(e, smallest_symmetric_eigenvalue(damping, s.u.cell(i)));
      row.min_damping_eig = e;
      const double floor = opt.certified_alpha ? *opt.certified_alpha - 1e-8 : 0.0;
      if (!warned_damping && !(e > floor)) {
        std::ostringstream os;
        os << "smallest damping eigenvalue " << e << " at t = " << s.t << " is below " << floor;
        sum.warnings.push_back(os.str());
        warned_damping = true;
      }
    }
    const YoungReport yr = young_bound(grid, s.u, s.eps, potential);
    sum.young_violations += yr.violations;
    sum.young_faces_checked += yr.faces;
    if (row.P < yr.lower_bound * (1.0 - 1e-12) - 1e-300) ++sum.young_violations;
    return row;
  };

  auto emit = [&]() {
    LedgerRow row = make_row();
    bool keep_going = true;
    if (hook) keep_going = hook(s, row);
    sum.ledger.rows.push_back(row);
    if (opt.keep_snapshots) sum.snapshots.push_back(s);
    return keep_going;
  };

  if (!emit()) {
    sum.stopped_by_hook = true;
    sum.final_state = std::move(s);
    return sum;
  }

  const double t_stop = t0 + opt.t_end;
  std::size_t k = 0;
  while (opt.t_end > 0.0 && s.t < t_stop - 1e-12 * std::max(1.0, std::abs(t_stop))) {
    const double t_next = std::min(t0 + static_cast<double>(k + 1) * opt.dt, t_stop);
    // The difference of absolute times can exceed opt.dt by a few ulps of t.
    const double dt = std::min(t_next - s.t, opt.dt);
    const double t_before = s.t;
    const StepStats st = step(s, grid, dt, potential, damping, opt.cfl);
    s.t = t_next;
    ++k;
    D += st.dissipation;
    ut_l1 += st.l1_increment;
    const double w2 = l2sq(grid, s.w);
    ut_l2sq += 0.5 * dt * (w2_prev + w2);
    const double lo = std::max(t_before, opt.window_begin);
    const double hi = std::min(s.t, opt.window_end);
    if (hi > lo) sum.window_ut_l2sq += (hi - lo) * 0.5 * (w2_prev + w2);
    w2_prev = w2;

    const double E = energy_E(grid, s, potential);
    const double rel = (E - E_prev) / (1.0 + std::abs(E_prev));
    sum.worst_relative_increase = std::max(sum.worst_relative_increase, rel);
    if (E > E_prev + 1e-10 * (1.0 + std::abs(E_prev))) ++sum.monotonicity_violations;
    E_prev = E;

    const bool last = s.t >= t_stop - 1e-12 * std::max(1.0, std::abs(t_stop));
    if (k % sum.stride == 0 || last) {
      if (!emit()) {
        sum.stopped_by_hook = true;
        break;
      }
    }
    if (opt.wall_budget > 0.0 && (k & 63U) == 0) {
      const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
      if (elapsed > opt.wall_budget) {
        sum.wall_capped = true;
        if (!last) emit();
        break;
      }
    }
  }
  sum.steps = k;
  sum.final_state = std::move(s);
  sum.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  return sum;
}

}  // namespace metastab
