#pragma once

// Time integration of  tau u_tt + G(u) u_t = eps^2 u_xx + f(u)  with homogeneous Neumann
// conditions on a cell-centred grid, and the discrete energy bookkeeping.

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "metastab/damping.hpp"
#include "metastab/grid.hpp"
#include "metastab/potential.hpp"

namespace metastab {

struct State {
  double t = 0.0;
  Field u;  // u(x_i, t)
  Field w;  // u_t(x_i, t)
  double eps = 0.0;
  double tau = 0.0;
};

/// Raised when a step produces a non-finite sample. Holds the last finite state.
class BlowUpError : public Error {
 public:
  BlowUpError(const std::string& what, State last_good) : Error(what), last_good_(std::move(last_good)) {}
  const State& last_good() const noexcept { return last_good_; }

 private:
  State last_good_;
};

/// Second-order central differences with mirror ghost cells u_{-1} = u_0, u_n = u_{n-1}.
Field laplacian_neumann(const Grid1D& grid, const Field& u);

/// Half-open range of cells [first, last).
struct CellRange {
  std::size_t first = 0;
  std::size_t last = 0;
};

/// P_eps = sum_faces (eps/2)|D+u|^2 dx + sum_cells F(u_i)/eps dx. Faces interior to the range
/// count fully; a face on the boundary of a sub-range counts half, so sub-range energies add up.
double energy_P(const Grid1D& grid, const Field& u, double eps, const PotentialSpec& potential);
double energy_P(const Grid1D& grid, const Field& u, double eps, const PotentialSpec& potential, CellRange range);
/// P_eps over [c, d], both of which must be cell boundaries (otherwise ConfigError).
double energy_P(const Grid1D& grid, const Field& u, double eps, const PotentialSpec& potential, double c, double d);

/// (tau / 2 eps) sum |w_i|^2 dx.
double kinetic_energy(const Grid1D& grid, const State& s);
/// Kinetic term plus P_eps.
double energy_E(const Grid1D& grid, const State& s, const PotentialSpec& potential);

/// Face-wise Young inequality (eps/2) q^2 + Fbar/eps >= sqrt(2 Fbar) q with q = |D+u| and
/// Fbar = (F_i + F_{i+1}) / 2. Mirror faces (q = 0) close the sum, so sum_faces Fbar equals
/// sum_cells F and the left-hand side sums exactly to energy_P.
struct YoungReport {
  double energy = 0.0;       // P_eps in the face quadrature
  double lower_bound = 0.0;  // sqrt(2) sum sqrt(Fbar) q dx
  std::size_t faces = 0;
  std::size_t violations = 0;
  double min_gap = std::numeric_limits<double>::infinity();
};
YoungReport young_bound(const Grid1D& grid, const Field& u, double eps, const PotentialSpec& potential);

struct StepStats {
  double dissipation = 0.0;   // eps^-1 sum G(u) wbar . wbar dx dt over the damping substeps
  double l1_increment = 0.0;  // sum |u^{k+1}_i - u^k_i| dx
};

/// Largest stable time step dt = cfl dx sqrt(tau) / eps.
double cfl_time_step(const Grid1D& grid, double eps, double tau, double cfl = 0.5);

/// One step of the kick / damp / drift / damp / kick splitting. Damping substeps are
/// Crank-Nicolson solves of  tau w' = -G(u) w  over dt/2 with u frozen (an m x m system per cell).
/// Throws ConfigError when dt > cfl dx sqrt(tau) / eps, BlowUpError on non-finite output.
StepStats step(State& state, const Grid1D& grid, double dt, const PotentialSpec& potential,
               const DampingSpec& damping, double cfl = 0.5);

struct LedgerRow {
  double t = 0.0;
  double E = 0.0;
  double P = 0.0;
  double kinetic = 0.0;
  double D_cum = 0.0;        // cumulative discrete dissipation
  double ut_l1_cum = 0.0;    // int ||u_t||_{L1} dt as sum of ||u^{k+1} - u^k||_{L1}
  double ut_l2sq_cum = 0.0;  // int ||u_t||^2_{L2} dt, trapezoidal in time
  double l1_to_v = std::numeric_limits<double>::quiet_NaN();
  double min_damping_eig = std::numeric_limits<double>::quiet_NaN();
  double iface_count = std::numeric_limits<double>::quiet_NaN();
  double iface_min = std::numeric_limits<double>::quiet_NaN();
  double iface_max = std::numeric_limits<double>::quiet_NaN();
  double iface_hausdorff_to_init = std::numeric_limits<double>::quiet_NaN();
};

struct EnergyLedger {
  std::vector<LedgerRow> rows;
  /// Row with time closest to t.
  const LedgerRow& at(double t) const;
};

/// |D(t1) - D(t0) - (E(t0) - E(t1))| using the ledger rows nearest t0 and t1.
double dissipation_residual(const EnergyLedger& ledger, double t0, double t1);

struct RunOptions {
  double dt = 0.0;
  double t_end = 0.0;
  /// dt must not exceed cfl dx sqrt(tau) / eps (ConfigError otherwise); cfl <= 1.
  double cfl = 0.5;
  /// Steps between ledger rows; 0 selects max(1, floor(t_end / (200 dt))).
  std::size_t snapshot_stride = 0;
  /// Target step function sampled on the grid, for the L1 column.
  std::optional<Field> reference;
  /// int ||u_t||^2 is additionally accumulated over this time window.
  double window_begin = 0.0;
  double window_end = std::numeric_limits<double>::infinity();
  /// Wall-clock cap in seconds (0 = none).
  double wall_budget = 0.0;
  bool keep_snapshots = false;
  /// Certified damping bound; rows whose smallest damping eigenvalue drops below it raise a warning.
  std::optional<double> certified_alpha;
};

/// Called on every ledger row (including t = 0) with the current state. The hook may fill the
/// interface columns; returning false stops the run after this row.
using RowHook = std::function<bool(const State&, LedgerRow&)>;

struct RunSummary {
  State final_state;
  EnergyLedger ledger;
  std::vector<State> snapshots;
  std::size_t steps = 0;
  std::size_t stride = 1;
  bool stopped_by_hook = false;
  bool wall_capped = false;
  std::size_t monotonicity_violations = 0;  // steps with E_{k+1} > E_k + 1e-10 (1 + |E_k|)
  double worst_relative_increase = -std::numeric_limits<double>::infinity();
  std::size_t young_violations = 0;
  std::size_t young_faces_checked = 0;
  double window_ut_l2sq = 0.0;
  /// Per row: ||u(t) - v||_L1 - ||u_0 - v||_L1 - int_0^t ||u_t||_L1 > rounding (triangle bound).
  std::size_t l1_bound_violations = 0;
  std::vector<std::string> warnings;
  double wall_seconds = 0.0;

  bool invariants_ok() const noexcept {
    return monotonicity_violations == 0 && young_violations == 0 && l1_bound_violations == 0;
  }
};

/// Sum over cells of |a_i - b_i| dx (Euclidean norm per cell).
double l1_distance(const Grid1D& grid, const Field& a, const Field& b);

RunSummary run(const Grid1D& grid, State initial, const PotentialSpec& potential, const DampingSpec& damping,
               const RunOptions& options, const RowHook& hook = {});

}  // namespace metastab
