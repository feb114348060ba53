#pragma once

// Experiment orchestration: typed configuration, per-eps runs, rate fits and persistence.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "metastab/config.hpp"
#include "metastab/csv.hpp"
#include "metastab/damping.hpp"
#include "metastab/geodesic.hpp"
#include "metastab/interface.hpp"
#include "metastab/layer_profile.hpp"
#include "metastab/potential.hpp"
#include "metastab/solver.hpp"

namespace metastab {

struct ExperimentConfig {
  Config source;

  std::shared_ptr<const PotentialSpec> potential;
  std::string damping_kind = "identity";  // identity | relaxation | constant
  Matrix damping_matrix;                 // constant kind
  std::optional<Box> certify_box;
  std::size_t certify_samples = 4096;
  double tau = 1.0;

  double a = 0.0;
  double b = 1.0;
  std::string jumps;
  std::size_t constant_well = 0;
  double r = 0.15;
  Vec eps_list;

  VelocityKind velocity = VelocityKind::zero;
  double velocity_A = 1.0;
  double velocity_C = 1.0;

  double dx_over_eps = 20.0;
  std::size_t cells = 0;  // fixed cell count for every eps; 0 derives it from dx_over_eps
  double cfl = 0.5;
  std::optional<double> t_end;  // overrides the horizon when set
  std::size_t snapshot_stride = 0;

  double horizon_multiplier = 1.0;
  double wall_budget = 600.0;
  double window_begin = 1.0;
  double window_end = 50.0;
  bool stop_on_exit = true;
  bool concurrent = true;

  double delta1 = 0.05;
  double rho_d = 0.5;
  std::string output_dir = "out";
  std::uint64_t seed = 42;
  PathOptions path_options;

  /// Parses and validates; throws ConfigError on unknown keys or invalid values.
  static ExperimentConfig from_config(const Config& config);
  static const std::vector<std::string>& known_keys();

  DampingSpec make_damping() const;
  StepFunction step_function() const;
  /// r sqrt(2 lambda), lambda the smallest Hessian eigenvalue over the wells.
  double A_ref() const;
  /// Explicit t_end, else horizon_multiplier exp(A_ref / eps).
  double t_end_for(double eps) const;
};

/// One row per eps. Only deterministic quantities are stored (no wall-clock time).
struct ResultRow {
  double eps = 0.0;
  std::string status = "ok";
  double dx = 0.0;
  double dt = 0.0;
  double cells = 0.0;
  double steps = 0.0;
  double t_end_target = 0.0;
  double t_reached = 0.0;
  double wall_capped = 0.0;
  double P0 = 0.0;
  double energy = 0.0;        // continuum P_eps[u0]
  double energy_grid = 0.0;   // discrete P_eps[u0]
  double excess = 0.0;        // energy - P0
  double l1_init = 0.0;       // discrete ||u0 - v||_L1
  double exited = 0.0;
  double exit_time = std::numeric_limits<double>::quiet_NaN();
  double exit_resolution = 0.0;  // time between ledger rows
  double hausdorff_max = 0.0;
  double drift_speed = std::numeric_limits<double>::quiet_NaN();
  double drift_t0 = std::numeric_limits<double>::quiet_NaN();
  double drift_t1 = std::numeric_limits<double>::quiet_NaN();
  double residual = 0.0;         // dissipation identity defect over the run
  double ut_budget = 0.0;        // int ||u_t||^2 over the window
  double window_complete = 0.0;
  double ut_l2sq_total = 0.0;
  double ut_l1_total = 0.0;
  double l1_sup_increase = 0.0;         // sup_t ||u - v|| - ||u0 - v|| over all rows
  double l1_sup_increase_window = 0.0;  // same, rows with t <= window end
  /// Same over [0, T_c], T_c the earliest exit (or end) time across the sweep; set by run_experiment.
  double l1_common_window = std::numeric_limits<double>::quiet_NaN();
  double l1_sup_increase_common = std::numeric_limits<double>::quiet_NaN();
  double l1_bound_violations = 0.0;
  double monotone_violations = 0.0;
  double worst_relative_increase = 0.0;
  double young_violations = 0.0;
  double young_faces = 0.0;
  double min_damping_eig = std::numeric_limits<double>::quiet_NaN();
  double alpha = std::numeric_limits<double>::quiet_NaN();
  /// alpha eps^-1 int ||u_t||^2 - (E(0) - E(T)) - residual; must be <= rounding.
  double dissipative_gap = std::numeric_limits<double>::quiet_NaN();
  double invariants_ok = 0.0;
  double A_ref = 0.0;
  double horizon_multiplier = 0.0;
  double rho_d = 0.0;
  double delta1 = 0.0;

  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

/// Trajectory data of one eps-run kept alongside its row.
struct RunRecord {
  EnergyLedger ledger;
  std::vector<Vec> fronts;  // sub-cell front positions per ledger row
  State initial;
  State final_state;
  Grid1D grid{0.0, 1.0, 16};
  std::vector<std::string> warnings;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;
  std::vector<RunRecord> records;
  MetricTable table;
  std::optional<PositivityCertificate> certificate;
  std::vector<std::string> warnings;

  bool invariants_ok() const;
};

/// Builds the metric table and damping certificate once, then one run per eps (concurrent when
/// configured; merged in eps order). Per-eps failures land in the row's status.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Fills the common-window L1 columns from the records.
void apply_common_window(ExperimentResult& result);

/// One eps-run with precomputed table and certified bound.
ResultRow run_single(const ExperimentConfig& config, double eps, const MetricTable& table,
                     std::optional<double> alpha, RunRecord* record = nullptr);

enum class QuantityKind { exit_time, drift_speed, energy_excess, ut_budget };
std::string to_string(QuantityKind kind);
QuantityKind parse_quantity_kind(const std::string& text);
double quantity(const ResultRow& row, QuantityKind kind);

struct FitReport {
  QuantityKind kind = QuantityKind::exit_time;
  double slope = 0.0;      // d log(q) / d(1/eps)
  double intercept = 0.0;  // log prefactor
  double r2 = 0.0;
  double A_hat = 0.0;      // |slope|
  std::size_t used = 0;
  std::vector<std::string> warnings;
};

/// Least squares through (1/eps, log q). Rows with nonpositive or non-finite q (censored exit
/// times included) are skipped with a warning; fewer than 3 usable rows raise InsufficientDataError.
FitReport fit_rate(const std::vector<ResultRow>& rows, QuantityKind kind);
/// Same on raw (1/eps, q) pairs.
FitReport fit_log_linear(const Vec& eps, const Vec& q, QuantityKind kind = QuantityKind::energy_excess);

CsvTable rows_to_csv(const std::vector<ResultRow>& rows);
std::vector<ResultRow> rows_from_csv(const CsvTable& table);
CsvTable ledger_to_csv(const EnergyLedger& ledger, const std::vector<Vec>& fronts = {});
/// Columns x, u_1..u_m, ut_1..ut_m.
CsvTable snapshot_to_csv(const Grid1D& grid, const State& state);
CsvTable fit_to_csv(const std::vector<FitReport>& fits);

/// METASTAB_OUTPUT_ROOT, when set and the configured directory is relative, is prepended.
std::string resolve_output_dir(const std::string& configured);

/// Writes config.txt (verbatim), rows.csv, ledger_<k>.csv, initial_<k>.csv, final_<k>.csv and
/// manifest.txt with the config and rows hashes.
void persist(const std::string& dir, const ExperimentResult& result, const ExperimentConfig& config);
/// Reads rows.csv back; CorruptionError if a recorded hash does not match.
std::vector<ResultRow> load_rows(const std::string& dir);

}  // namespace metastab
