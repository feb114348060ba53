#include "metastab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <future>
#include <sstream>

#include "metastab/errors.hpp"

namespace metastab {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
  return out;
}

}  // namespace

const std::vector<std::string>& ExperimentConfig::known_keys() {
  static const std::vector<std::string> keys = {
      "potential.kind", "potential.zeros", "potential.coeffs",
      "damping.kind", "damping.matrix", "damping.certify_box", "damping.certify_samples",
      "model.tau", "domain.a", "domain.b",
      "layer.jumps", "layer.constant_well", "layer.r", "layer.eps",
      "velocity.kind", "velocity.A", "velocity.C",
      "solver.dx_over_eps", "solver.cells", "solver.cfl", "solver.t_end", "solver.snapshot_stride",
      "experiment.horizon_multiplier", "experiment.wall_budget", "experiment.window_begin",
      "experiment.window_end", "experiment.stop_on_exit", "experiment.concurrent",
      "interface.delta1", "interface.rho_d",
      "geodesic.nodes", "geodesic.max_sweeps", "geodesic.tol_path",
      "output.dir", "seed"};
  return keys;
}

ExperimentConfig ExperimentConfig::from_config(const Config& c) {
  const auto unknown = c.unknown_keys(known_keys());
  require(unknown.empty(), "unknown config keys: " + join(unknown, ", "));
  ExperimentConfig e;
  e.source = c;

  const std::string pk = c.get_string("potential.kind", "quartic");
  if (pk == "quartic") {
    e.potential = std::make_shared<const PotentialSpec>(PotentialSpec::quartic());
  } else if (pk == "product_wells") {
    const auto z = c.get_points("potential.zeros");
    require(z.has_value(), "potential.kind = product_wells needs potential.zeros");
    e.potential = std::make_shared<const PotentialSpec>(PotentialSpec::product_wells(*z));
  } else if (pk == "polynomial") {
    const auto coeffs = c.get_list("potential.coeffs");
    const auto z = c.get_points("potential.zeros");
    require(coeffs && z, "potential.kind = polynomial needs potential.coeffs and potential.zeros");
    e.potential = std::make_shared<const PotentialSpec>(PotentialSpec::custom_polynomial(*coeffs, *z));
  } else {
    throw ConfigError("unknown potential.kind '" + pk + "'");
  }
  const std::size_t m = e.potential->dimension();

  e.damping_kind = c.get_string("damping.kind", "identity");
  require(e.damping_kind == "identity" || e.damping_kind == "relaxation" || e.damping_kind == "constant",
          "damping.kind must be identity, relaxation or constant");
  if (e.damping_kind == "constant") {
    const auto rows = c.get_points("damping.matrix");
    require(rows && rows->size() == m, "damping.kind = constant needs an m x m damping.matrix");
    e.damping_matrix = Matrix(m, m);
    for (std::size_t i = 0; i < m; ++i) {
      require((*rows)[i].size() == m, "damping.matrix must be m x m");
      for (std::size_t j = 0; j < m; ++j) e.damping_matrix(i, j) = (*rows)[i][j];
    }
  }
  if (const auto box = c.get_points("damping.certify_box")) {
    require(box->size() == 2 && (*box)[0].size() == m && (*box)[1].size() == m,
            "damping.certify_box must be [[lower...], [upper...]]");
    e.certify_box = Box{(*box)[0], (*box)[1]};
  }
  e.certify_samples = c.get_size("damping.certify_samples", e.certify_samples);
  e.tau = c.get_double("model.tau", e.tau);
  require(e.tau > 0.0, "model.tau must be positive");

  e.a = c.get_double("domain.a", e.a);
  e.b = c.get_double("domain.b", e.b);
  require(e.b > e.a, "domain.b must exceed domain.a");
  e.jumps = c.get_string("layer.jumps", "");
  e.constant_well = c.get_size("layer.constant_well", 0);
  e.r = c.get_double("layer.r", e.r);
  e.eps_list = c.get_list("layer.eps").value_or(Vec{0.05});
  require(!e.eps_list.empty(), "layer.eps must not be empty");
  for (std::size_t i = 0; i < e.eps_list.size(); ++i) {
    require(e.eps_list[i] > 0.0, "layer.eps entries must be positive");
    require(i == 0 || e.eps_list[i] < e.eps_list[i - 1], "layer.eps must be strictly decreasing");
  }

  e.velocity = parse_velocity_kind(c.get_string("velocity.kind", "zero"));
  e.velocity_A = c.get_double("velocity.A", e.velocity_A);
  e.velocity_C = c.get_double("velocity.C", e.velocity_C);

  e.dx_over_eps = c.get_double("solver.dx_over_eps", e.dx_over_eps);
  require(e.dx_over_eps >= 10.0, "solver.dx_over_eps must be at least 10 (dx <= eps/10)");
  e.cells = c.get_size("solver.cells", e.cells);
  e.cfl = c.get_double("solver.cfl", e.cfl);
  require(e.cfl > 0.0 && e.cfl <= 1.0, "solver.cfl must lie in (0, 1]");
  if (c.has("solver.t_end")) {
    e.t_end = c.get_double("solver.t_end", 0.0);
    require(*e.t_end >= 0.0, "solver.t_end must be nonnegative");
  }
  e.snapshot_stride = c.get_size("solver.snapshot_stride", 0);

  e.horizon_multiplier = c.get_double("experiment.horizon_multiplier", e.horizon_multiplier);
  require(e.horizon_multiplier > 0.0, "experiment.horizon_multiplier must be positive");
  e.wall_budget = c.get_double("experiment.wall_budget", e.wall_budget);
  e.window_begin = c.get_double("experiment.window_begin", e.window_begin);
  e.window_end = c.get_double("experiment.window_end", e.window_end);
  require(e.window_end > e.window_begin, "experiment.window_end must exceed window_begin");
  e.stop_on_exit = c.get_bool("experiment.stop_on_exit", e.stop_on_exit);
  e.concurrent = c.get_bool("experiment.concurrent", e.concurrent);

  e.delta1 = c.get_double("interface.delta1", e.delta1);
  e.rho_d = c.get_double("interface.rho_d", e.rho_d);
  e.path_options.nodes = c.get_size("geodesic.nodes", e.path_options.nodes);
  e.path_options.max_sweeps = c.get_size("geodesic.max_sweeps", e.path_options.max_sweeps);
  e.path_options.tol_path = c.get_double("geodesic.tol_path", e.path_options.tol_path);
  e.output_dir = c.get_string("output.dir", e.output_dir);
  e.seed = c.get_u64("seed", e.seed);

  const StepFunction v = e.step_function();
  v.validate(*e.potential);
  DSetSpec{e.rho_d}.validate(*e.potential);
  if (v.jump_count() > 0) {
    require(e.delta1 > 0.0 && e.delta1 < e.r, "interface.delta1 must lie in (0, r)");
    require(e.eps_list.front() < e.r, "every eps must be smaller than layer.r");
  }
  if (e.cells > 0)
    require((e.b - e.a) / static_cast<double>(e.cells) <= e.eps_list.back() / 10.0 * (1.0 + 1e-12),
            "solver.cells too small: dx must not exceed eps/10 for the smallest eps");
  (void)e.make_damping();
  return e;
}

DampingSpec ExperimentConfig::make_damping() const {
  const std::size_t m = potential->dimension();
  if (damping_kind == "relaxation") return relaxation_preset(potential, tau);
  if (damping_kind == "constant") return DampingSpec::constant(damping_matrix);
  return DampingSpec::identity(m);
}

StepFunction ExperimentConfig::step_function() const { return StepFunction::parse(jumps, a, b, r, constant_well); }

double ExperimentConfig::A_ref() const { return r * std::sqrt(2.0 * spectral_bounds(*potential).lambda); }

double ExperimentConfig::t_end_for(double eps) const {
  if (t_end) return *t_end;
  return horizon_multiplier * std::exp(A_ref() / eps);
}

bool ExperimentResult::invariants_ok() const {
  for (const auto& r : rows)
    if (r.invariants_ok == 0.0) return false;
  return true;
}

namespace {

/// Mean front displacement per unit time between the rows nearest T/2 and T. Returns a reason
/// when the speed is left undefined.
std::optional<std::string> measure_drift(const RunRecord& rec, double T, ResultRow& row) {
  const auto& rows = rec.ledger.rows;
  if (rows.size() < 2 || !(T > 0.0)) return "drift undefined: fewer than two rows before T";
  std::size_t i1 = 0;
  for (std::size_t k = 0; k < rows.size(); ++k)
    if (rows[k].t <= T) i1 = k;
  std::size_t i0 = 0;
  for (std::size_t k = 0; k <= i1; ++k)
    if (std::abs(rows[k].t - 0.5 * T) < std::abs(rows[i0].t - 0.5 * T)) i0 = k;
  if (i0 >= i1) return "drift undefined: T/2 and T fall on the same row";
  const Vec& f0 = rec.fronts[i0];
  const Vec& f1 = rec.fronts[i1];
  if (f0.empty() || f0.size() != f1.size()) return "drift undefined: front count changed between T/2 and T";
  double disp = 0.0;
  for (std::size_t k = 0; k < f0.size(); ++k) disp += std::abs(f1[k] - f0[k]);
  row.drift_t0 = rows[i0].t;
  row.drift_t1 = rows[i1].t;
  row.drift_speed = disp / static_cast<double>(f0.size()) / (rows[i1].t - rows[i0].t);
  return std::nullopt;
}

}  // namespace

ResultRow run_single(const ExperimentConfig& cfg, double eps, const MetricTable& table, std::optional<double> alpha,
                     RunRecord* record) {
  ResultRow row;
  row.eps = eps;
  row.A_ref = cfg.A_ref();
  row.horizon_multiplier = cfg.horizon_multiplier;
  row.rho_d = cfg.rho_d;
  row.delta1 = cfg.delta1;
  row.alpha = alpha.value_or(std::numeric_limits<double>::quiet_NaN());
  RunRecord local;
  RunRecord& rec = record ? *record : local;
  try {
    const PotentialSpec& pot = *cfg.potential;
    const StepFunction v = cfg.step_function();
    rec.grid = cfg.cells > 0 ? Grid1D(cfg.a, cfg.b, cfg.cells) : Grid1D::with_max_spacing(cfg.a, cfg.b, eps / cfg.dx_over_eps);
    if (rec.grid.dx() > eps / 10.0 * (1.0 + 1e-12)) throw ConfigError("solver.cells too small: dx must not exceed eps/10");
    const Grid1D& grid = rec.grid;
    row.dx = grid.dx();
    row.cells = static_cast<double>(grid.size());

    const InitialDatum datum = build_initial_datum(pot, v, eps, table);
    row.P0 = asymptotic_energy_P0(pot, v, table);
    // For m >= 2 P0 is a path action computed by quadrature.
    const double p0_fuzz = pot.dimension() > 1 ? 1e-7 * row.P0 : 0.0;
    const StructureReport sr = verify_transition_layer_structure(datum, grid, row.P0, 0.1, p0_fuzz);
    row.energy = sr.energy;
    row.energy_grid = sr.grid_energy;
    row.excess = sr.excess;
    row.l1_init = sr.l1_to_v;
    if (!sr.layer_structure) rec.warnings.push_back("initial datum does not look like a transition-layer profile");

    State s;
    s.eps = eps;
    s.tau = cfg.tau;
    s.u = datum.sample(grid);
    s.w = build_initial_velocity(cfg.velocity, eps, cfg.tau, cfg.velocity_A, cfg.velocity_C, grid, pot.dimension(),
                                 cfg.seed);
    rec.initial = s;

    RunOptions opt;
    opt.cfl = cfg.cfl;
    opt.dt = cfl_time_step(grid, eps, cfg.tau, cfg.cfl);
    opt.t_end = cfg.t_end_for(eps);
    opt.snapshot_stride = cfg.snapshot_stride;
    opt.reference = datum.sample_target(grid);
    opt.window_begin = cfg.window_begin;
    opt.window_end = cfg.window_end;
    opt.wall_budget = cfg.wall_budget;
    opt.certified_alpha = alpha;
    row.dt = opt.dt;
    row.t_end_target = opt.t_end;

    const DampingSpec damping = cfg.make_damping();
    const DSetSpec D{cfg.rho_d};
    std::optional<ExitTimeDetector> detector;
    if (v.jump_count() > 0) detector.emplace(grid, pot, D, cfg.delta1, s.u, cfg.r);

    rec.fronts.clear();
    auto hook = [&](const State& st, LedgerRow& lr) {
      Vec fr;
      if (detector) {
        detector->observe(st.t, st.u, &lr);
        for (const auto& c : interface_clusters(grid, st.u, pot, D)) fr.push_back(c.front);
      }
      rec.fronts.push_back(std::move(fr));
      if (cfg.stop_on_exit && detector && detector->exited() && st.t >= cfg.window_end) return false;
      return true;
    };

    const RunSummary sum = run(grid, s, pot, damping, opt, hook);
    rec.ledger = sum.ledger;
    rec.final_state = sum.final_state;
    rec.warnings.insert(rec.warnings.end(), sum.warnings.begin(), sum.warnings.end());

    const auto& rows = sum.ledger.rows;
    const LedgerRow& first = rows.front();
    const LedgerRow& last = rows.back();
    row.steps = static_cast<double>(sum.steps);
    row.t_reached = last.t;
    row.wall_capped = sum.wall_capped ? 1.0 : 0.0;
    row.exit_resolution = static_cast<double>(sum.stride) * opt.dt;
    if (detector) {
      row.exited = detector->exited() ? 1.0 : 0.0;
      if (detector->exited()) row.exit_time = *detector->exit_time();
      row.hausdorff_max = detector->max_distance();
      if (auto why = measure_drift(rec, detector->exited() ? row.exit_time : last.t, row)) rec.warnings.push_back(*why);
    }
    row.residual = std::abs(last.D_cum - first.D_cum - (first.E - last.E));
    row.ut_budget = sum.window_ut_l2sq;
    row.window_complete = last.t >= cfg.window_end ? 1.0 : 0.0;
    row.ut_l2sq_total = last.ut_l2sq_cum;
    row.ut_l1_total = last.ut_l1_cum;
    row.min_damping_eig = std::numeric_limits<double>::infinity();
    for (const auto& lr : rows) {
      const double inc = lr.l1_to_v - first.l1_to_v;
      row.l1_sup_increase = std::max(row.l1_sup_increase, inc);
      if (lr.t <= cfg.window_end) row.l1_sup_increase_window = std::max(row.l1_sup_increase_window, inc);
      row.min_damping_eig = std::min(row.min_damping_eig, lr.min_damping_eig);
    }
    row.l1_bound_violations = static_cast<double>(sum.l1_bound_violations);
    row.monotone_violations = static_cast<double>(sum.monotonicity_violations);
    row.worst_relative_increase = sum.steps > 0 ? sum.worst_relative_increase : 0.0;
    row.young_violations = static_cast<double>(sum.young_violations);
    row.young_faces = static_cast<double>(sum.young_faces_checked);
    if (alpha) row.dissipative_gap = *alpha / eps * last.ut_l2sq_cum - (first.E - last.E) - row.residual;
    row.invariants_ok = sum.invariants_ok() ? 1.0 : 0.0;
    if (!rec.warnings.empty()) row.status = "ok; " + join(rec.warnings, "; ");
  } catch (const Error& e) {
    row.status = std::string("error: ") + e.what();
    row.invariants_ok = 0.0;
  }
  return row;
}

void apply_common_window(ExperimentResult& res) {
  double tc = std::numeric_limits<double>::infinity();
  for (const auto& r : res.rows) {
    if (r.status.rfind("error", 0) == 0) continue;
    tc = std::min(tc, r.exited != 0.0 ? r.exit_time : r.t_reached);
  }
  if (!std::isfinite(tc)) return;
  for (std::size_t i = 0; i < res.rows.size(); ++i) {
    const auto& rows = res.records[i].ledger.rows;
    if (rows.empty() || res.rows[i].status.rfind("error", 0) == 0) continue;
    double sup = 0.0;
    for (const auto& lr : rows)
      if (lr.t <= tc) sup = std::max(sup, lr.l1_to_v - rows.front().l1_to_v);
    res.rows[i].l1_common_window = tc;
    res.rows[i].l1_sup_increase_common = sup;
  }
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  ExperimentResult res;
  res.table = build_metric_table(*cfg.potential, cfg.path_options, cfg.concurrent);
  res.warnings = res.table.warnings;
  std::optional<double> alpha;
  if (cfg.damping_kind == "identity") {
    alpha = 1.0;
  } else {
    const DampingSpec d = cfg.make_damping();
    const Box box = cfg.certify_box.value_or(default_certification_box(*cfg.potential));
    res.certificate = certify_positivity(d, box, cfg.certify_samples);
    alpha = res.certificate->alpha;
  }
  const std::size_t n = cfg.eps_list.size();
  res.rows.resize(n);
  res.records.resize(n);
  if (cfg.concurrent && n > 1) {
    std::vector<std::future<ResultRow>> jobs;
    for (std::size_t i = 0; i < n; ++i)
      jobs.push_back(std::async(std::launch::async, [&, i] {
        return run_single(cfg, cfg.eps_list[i], res.table, alpha, &res.records[i]);
      }));
    for (std::size_t i = 0; i < n; ++i) res.rows[i] = jobs[i].get();
  } else {
    for (std::size_t i = 0; i < n; ++i) res.rows[i] = run_single(cfg, cfg.eps_list[i], res.table, alpha, &res.records[i]);
  }
  apply_common_window(res);
  return res;
}

std::string to_string(QuantityKind kind) {
  switch (kind) {
    case QuantityKind::exit_time: return "exit_time";
    case QuantityKind::drift_speed: return "drift_speed";
    case QuantityKind::energy_excess: return "energy_excess";
    case QuantityKind::ut_budget: return "ut_budget";
  }
  return "?";
}

QuantityKind parse_quantity_kind(const std::string& text) {
  for (auto k : {QuantityKind::exit_time, QuantityKind::drift_speed, QuantityKind::energy_excess, QuantityKind::ut_budget})
    if (to_string(k) == text) return k;
  throw ConfigError("unknown quantity kind '" + text + "'");
}

double quantity(const ResultRow& row, QuantityKind kind) {
  switch (kind) {
    case QuantityKind::exit_time: return row.exited != 0.0 ? row.exit_time : std::numeric_limits<double>::quiet_NaN();
    case QuantityKind::drift_speed: return row.drift_speed;
    case QuantityKind::energy_excess: return row.excess;
    case QuantityKind::ut_budget: return row.ut_budget;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

FitReport fit_log_linear(const Vec& eps, const Vec& q, QuantityKind kind) {
  if (eps.size() != q.size()) throw ConfigError("fit: eps and quantity lengths differ");
  FitReport rep;
  rep.kind = kind;
  Vec xs, ys;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(q[i] > 0.0) || !std::isfinite(q[i]) || !(eps[i] > 0.0)) {
      std::ostringstream os;
      os << "row eps = " << eps[i] << " excluded (quantity " << q[i] << ")";
      rep.warnings.push_back(os.str());
      continue;
    }
    xs.push_back(1.0 / eps[i]);
    ys.push_back(std::log(q[i]));
  }
  rep.used = xs.size();
  if (xs.size() < 3) throw InsufficientDataError("fit needs at least 3 usable rows, got " + std::to_string(xs.size()));
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw InsufficientDataError("fit needs at least two distinct eps values");
  rep.slope = sxy / sxx;
  rep.intercept = my - rep.slope * mx;
  rep.r2 = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
  rep.A_hat = std::abs(rep.slope);
  return rep;
}

FitReport fit_rate(const std::vector<ResultRow>& rows, QuantityKind kind) {
  Vec eps, q;
  std::vector<std::string> skipped;
  for (const auto& r : rows) {
    if (r.status.rfind("error", 0) == 0) {
      skipped.push_back("row eps = " + format_double(r.eps) + " excluded (" + r.status + ")");
      continue;
    }
    eps.push_back(r.eps);
    q.push_back(quantity(r, kind));
  }
  FitReport rep = fit_log_linear(eps, q, kind);
  rep.warnings.insert(rep.warnings.begin(), skipped.begin(), skipped.end());
  return rep;
}

namespace {

struct Column {
  const char* name;
  double ResultRow::*field;
};

const std::vector<Column>& numeric_columns() {
  static const std::vector<Column> cols = {
      {"eps", &ResultRow::eps},
      {"dx", &ResultRow::dx},
      {"dt", &ResultRow::dt},
      {"cells", &ResultRow::cells},
      {"steps", &ResultRow::steps},
      {"t_end_target", &ResultRow::t_end_target},
      {"t_reached", &ResultRow::t_reached},
      {"wall_capped", &ResultRow::wall_capped},
      {"P0", &ResultRow::P0},
      {"energy", &ResultRow::energy},
      {"energy_grid", &ResultRow::energy_grid},
      {"excess", &ResultRow::excess},
      {"l1_init", &ResultRow::l1_init},
      {"exited", &ResultRow::exited},
      {"exit_time", &ResultRow::exit_time},
      {"exit_resolution", &ResultRow::exit_resolution},
      {"hausdorff_max", &ResultRow::hausdorff_max},
      {"drift_speed", &ResultRow::drift_speed},
      {"drift_t0", &ResultRow::drift_t0},
      {"drift_t1", &ResultRow::drift_t1},
      {"residual", &ResultRow::residual},
      {"ut_budget", &ResultRow::ut_budget},
      {"window_complete", &ResultRow::window_complete},
      {"ut_l2sq_total", &ResultRow::ut_l2sq_total},
      {"ut_l1_total", &ResultRow::ut_l1_total},
      {"l1_sup_increase", &ResultRow::l1_sup_increase},
      {"l1_sup_increase_window", &ResultRow::l1_sup_increase_window},
      {"l1_common_window", &ResultRow::l1_common_window},
      {"l1_sup_increase_common", &ResultRow::l1_sup_increase_common},
      {"l1_bound_violations", &ResultRow::l1_bound_violations},
      {"monotone_violations", &ResultRow::monotone_violations},
      {"worst_relative_increase", &ResultRow::worst_relative_increase},
      {"young_violations", &ResultRow::young_violations},
      {"young_faces", &ResultRow::young_faces},
      {"min_damping_eig", &ResultRow::min_damping_eig},
      {"alpha", &ResultRow::alpha},
      {"dissipative_gap", &ResultRow::dissipative_gap},
      {"invariants_ok", &ResultRow::invariants_ok},
      {"A_ref", &ResultRow::A_ref},
      {"horizon_multiplier", &ResultRow::horizon_multiplier},
      {"rho_d", &ResultRow::rho_d},
      {"delta1", &ResultRow::delta1},
  };
  return cols;
}

}  // namespace

CsvTable rows_to_csv(const std::vector<ResultRow>& rows) {
  CsvTable t;
  for (const auto& c : numeric_columns()) t.header.emplace_back(c.name);
  t.header.emplace_back("status");
  for (const auto& r : rows) {
    std::vector<std::string> rec;
    for (const auto& c : numeric_columns()) rec.push_back(format_double(r.*(c.field)));
    rec.push_back(r.status);
    t.rows.push_back(std::move(rec));
  }
  return t;
}

std::vector<ResultRow> rows_from_csv(const CsvTable& t) {
  std::vector<std::size_t> idx;
  for (const auto& c : numeric_columns()) idx.push_back(t.column(c.name));
  const std::size_t status = t.column("status");
  std::vector<ResultRow> out;
  for (const auto& rec : t.rows) {
    ResultRow r;
    const auto& cols = numeric_columns();
    for (std::size_t k = 0; k < cols.size(); ++k) r.*(cols[k].field) = parse_double(rec[idx[k]]);
    r.status = rec[status];
    out.push_back(std::move(r));
  }
  return out;
}

CsvTable ledger_to_csv(const EnergyLedger& ledger, const std::vector<Vec>& fronts) {
  CsvTable t;
  t.header = {"t", "E", "P", "kinetic", "D_cum", "ut_l1_cum", "ut_l2sq_cum", "L1_dist_to_v", "min_damping_eig",
              "iface_count", "iface_min", "iface_max", "iface_hausdorff_to_init", "fronts"};
  for (std::size_t i = 0; i < ledger.rows.size(); ++i) {
    const LedgerRow& r = ledger.rows[i];
    std::string fr;
    if (i < fronts.size())
      for (std::size_t k = 0; k < fronts[i].size(); ++k) fr += (k ? ";" : "") + format_double(fronts[i][k]);
    t.rows.push_back({format_double(r.t), format_double(r.E), format_double(r.P), format_double(r.kinetic),
                      format_double(r.D_cum), format_double(r.ut_l1_cum), format_double(r.ut_l2sq_cum),
                      format_double(r.l1_to_v), format_double(r.min_damping_eig), format_double(r.iface_count),
                      format_double(r.iface_min), format_double(r.iface_max), format_double(r.iface_hausdorff_to_init),
                      fr});
  }
  return t;
}

CsvTable snapshot_to_csv(const Grid1D& grid, const State& s) {
  CsvTable t;
  const std::size_t m = s.u.components();
  t.header.emplace_back("x");
  for (std::size_t k = 0; k < m; ++k) t.header.push_back("u_" + std::to_string(k + 1));
  for (std::size_t k = 0; k < m; ++k) t.header.push_back("ut_" + std::to_string(k + 1));
  for (std::size_t i = 0; i < s.u.cells(); ++i) {
    std::vector<std::string> rec{format_double(grid.x(i))};
    for (std::size_t k = 0; k < m; ++k) rec.push_back(format_double(s.u(i, k)));
    for (std::size_t k = 0; k < m; ++k) rec.push_back(format_double(s.w(i, k)));
    t.rows.push_back(std::move(rec));
  }
  return t;
}

CsvTable fit_to_csv(const std::vector<FitReport>& fits) {
  CsvTable t;
  t.header = {"quantity", "slope", "intercept", "r2", "A_hat", "used", "warnings"};
  for (const auto& f : fits)
    t.rows.push_back({to_string(f.kind), format_double(f.slope), format_double(f.intercept), format_double(f.r2),
                      format_double(f.A_hat), std::to_string(f.used), join(f.warnings, "; ")});
  return t;
}

std::string resolve_output_dir(const std::string& configured) {
  const char* root = std::getenv("METASTAB_OUTPUT_ROOT");
  const std::filesystem::path p(configured);
  if (root && *root && p.is_relative()) return (std::filesystem::path(root) / p).string();
  return configured;
}

void persist(const std::string& dir, const ExperimentResult& result, const ExperimentConfig& config) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
  const std::filesystem::path d(dir);
  const std::string cfg_text = config.source.source().empty() ? config.source.canonical() : config.source.source();
  write_file((d / "config.txt").string(), cfg_text);
  const std::string rows = to_csv(rows_to_csv(result.rows));
  write_file((d / "rows.csv").string(), rows);
  for (std::size_t i = 0; i < result.records.size(); ++i) {
    const RunRecord& rec = result.records[i];
    const std::string k = std::to_string(i);
    write_file((d / ("ledger_" + k + ".csv")).string(), to_csv(ledger_to_csv(rec.ledger, rec.fronts)));
    if (rec.initial.u.cells() == rec.grid.size()) {
      write_file((d / ("initial_" + k + ".csv")).string(), to_csv(snapshot_to_csv(rec.grid, rec.initial)));
    }
    if (rec.final_state.u.cells() == rec.grid.size()) {
      write_file((d / ("final_" + k + ".csv")).string(), to_csv(snapshot_to_csv(rec.grid, rec.final_state)));
    }
  }
  std::ostringstream m;
  m << "config_hash=" << Config::parse(cfg_text).hash() << "\n";
  m << "rows_hash=" << fnv1a_hex(rows) << "\n";
  m << "rows=" << result.rows.size() << "\n";
  m << "horizon_multiplier=" << format_double(config.horizon_multiplier) << "\n";
  m << "rho_d=" << format_double(config.rho_d) << "\n";
  m << "delta1=" << format_double(config.delta1) << "\n";
  m << "seed=" << config.seed << "\n";
  m << "A_ref=" << format_double(config.A_ref()) << "\n";
  m << "invariants_ok=" << (result.invariants_ok() ? 1 : 0) << "\n";
  write_file((d / "manifest.txt").string(), m.str());
}

std::vector<ResultRow> load_rows(const std::string& dir) {
  const std::filesystem::path d(dir);
  const Config manifest = Config::parse(read_file((d / "manifest.txt").string()));
  const std::string rows = read_file((d / "rows.csv").string());
  if (fnv1a_hex(rows) != manifest.require_string("rows_hash")) throw CorruptionError("rows.csv does not match its hash");
  const std::string cfg = read_file((d / "config.txt").string());
  if (Config::parse(cfg).hash() != manifest.require_string("config_hash"))
    throw CorruptionError("config.txt does not match its hash");
  return rows_from_csv(parse_csv(rows));
}

}  // namespace metastab
