// metastab command-line driver.
//
// Exit codes: 0 success, 1 an invariant check failed, 2 bad usage or configuration, 3 runtime error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "metastab/config.hpp"
#include "metastab/csv.hpp"
#include "metastab/damping.hpp"
#include "metastab/errors.hpp"
#include "metastab/geodesic.hpp"
#include "metastab/harness.hpp"
#include "metastab/layer_profile.hpp"
#include "metastab/potential.hpp"

using namespace metastab;

namespace {

constexpr int kOk = 0;
constexpr int kInvariantFailed = 1;
constexpr int kUsage = 2;
constexpr int kRuntime = 3;

struct Overrides {
  std::optional<double> delta1;
  std::optional<double> rho_d;
  std::optional<double> eps;
  std::optional<std::string> out;
};

Config load_config(const std::string& path) { return path.empty() ? Config{} : Config::load(path); }

ExperimentConfig experiment(const std::string& path, const Overrides& o, bool single = false) {
  Config c = load_config(path);
  if (single && !o.eps) {
    const auto list = c.get_list("layer.eps");
    if (list && list->size() > 1) c.set("layer.eps", "[" + format_double(list->front()) + "]");
  }
  if (o.delta1) c.set("interface.delta1", format_double(*o.delta1));
  if (o.rho_d) c.set("interface.rho_d", format_double(*o.rho_d));
  if (o.eps) c.set("layer.eps", "[" + format_double(*o.eps) + "]");
  if (o.out) c.set("output.dir", *o.out);
  return ExperimentConfig::from_config(c);
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    write_file(out, text);
  }
}

void print_rows(const std::vector<ResultRow>& rows) {
  std::fprintf(stderr, "%8s %10s %10s %12s %12s %12s %6s  %s\n", "eps", "t_reached", "exit", "drift", "ut_budget", "excess",
               "ok", "status");
  for (const auto& r : rows)
    std::fprintf(stderr, "%8.4g %10.4g %10.4g %12.4e %12.4e %12.4e %6s  %s\n", r.eps, r.t_reached,
                 r.exited > 0 ? r.exit_time : std::numeric_limits<double>::quiet_NaN(), r.drift_speed, r.ut_budget,
                 r.excess, r.invariants_ok > 0 ? "yes" : "no", r.status.c_str());
}

int run_and_persist(const ExperimentConfig& cfg) {
  const ExperimentResult res = run_experiment(cfg);
  const std::string dir = resolve_output_dir(cfg.output_dir);
  persist(dir, res, cfg);
  print_rows(res.rows);
  for (const auto& w : res.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  std::fprintf(stderr, "wrote %s\n", dir.c_str());
  return res.invariants_ok() ? kOk : kInvariantFailed;
}

int cmd_validate(const std::string& path) {
  const ExperimentConfig cfg = experiment(path, {});
  const auto report = validate(*cfg.potential);
  std::printf("config_hash=%s\n", cfg.source.hash().c_str());
  std::printf("potential=%s wells=%zu dimension=%zu\n", cfg.potential->name().c_str(), cfg.potential->well_count(),
              cfg.potential->dimension());
  std::printf("A_ref=%s horizon_multiplier=%s\n", format_double(cfg.A_ref()).c_str(),
              format_double(cfg.horizon_multiplier).c_str());
  for (double e : cfg.eps_list) std::printf("eps=%s t_end=%s\n", format_double(e).c_str(), format_double(cfg.t_end_for(e)).c_str());
  std::printf("potential_checks=%s\n", report.pass ? "pass" : "fail");
  if (cfg.damping_kind != "identity") {
    const Box box = cfg.certify_box.value_or(default_certification_box(*cfg.potential));
    const auto cert = certify_positivity(cfg.make_damping(), box, cfg.certify_samples);
    std::printf("damping=%s alpha=%s\n", cfg.damping_kind.c_str(), format_double(cert.alpha).c_str());
  }
  for (const auto& f : report.failures) std::fprintf(stderr, "potential check failed: %s\n", f.c_str());
  return report.pass ? kOk : kInvariantFailed;
}

int cmd_geodesic_phi(const std::string& path, std::size_t from, std::size_t to, const std::string& out) {
  const ExperimentConfig cfg = experiment(path, {});
  const PathResult r = optimal_path(*cfg.potential, from, to, cfg.path_options);
  CsvTable t;
  t.header.push_back("s");
  for (std::size_t k = 0; k < cfg.potential->dimension(); ++k) t.header.push_back("u_" + std::to_string(k + 1));
  const auto& nodes = r.path.nodes();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    std::vector<std::string> row{format_double(static_cast<double>(i) / static_cast<double>(nodes.size() - 1))};
    for (double x : nodes[i]) row.push_back(format_double(x));
    t.rows.push_back(std::move(row));
  }
  emit(to_csv(t), out);
  std::fprintf(stderr, "phi(%zu, %zu) = %s (converged %s, %zu sweeps)\n", from, to, format_double(r.action).c_str(),
               r.converged ? "yes" : "no", r.sweeps);
  for (const auto& w : r.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  return r.converged ? kOk : kInvariantFailed;
}

int cmd_geodesic_table(const std::string& path, const std::string& out) {
  const ExperimentConfig cfg = experiment(path, {});
  const MetricTable table = build_metric_table(*cfg.potential, cfg.path_options);
  const std::size_t K = table.size();
  CsvTable t;
  t.header.push_back("well");
  for (std::size_t j = 0; j < K; ++j) t.header.push_back("phi_" + std::to_string(j));
  for (std::size_t i = 0; i < K; ++i) {
    std::vector<std::string> row{std::to_string(i)};
    for (std::size_t j = 0; j < K; ++j) row.push_back(format_double(table(i, j)));
    t.rows.push_back(std::move(row));
  }
  emit(to_csv(t), out);
  const auto axioms = check_metric_axioms(table);
  for (const auto& w : table.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  if (!axioms.pass) std::fprintf(stderr, "metric axioms violated: asymmetry %g, triangle excess %g\n", axioms.max_asymmetry,
                                 axioms.max_triangle_excess);
  return axioms.pass ? kOk : kInvariantFailed;
}

int cmd_initdata(const std::string& path, double eps, const std::string& jumps, double r, const std::string& out) {
  Config c = load_config(path);
  c.set("layer.jumps", jumps);
  c.set("layer.r", format_double(r));
  c.set("layer.eps", "[" + format_double(eps) + "]");
  const ExperimentConfig cfg = ExperimentConfig::from_config(c);
  const MetricTable table = build_metric_table(*cfg.potential, cfg.path_options);
  const StepFunction v = cfg.step_function();
  const InitialDatum d = build_initial_datum(*cfg.potential, v, eps, table);
  const Grid1D grid = cfg.cells > 0 ? Grid1D(cfg.a, cfg.b, cfg.cells) : Grid1D::with_max_spacing(cfg.a, cfg.b, eps / cfg.dx_over_eps);
  State s;
  s.eps = eps;
  s.tau = cfg.tau;
  s.u = d.sample(grid);
  s.w = build_initial_velocity(cfg.velocity, eps, cfg.tau, cfg.velocity_A, cfg.velocity_C, grid,
                               cfg.potential->dimension(), cfg.seed);
  emit(to_csv(snapshot_to_csv(grid, s)), out);
  const auto rep = verify_transition_layer_structure(d, grid, asymptotic_energy_P0(*cfg.potential, v, table));
  std::fprintf(stderr, "P_eps = %s, excess = %s, L1 to v = %s, layer structure %s\n", format_double(rep.energy).c_str(),
               format_double(rep.excess).c_str(), format_double(rep.l1_to_v).c_str(), rep.layer_structure ? "yes" : "no");
  return rep.layer_structure ? kOk : kInvariantFailed;
}

int cmd_fit(const std::string& dir, const std::vector<std::string>& quantities, const std::string& out) {
  const std::vector<ResultRow> rows = load_rows(dir);
  std::vector<FitReport> fits;
  bool ok = true;
  for (const auto& q : quantities) {
    const QuantityKind kind = parse_quantity_kind(q);
    try {
      fits.push_back(fit_rate(rows, kind));
      for (const auto& w : fits.back().warnings) std::fprintf(stderr, "warning (%s): %s\n", q.c_str(), w.c_str());
    } catch (const InsufficientDataError& e) {
      std::fprintf(stderr, "%s: %s\n", q.c_str(), e.what());
      ok = false;
    }
  }
  const std::string text = to_csv(fit_to_csv(fits));
  emit(text, out.empty() ? (std::filesystem::path(dir) / "fits.csv").string() : out);
  if (out.empty()) std::cout << text;
  return ok ? kOk : kInvariantFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Metastable transition-layer dynamics: geodesics, layered data, damped-wave simulation and sweeps"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides ov;
  std::string out;

  auto* validate_cmd = app.add_subcommand("validate", "Check a config file and print derived settings");
  validate_cmd->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);

  auto* geodesic = app.add_subcommand("geodesic", "Metric between wells");
  geodesic->require_subcommand(1);
  std::size_t from = 0, to = 1;
  auto* phi_cmd = geodesic->add_subcommand("phi", "Optimal path between two wells as CSV (s, u_1..u_m)");
  phi_cmd->add_option("--from", from, "Index of the first well")->required();
  phi_cmd->add_option("--to", to, "Index of the second well")->required();
  phi_cmd->add_option("--config", config_path, "Config file (potential keys)")->check(CLI::ExistingFile);
  phi_cmd->add_option("--out", out, "Output CSV (default stdout)");
  auto* table_cmd = geodesic->add_subcommand("table", "Metric table between all wells as CSV");
  table_cmd->add_option("--config", config_path, "Config file (potential keys)")->check(CLI::ExistingFile);
  table_cmd->add_option("--out", out, "Output CSV (default stdout)");

  auto* initdata = app.add_subcommand("initdata", "Layered initial data");
  initdata->require_subcommand(1);
  double eps = 0.05, r = 0.15;
  std::string jumps;
  auto* build_cmd = initdata->add_subcommand("build", "Sample the constructed datum as CSV (x, u_*, ut_*)");
  build_cmd->add_option("--eps", eps, "Layer width")->required();
  build_cmd->add_option("--jumps", jumps, "Jumps, e.g. \"0.3:0>1,0.7:1>0\"")->required();
  build_cmd->add_option("--r", r, "Ball radius around each jump")->required();
  build_cmd->add_option("--out", out, "Output CSV (default stdout)");
  build_cmd->add_option("--config", config_path, "Config file for potential, grid and velocity")->check(CLI::ExistingFile);

  auto* simulate_cmd = app.add_subcommand("simulate", "Run one eps and persist the results");
  auto* sweep_cmd = app.add_subcommand("sweep", "Run every eps of the config and persist the results");
  for (auto* sub : {simulate_cmd, sweep_cmd}) {
    sub->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--delta1", ov.delta1, "Exit threshold on the interface Hausdorff distance");
    sub->add_option("--rho-d", ov.rho_d, "Radius around the wells excluded from the interface set");
    sub->add_option("--out", ov.out, "Output directory (overrides output.dir)");
  }
  simulate_cmd->add_option("--eps", ov.eps, "Layer width (default: first entry of layer.eps)");

  auto* fit_cmd = app.add_subcommand("fit", "Log-linear fits against 1/eps from a persisted sweep");
  std::string dir;
  std::vector<std::string> quantities{"drift_speed", "exit_time", "ut_budget", "energy_excess"};
  fit_cmd->add_option("dir", dir, "Sweep output directory")->required()->check(CLI::ExistingDirectory);
  fit_cmd->add_option("--quantity", quantities, "Quantities to fit");
  fit_cmd->add_option("--out", out, "Output CSV (default <dir>/fits.csv and stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*validate_cmd) return cmd_validate(config_path);
    if (*phi_cmd) return cmd_geodesic_phi(config_path, from, to, out);
    if (*table_cmd) return cmd_geodesic_table(config_path, out);
    if (*build_cmd) return cmd_initdata(config_path, eps, jumps, r, out);
    if (*simulate_cmd) return run_and_persist(experiment(config_path, ov, true));
    if (*sweep_cmd) return run_and_persist(experiment(config_path, ov));
    if (*fit_cmd) return cmd_fit(dir, quantities, out);
  } catch (const CertificationError& e) {
    std::fprintf(stderr, "damping not certified: %s\n", e.what());
    return kInvariantFailed;
  } catch (const HypothesisViolationError& e) {
    std::fprintf(stderr, "hypothesis violated: %s\n", e.what());
    return kInvariantFailed;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kUsage;
  } catch (const DomainError& e) {
    std::fprintf(stderr, "domain error: %s\n", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRuntime;
  }
  return kUsage;
}
