#include <doctest.h>

#include <cmath>
#include <random>

#include "metastab/errors.hpp"
#include "metastab/layer_profile.hpp"
#include "metastab/solver.hpp"
#include "oracles.hpp"

using namespace metastab;

namespace {

const double kPi = std::acos(-1.0);

Field cosine(const Grid1D& g, std::size_t k, double amp = 1.0) {
  Field u(g.size(), 1);
  for (std::size_t i = 0; i < g.size(); ++i) u(i, 0) = amp * std::cos(static_cast<double>(k) * kPi * (g.x(i) - g.a()) / (g.b() - g.a()));
  return u;
}

/// F == 0 with all-zero gradient; two formal zeros so PotentialSpec accepts it.
PotentialSpec flat() {
  return PotentialSpec(
      "flat", 1, [](std::span<const double>) { return 0.0; }, {{-1.0}, {1.0}},
      [](std::span<const double>) { return Vec{0.0}; }, [](std::span<const double>) { return Matrix(1, 1); });
}

State two_layer_state(double eps, const Grid1D& g) {
  const auto q = PotentialSpec::quartic();
  const auto t = build_metric_table(q);
  const auto v = StepFunction::parse("0.35:0>1,0.65:1>0", 0.0, 1.0, 0.15);
  const auto d = build_initial_datum(q, v, eps, t);
  State s;
  s.eps = eps;
  s.tau = 1.0;
  s.u = d.sample(g);
  s.w = Field(g.size(), 1);
  return s;
}

}  // namespace

TEST_CASE("laplacian of a constant is zero") {
  const Grid1D g(0.0, 2.0, 64);
  const Field c(g.size(), 2, 3.7);
  const Field lap = laplacian_neumann(g, c);
  for (double x : lap.values()) CHECK(x == 0.0);
}

TEST_CASE("laplacian eigenfunctions") {
  double prev = 0.0;
  for (std::size_t n : {64u, 128u, 256u}) {
    const Grid1D g(-1.0, 2.0, n);
    const std::size_t k = 3;
    const Field u = cosine(g, k);
    const Field L = laplacian_neumann(g, u);
    const double disc = oracle::neumann_eigenvalue(k, g.dx(), 3.0);
    const double cont = -std::pow(k * kPi / 3.0, 2);
    double worst_disc = 0.0, worst_cont = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      worst_disc = std::max(worst_disc, std::abs(L(i, 0) - disc * u(i, 0)));
      worst_cont = std::max(worst_cont, std::abs(L(i, 0) - cont * u(i, 0)) / std::abs(cont));
    }
    CHECK(worst_disc <= 1e-9 * std::abs(disc));
    if (prev > 0.0) CHECK(prev / worst_cont == doctest::Approx(4.0).epsilon(0.02));
    prev = worst_cont;
  }
}

TEST_CASE("summation by parts") {
  const Grid1D g(0.0, 1.0, 97);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> N;
  Field u(g.size(), 2);
  for (double& x : u.values()) x = N(rng);
  const Field L = laplacian_neumann(g, u);
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t k = 0; k < 2; ++k) {
      lhs += L(i, k) * u(i, k) * g.dx();
      if (i + 1 < g.size()) rhs -= std::pow((u(i + 1, k) - u(i, k)) / g.dx(), 2) * g.dx();
    }
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("energies") {
  const auto q = PotentialSpec::quartic();
  const Grid1D g(0.0, 1.0, 200);
  State s;
  s.eps = 0.05;
  s.tau = 2.0;
  s.u = Field(g.size(), 1, 1.0);
  s.w = Field(g.size(), 1);
  CHECK(energy_P(g, s.u, s.eps, q) == 0.0);
  CHECK(energy_E(g, s, q) == 0.0);
  s.w = Field(g.size(), 1, 0.3);
  CHECK(energy_E(g, s, q) == doctest::Approx(2.0 / (2 * 0.05) * 0.09 * 1.0).epsilon(1e-12));

  const State layer = two_layer_state(0.05, g);
  const double all = energy_P(g, layer.u, 0.05, q);
  CHECK(energy_E(g, layer, q) == all);
  const double left = energy_P(g, layer.u, 0.05, q, 0.0, 0.5);
  const double right = energy_P(g, layer.u, 0.05, q, 0.5, 1.0);
  CHECK(left + right == doctest::Approx(all).epsilon(1e-14));
  CHECK(energy_P(g, layer.u, 0.05, q, CellRange{0, 37}) + energy_P(g, layer.u, 0.05, q, CellRange{37, 200}) ==
        doctest::Approx(all).epsilon(1e-14));
  CHECK_THROWS_AS(energy_P(g, layer.u, 0.05, q, 0.0, 0.5012), ConfigError);
}

TEST_CASE("single layer energy is close to the layer cost") {
  const auto q = PotentialSpec::quartic();
  const auto t = build_metric_table(q);
  const double c0 = oracle::quartic_c0();
  double prev = std::numeric_limits<double>::infinity();
  for (double eps : {0.05, 0.025}) {
    const auto v = StepFunction::parse("0.5:0>1", 0.0, 1.0, 0.2);
    const auto d = build_initial_datum(q, v, eps, t);
    const Grid1D g = Grid1D::with_max_spacing(0.0, 1.0, eps / 20);
    const double P = d.continuum_energy();
    CHECK(P >= c0);
    CHECK(P - c0 <= 1e-2);
    CHECK(P - c0 < prev);
    prev = P - c0;
    // Grid quadrature is second order in dx / eps.
    CHECK(std::abs(energy_P(g, d.sample(g), eps, q) - P) <= 0.5 * std::pow(g.dx() / eps, 2) * c0);
  }
}

TEST_CASE("discrete Young bound") {
  const auto q = PotentialSpec::quartic();
  const Grid1D g(0.0, 1.0, 300);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> N;
  for (int trial = 0; trial < 50; ++trial) {
    Field u(g.size(), 1);
    for (double& x : u.values()) x = 1.5 * N(rng);
    const auto rep = young_bound(g, u, 0.03, q);
    CHECK(rep.violations == 0);
    CHECK(rep.energy == doctest::Approx(energy_P(g, u, 0.03, q)).epsilon(1e-12));
    CHECK(rep.energy >= rep.lower_bound);
  }
}

TEST_CASE("equilibria are fixed points") {
  const auto q = PotentialSpec::quartic();
  const Grid1D g(0.0, 1.0, 100);
  for (double z : {-1.0, 1.0}) {
    State s;
    s.eps = 0.05;
    s.tau = 1.0;
    s.u = Field(g.size(), 1, z);
    s.w = Field(g.size(), 1);
    const State before = s;
    for (int k = 0; k < 100; ++k) step(s, g, cfl_time_step(g, s.eps, s.tau), q, DampingSpec::identity(1));
    CHECK(s.u == before.u);
    CHECK(s.w == before.w);
  }
}

TEST_CASE("CFL and blow-up errors") {
  const auto q = PotentialSpec::quartic();
  const Grid1D g(0.0, 1.0, 100);
  State s;
  s.eps = 0.05;
  s.tau = 1.0;
  s.u = Field(g.size(), 1, 1.0);
  s.w = Field(g.size(), 1);
  const double dt = cfl_time_step(g, s.eps, s.tau);
  CHECK_THROWS_AS(step(s, g, 1.01 * dt, q, DampingSpec::identity(1)), ConfigError);
  CHECK_NOTHROW(step(s, g, 1.9 * dt, q, DampingSpec::identity(1), 1.0));
  s.u(3, 0) = 1e200;
  try {
    step(s, g, dt, q, DampingSpec::identity(1));
    FAIL("expected blow-up");
  } catch (const BlowUpError& e) {
    CHECK(e.last_good().u(3, 0) == 1e200);
  }
}

TEST_CASE("linear damped mode against the characteristic-root solution") {
  // tau u_tt + u_t = eps^2 u_xx on one cosine mode; the spatial operator is exact on the grid
  // eigenvalue, so only time error remains. Richardson: error ratio 4 under dt halving.
  const auto F0 = flat();
  const Grid1D g(0.0, 1.0, 64);
  const double eps = 0.05, tau = 0.5, T = 2.0;
  const double mu = -eps * eps * oracle::neumann_eigenvalue(2, g.dx(), 1.0);
  auto run_err = [&](double dt) {
    State s;
    s.eps = eps;
    s.tau = tau;
    s.u = cosine(g, 2);
    s.w = Field(g.size(), 1);
    const auto steps = static_cast<std::size_t>(std::llround(T / dt));
    for (std::size_t k = 0; k < steps; ++k) step(s, g, dt, F0, DampingSpec::identity(1), 1.0);
    const double exact = oracle::damped_mode(tau, mu, 1.0, 0.0, T);
    double worst = 0.0;
    const Field ref = cosine(g, 2, exact);
    for (std::size_t i = 0; i < g.size(); ++i) worst = std::max(worst, std::abs(s.u(i, 0) - ref(i, 0)));
    return worst;
  };
  const double e1 = run_err(0.02), e2 = run_err(0.01), e3 = run_err(0.005);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.1));
  CHECK(e2 / e3 == doctest::Approx(4.0).epsilon(0.1));
  CHECK(e3 < 1e-5);
}

TEST_CASE("run bookkeeping") {
  const auto q = PotentialSpec::quartic();
  const Grid1D g = Grid1D::with_max_spacing(0.0, 1.0, 0.05 / 20);
  const State s0 = two_layer_state(0.05, g);
  RunOptions opt;
  opt.dt = cfl_time_step(g, 0.05, 1.0);

  opt.t_end = 0.0;
  const RunSummary zero = run(g, s0, q, DampingSpec::identity(1), opt);
  CHECK(zero.ledger.rows.size() == 1);
  CHECK(zero.steps == 0);
  CHECK(zero.final_state.u == s0.u);

  opt.t_end = 5.0;
  const RunSummary first = run(g, s0, q, DampingSpec::identity(1), opt, [](const State&, LedgerRow&) { return false; });
  CHECK(first.ledger.rows.size() == 1);
  CHECK(first.stopped_by_hook);

  const RunSummary a = run(g, s0, q, DampingSpec::identity(1), opt);
  const RunSummary b = run(g, s0, q, DampingSpec::identity(1), opt);
  CHECK(a.final_state.u == b.final_state.u);
  REQUIRE(a.ledger.rows.size() == b.ledger.rows.size());
  for (std::size_t i = 0; i < a.ledger.rows.size(); ++i) {
    CHECK(a.ledger.rows[i].E == b.ledger.rows[i].E);
    CHECK(a.ledger.rows[i].D_cum == b.ledger.rows[i].D_cum);
  }
  CHECK(a.final_state.t == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(a.ledger.rows.back().t == a.final_state.t);
  CHECK(a.stride == std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(5.0 / (200 * opt.dt)))));
  CHECK(a.invariants_ok());

  opt.dt *= 2.5;
  CHECK_THROWS_AS(run(g, s0, q, DampingSpec::identity(1), opt), ConfigError);
}

TEST_CASE("dissipation residual of an equilibrium") {
  const auto q = PotentialSpec::quartic();
  const Grid1D g(0.0, 1.0, 64);
  State s;
  s.eps = 0.1;
  s.tau = 1.0;
  s.u = Field(g.size(), 1, -1.0);
  s.w = Field(g.size(), 1);
  RunOptions opt;
  opt.dt = cfl_time_step(g, s.eps, s.tau);
  opt.t_end = 3.0;
  const auto sum = run(g, s, q, DampingSpec::identity(1), opt);
  CHECK(dissipation_residual(sum.ledger, 0.0, 3.0) == 0.0);
}

TEST_CASE("long run at the CFL limit") {
  // Many small steps: t accumulates rounding far above ulp(dt).
  const auto q = PotentialSpec::quartic();
  const Grid1D g(0.0, 1.0, 16);
  State s;
  s.eps = 30.0;
  s.tau = 1.0;
  s.u = Field(g.size(), 1, 0.9);
  s.w = Field(g.size(), 1);
  RunOptions opt;
  opt.dt = cfl_time_step(g, s.eps, s.tau);
  opt.t_end = 100.0;
  const auto sum = run(g, s, q, DampingSpec::identity(1), opt);
  CHECK(sum.final_state.t == 100.0);
  CHECK(sum.steps == static_cast<std::size_t>(std::ceil(100.0 / opt.dt - 1e-9)));
}

TEST_CASE("relaxation damping run keeps the energy ledger") {
  const auto q = std::make_shared<const PotentialSpec>(PotentialSpec::quartic());
  const double eps = 0.06;
  const Grid1D g = Grid1D::with_max_spacing(0.0, 1.0, eps / 20);
  State s = two_layer_state(eps, g);
  s.tau = 0.1;
  RunOptions opt;
  opt.dt = cfl_time_step(g, eps, s.tau);
  opt.t_end = 5.0;
  opt.certified_alpha = 0.9;
  const auto sum = run(g, s, *q, relaxation_preset(q, 0.1), opt);
  CHECK(sum.invariants_ok());
  CHECK(sum.warnings.empty());
  for (const auto& r : sum.ledger.rows) CHECK(r.min_damping_eig >= 0.9 - 1e-8);
}
