#include <doctest.h>

#include <cmath>

#include "metastab/errors.hpp"
#include "metastab/geodesic.hpp"
#include "oracles.hpp"

using namespace metastab;

namespace {
const double kC0 = oracle::quartic_c0();
}

TEST_CASE("closed-form oracle agrees with 2 sqrt(2) / 3") {
  CHECK(kC0 == doctest::Approx(2.0 * std::sqrt(2.0) / 3.0).epsilon(1e-12));
}

TEST_CASE("action of simple paths") {
  const auto q = PotentialSpec::quartic();
  CHECK(action_J(q, PathPolyline(std::vector<Vec>{{0.3}, {0.3}, {0.3}})) == 0.0);
  double prev_err = 0.0;
  for (std::size_t P : {65u, 257u, 1025u}) {
    const double err = std::abs(action_J(q, PathPolyline::segment({-1.0}, {1.0}, P)) - kC0);
    if (prev_err > 0.0) CHECK(prev_err / err >= 10.0);
    prev_err = err;
  }
  CHECK(prev_err < 1e-6);
  // Additivity across a well.
  const auto whole = PathPolyline(std::vector<Vec>{{-1.0}, {0.0}, {1.0}, {0.0}, {-1.0}});
  const auto leg1 = PathPolyline(std::vector<Vec>{{-1.0}, {0.0}, {1.0}});
  const auto leg2 = PathPolyline(std::vector<Vec>{{1.0}, {0.0}, {-1.0}});
  CHECK(action_J(q, whole) == doctest::Approx(action_J(q, leg1) + action_J(q, leg2)).epsilon(1e-15));
}

TEST_CASE("scalar metric") {
  const auto q = PotentialSpec::quartic();
  CHECK(phi(q, {-1.0}, {1.0}) == doctest::Approx(kC0).epsilon(1e-10));
  CHECK(phi(q, {0.5}, {0.5}) == 0.0);
  CHECK(phi(q, {1.0}, {-1.0}) == doctest::Approx(kC0).epsilon(1e-10));
  // |int_{-2}^{2} sqrt(2 F)| crosses both wells.
  const double ref = oracle::simpson([](double s) { return std::sqrt(0.5) * std::abs(s * s - 1); }, -2.0, 2.0, 200000);
  CHECK(phi(q, {-2.0}, {2.0}) == doctest::Approx(ref).epsilon(1e-8));
}

TEST_CASE("string optimizer in one dimension") {
  const auto q = PotentialSpec::quartic();
  const PathResult r = optimize_path(q, {-1.0}, {1.0});
  CHECK(r.converged);
  CHECK(std::abs(r.action - kC0) <= 1e-3);
  CHECK(r.path.front()[0] == -1.0);
  CHECK(r.path.back()[0] == 1.0);
  CHECK(r.path.spacing_deviation() < 1e-8);
}

TEST_CASE("two-dimensional product wells against the lattice oracle") {
  const auto p = PotentialSpec::product_wells({{-1.0, 0.0}, {1.0, 0.0}});
  auto F = [&p](double x, double y) {
    const double u[2] = {x, y};
    return p.value_unchecked(u);
  };
  const PathResult r = optimal_path(p, 0, 1);
  const double lat = oracle::lattice_phi(F, -2.0, 2.0, 401, -1.0, 0.0, 1.0, 0.0);
  CHECK(std::abs(r.action - lat) / lat <= 0.02);
  CHECK(r.path.front() == p.zeros()[0]);
  CHECK(r.path.back() == p.zeros()[1]);

  // Exchange symmetry (x -> -x reverses the path).
  const auto& n = r.path.nodes();
  double worst = 0.0;
  for (std::size_t k = 0; k < n.size(); ++k) {
    const auto& a = n[k];
    const auto& b = n[n.size() - 1 - k];
    worst = std::max({worst, std::abs(a[0] + b[0]), std::abs(a[1] - b[1])});
  }
  CHECK(worst <= 1e-4);
}

TEST_CASE("metric table on three wells") {
  const auto p = PotentialSpec::product_wells({{-1.0, 0.0}, {1.0, 0.0}, {0.0, 1.5}});
  const MetricTable t = build_metric_table(p);
  const auto rep = check_metric_axioms(t);
  CHECK(rep.pass);
  CHECK(rep.max_diagonal == 0.0);
  CHECK(t.sigma_max > 0.0);
  const MetricTable seq = build_metric_table(p, {}, false);
  CHECK(seq.values == t.values);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      if (i != j) {
        REQUIRE(t.paths[i][j].has_value());
        CHECK(t.paths[i][j]->front() == p.zeros()[i]);
        CHECK(t.paths[i][j]->back() == p.zeros()[j]);
      }
}

TEST_CASE("asymptotic energy") {
  const auto q = PotentialSpec::quartic();
  const MetricTable t = build_metric_table(q);
  const auto v = StepFunction::parse("0.35:0>1,0.65:1>0", 0.0, 1.0, 0.15);
  CHECK(asymptotic_energy_P0(q, v, t) == doctest::Approx(2.0 * kC0).epsilon(1e-10));
  const auto flat = StepFunction::parse("", 0.0, 1.0, 0.15, 1);
  CHECK(asymptotic_energy_P0(q, flat, t) == 0.0);

  const auto p = PotentialSpec::product_wells({{-1.0, 0.0}, {1.0, 0.0}, {0.0, 1.5}});
  const MetricTable t3 = build_metric_table(p);
  const auto v3 = StepFunction::parse("0.3:0>1,0.7:1>2", 0.0, 1.0, 0.1);
  CHECK(asymptotic_energy_P0(p, v3, t3) == doctest::Approx(t3(0, 1) + t3(1, 2)).epsilon(1e-14));
  const auto bad = StepFunction::parse("0.3:0>5", 0.0, 1.0, 0.1);
  CHECK_THROWS_AS(asymptotic_energy_P0(p, bad, t3), DomainError);
}

TEST_CASE("path polyline utilities") {
  const auto p = PathPolyline(std::vector<Vec>{{0.0, 0.0}, {1.0, 0.0}, {1.0, 3.0}});
  CHECK(p.length() == doctest::Approx(4.0));
  const auto r = p.reparametrized(9);
  CHECK(r.node_count() == 9);
  CHECK(r.spacing_deviation() < 1e-8);
  CHECK(r.at(0.25)[0] == doctest::Approx(1.0));
  CHECK(r.at(0.25)[1] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(p.reversed().front() == p.back());
  const auto s = p.with_interval(-1.0, 1.0);
  CHECK(s.sigma() == doctest::Approx(2.0));
}
