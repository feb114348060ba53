#include <doctest.h>

#include <cmath>
#include <random>

#include "metastab/errors.hpp"
#include "metastab/linalg.hpp"
#include "metastab/potential.hpp"

using namespace metastab;

TEST_CASE("quartic values and reaction") {
  const auto q = PotentialSpec::quartic();
  CHECK(eval_potential(q, Vec{-1.0}) == 0.0);
  CHECK(eval_potential(q, Vec{1.0}) == 0.0);
  CHECK(eval_potential(q, Vec{0.0}) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(eval_reaction(q, Vec{0.0})[0] == 0.0);
  CHECK(eval_reaction(q, Vec{0.5})[0] == doctest::Approx(0.375).epsilon(1e-15));
  CHECK(eval_reaction(q, Vec{1.0})[0] == 0.0);
}

TEST_CASE("evaluation errors") {
  const auto q = PotentialSpec::quartic();
  CHECK_THROWS_AS(eval_potential(q, Vec{std::nan("")}), DomainError);
  CHECK_THROWS_AS(eval_potential(q, Vec{0.0, 1.0}), DomainError);
  const auto neg = PotentialSpec::custom_polynomial({-1.0, 0.0, 1.0}, {{-1.0}, {1.0}});
  CHECK_THROWS_AS(eval_potential(neg, Vec{0.0}), InvalidPotentialError);
}

TEST_CASE("construction rejects bad zero lists") {
  CHECK_THROWS_AS(PotentialSpec::product_wells({{0.0, 0.0}}), ConfigError);
  CHECK_THROWS_AS(PotentialSpec::product_wells({{0.0, 0.0}, {0.0, 0.0}}), ConfigError);
  CHECK_THROWS_AS(PotentialSpec::product_wells({{0.0, 0.0}, {1.0}}), ConfigError);
}

TEST_CASE("spectral bounds") {
  const auto q = PotentialSpec::quartic();
  const auto b = spectral_bounds(q);
  CHECK(b.lambda == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(b.Lambda == doctest::Approx(2.0).epsilon(1e-12));

  const Vec z1{0.0, 0.0}, z2{2.0, 1.0};
  const auto p = PotentialSpec::product_wells({z1, z2});
  const double expect = 2.0 * 5.0;  // 2 |z1 - z2|^2
  const auto pb = spectral_bounds(p);
  for (std::size_t j = 0; j < 2; ++j) {
    CHECK(pb.lambda_per_well[j] == doctest::Approx(expect).epsilon(1e-10));
    CHECK(pb.Lambda_per_well[j] == doctest::Approx(expect).epsilon(1e-10));
  }
  // Finite-difference Hessian from an evaluator-only copy agrees.
  const auto fd = PotentialSpec("fd", 2, [&p](std::span<const double> u) { return p.value_unchecked(u); }, {z1, z2});
  const Matrix H = fd.hessian(z1);
  CHECK(H(0, 0) == doctest::Approx(expect).epsilon(1e-4));
  CHECK(H(1, 1) == doctest::Approx(expect).epsilon(1e-4));
  CHECK(std::abs(H(0, 1)) < 1e-3);

  const auto sym = PotentialSpec::product_wells({{-1.0, 0.0}, {1.0, 0.0}});
  const auto sb = spectral_bounds(sym);
  CHECK(sb.lambda_per_well[0] == doctest::Approx(sb.lambda_per_well[1]).epsilon(1e-12));
  CHECK(sb.lambda <= sb.lambda_per_well[0]);
  CHECK(sb.Lambda_per_well[0] <= sb.Lambda);
}

TEST_CASE("degenerate well raises a hypothesis violation") {
  // F = u^4 (u - 1)^2 has a degenerate zero at 0.
  const auto deg = PotentialSpec::custom_polynomial({0, 0, 0, 0, 1, -2, 1}, {{0.0}, {1.0}});
  CHECK_THROWS_AS(spectral_bounds(deg), HypothesisViolationError);
  const auto rep = validate(deg, 500);
  CHECK_FALSE(rep.pass);
  CHECK_FALSE(rep.hessians_positive_definite);
}

TEST_CASE("validation") {
  const auto rep = validate(PotentialSpec::quartic());
  CHECK(rep.pass);
  CHECK(rep.coercive);
  CHECK(rep.coercivity_constant > 0.0);
  CHECK(rep.min_sample_value >= 0.0);
  CHECK(rep.samples >= 10000);
  REQUIRE(rep.bounds.has_value());
  CHECK(rep.bounds->lambda == doctest::Approx(2.0));

  const auto bad = PotentialSpec::custom_polynomial({0.25, 0.0, -0.5, 0.0, 0.25}, {{0.0}, {1.0}});
  const auto r2 = validate(bad, 200);
  CHECK_FALSE(r2.pass);
  CHECK(r2.worst_zero_value == doctest::Approx(0.25));
}

TEST_CASE("nonnegativity on a quasi-random cloud") {
  const auto p = PotentialSpec::product_wells({{-1.0, 0.0}, {1.0, 0.0}, {0.0, 1.5}});
  const auto rep = validate(p, 10000);
  CHECK(rep.pass);
  CHECK(rep.min_sample_value >= 0.0);
}

TEST_CASE("analytic gradient matches finite differences") {
  const auto p = PotentialSpec::product_wells({{-1.0, 0.0}, {1.0, 0.0}, {0.0, 1.5}});
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  double worst = 0.0;
  for (int n = 0; n < 100; ++n) {
    Vec x{U(rng), U(rng)};
    const Vec g = p.gradient(x);
    const Vec f = eval_reaction(p, x);
    for (std::size_t k = 0; k < 2; ++k) {
      const double h = 1e-5 * (1.0 + std::abs(x[k]));
      Vec a = x, b = x;
      a[k] += h;
      b[k] -= h;
      const double fd = (p.value_unchecked(a) - p.value_unchecked(b)) / (2 * h);
      worst = std::max(worst, std::abs(fd - g[k]) / std::max(1.0, std::abs(g[k])));
      CHECK(f[k] == -g[k]);
    }
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("nearest zero") {
  const auto q = PotentialSpec::quartic();
  const auto [i, d] = q.nearest_zero(Vec{0.8});
  CHECK(i == 1);
  CHECK(d == doctest::Approx(0.2));
}

TEST_CASE("jacobi eigenvalues") {
  const Matrix A{{4.0, 1.0, 0.0}, {1.0, 3.0, 1.0}, {0.0, 1.0, 2.0}};
  const Vec e = symmetric_eigenvalues(A);
  CHECK(e[0] == doctest::Approx(3.0 - std::sqrt(3.0)).epsilon(1e-12));
  CHECK(e[1] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(e[2] == doctest::Approx(3.0 + std::sqrt(3.0)).epsilon(1e-12));
}
