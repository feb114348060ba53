#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "metastab/damping.hpp"
#include "metastab/errors.hpp"

using namespace metastab;

namespace {
std::shared_ptr<const PotentialSpec> quartic() { return std::make_shared<const PotentialSpec>(PotentialSpec::quartic()); }
}  // namespace

TEST_CASE("identity damping") {
  const auto G = DampingSpec::identity(2);
  const Matrix M = eval_damping(G, Vec{0.3, -4.0});
  CHECK(M == Matrix::identity(2));
  const auto cert = certify_positivity(G, Box{{-1, -1}, {1, 1}}, 256);
  CHECK(cert.alpha == 1.0);
  CHECK(cert.accepted());
  CHECK_THROWS_AS(eval_damping(G, Vec{std::nan(""), 0.0}), DomainError);
}

TEST_CASE("relaxation preset g(u) = 1 + tau (3u^2 - 1)") {
  const auto G = relaxation_preset(quartic(), 0.1);
  CHECK(G.kind() == DampingKind::relaxation);
  CHECK(eval_damping(G, Vec{1.0})(0, 0) == doctest::Approx(1.2).epsilon(1e-14));
  CHECK(eval_damping(G, Vec{0.0})(0, 0) == doctest::Approx(0.9).epsilon(1e-14));
  const auto pot = PotentialSpec::quartic();
  for (double u = -2.0; u <= 2.0; u += 0.125) {
    // Finite-difference Jacobian of f = -F'.
    const double h = 1e-5;
    const double df = (eval_reaction(pot, Vec{u + h})[0] - eval_reaction(pot, Vec{u - h})[0]) / (2 * h);
    CHECK(eval_damping(G, Vec{u})(0, 0) == doctest::Approx(1.0 - 0.1 * df).epsilon(1e-6));
    CHECK(eval_damping(G, Vec{u})(0, 0) == doctest::Approx(1.0 + 0.1 * (3 * u * u - 1)).epsilon(1e-14));
  }
  const auto small = relaxation_preset(quartic(), 1e-12);
  CHECK(eval_damping(small, Vec{0.7})(0, 0) == doctest::Approx(1.0).epsilon(1e-11));
}

TEST_CASE("relaxation at a well is positive definite") {
  auto p = std::make_shared<const PotentialSpec>(PotentialSpec::product_wells({{-1.0, 0.0}, {1.0, 0.0}}));
  const auto G = relaxation_preset(p, 0.3);
  for (const auto& z : p->zeros()) CHECK(smallest_symmetric_eigenvalue(G, z) > 1.0);
}

TEST_CASE("certification of the relaxation preset") {
  const Box box{{-2.0}, {2.0}};
  const auto cert = certify_positivity(relaxation_preset(quartic(), 0.1), box, 4096);
  CHECK(cert.accepted());
  CHECK(cert.alpha == doctest::Approx(0.9).epsilon(1e-8));
  CHECK(std::abs(cert.worst_point[0]) < 1e-3);

  // min over [-2, 2] of 1 + tau (3u^2 - 1) is 1 - tau.
  const auto c6 = certify_positivity(relaxation_preset(quartic(), 0.6), box, 4096);
  CHECK(c6.alpha == doctest::Approx(0.4).epsilon(1e-8));

  try {
    certify_positivity(relaxation_preset(quartic(), 1.2), box, 4096);
    FAIL("expected a certification failure");
  } catch (const CertificationError& e) {
    CHECK(e.alpha() == doctest::Approx(-0.2).epsilon(1e-8));
    CHECK(std::abs(e.worst_point()[0]) < 1e-3);
  }
}

TEST_CASE("certified bound holds on random vectors") {
  const auto G = relaxation_preset(quartic(), 0.1);
  const Box box = default_certification_box(PotentialSpec::quartic());
  CHECK(box.lower[0] == doctest::Approx(-2.0));
  CHECK(box.upper[0] == doctest::Approx(2.0));
  const auto cert = certify_positivity(G, box, 1024);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-2.0, 2.0), V(-5.0, 5.0);
  for (int n = 0; n < 1000; ++n) {
    const double u = U(rng), v = V(rng);
    CHECK(v * eval_damping(G, Vec{u})(0, 0) * v >= (cert.alpha - 1e-8) * v * v);
  }
}

TEST_CASE("nonsymmetric constant damping uses the symmetric part") {
  const Matrix A{{1.0, 4.0}, {0.0, 1.0}};  // symmetric part has eigenvalues 1 +- 2
  const auto G = DampingSpec::constant(A);
  CHECK(smallest_symmetric_eigenvalue(G, Vec{0.0, 0.0}) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK_THROWS_AS(certify_positivity(G, Box{{-1, -1}, {1, 1}}, 64), CertificationError);
  const auto ok = certify_positivity(DampingSpec::constant(Matrix{{2.0, 1.0}, {-1.0, 2.0}}), Box{{-1, -1}, {1, 1}}, 64);
  CHECK(ok.alpha == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("scalar damping function") {
  const auto G = DampingSpec::scalar_function(2, [](std::span<const double> u) { return 1.0 + u[0] * u[0]; });
  const Matrix M = eval_damping(G, Vec{2.0, 0.0});
  CHECK(M(0, 0) == 5.0);
  CHECK(M(1, 1) == 5.0);
  CHECK(M(0, 1) == 0.0);
  const auto cert = certify_positivity(G, Box{{-1, -1}, {1, 1}}, 512);
  CHECK(cert.alpha == doctest::Approx(1.0).epsilon(1e-6));
}
