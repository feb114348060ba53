#include "metastab/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "metastab/errors.hpp"

namespace metastab {

namespace {

double fd_step(double x) {
  static const double h0 = std::cbrt(std::numeric_limits<double>::epsilon());
  return h0 * (1.0 + std::abs(x));
}

void require_finite(std::span<const double> u, const char* where) {
  if (!all_finite(u)) throw DomainError(std::string(where) + ": non-finite argument");
}

}  // namespace

PotentialSpec::PotentialSpec(std::string name, std::size_t dimension, ScalarFn value,
                             std::vector<Vec> zeros, VectorFn gradient, MatrixFn hessian)
    : name_(std::move(name)),
      dim_(dimension),
      value_(std::move(value)),
      gradient_(std::move(gradient)),
      hessian_(std::move(hessian)),
      zeros_(std::move(zeros)) {
  if (dim_ == 0) throw ConfigError("potential: dimension must be positive");
  if (!value_) throw ConfigError("potential: missing value evaluator");
  if (zeros_.size() < 2) throw ConfigError("potential: at least two zeros are required");
  for (const auto& z : zeros_) {
    if (z.size() != dim_) throw ConfigError("potential: zero has wrong dimension");
    if (!all_finite(z)) throw ConfigError("potential: non-finite zero");
  }
  for (std::size_t i = 0; i < zeros_.size(); ++i)
    for (std::size_t j = i + 1; j < zeros_.size(); ++j)
      if (distance(zeros_[i], zeros_[j]) == 0.0) throw ConfigError("potential: duplicate zero");
}

PotentialSpec PotentialSpec::quartic() {
  auto value = [](std::span<const double> u) {
    const double s = u[0] * u[0] - 1.0;
    return 0.25 * s * s;
  };
  auto gradient = [](std::span<const double> u) { return Vec{u[0] * u[0] * u[0] - u[0]}; };
  auto hessian = [](std::span<const double> u) { return Matrix{{3.0 * u[0] * u[0] - 1.0}}; };
  return PotentialSpec("quartic", 1, value, {{-1.0}, {1.0}}, gradient, hessian);
}

PotentialSpec PotentialSpec::product_wells(std::vector<Vec> zeros) {
  if (zeros.empty()) throw ConfigError("product_wells: no zeros");
  const std::size_t m = zeros.front().size();
  auto zs = std::make_shared<const std::vector<Vec>>(zeros);

  auto sq = [zs](std::span<const double> u, std::size_t j) {
    double q = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
      const double d = u[k] - (*zs)[j][k];
      q += d * d;
    }
    return q;
  };
  auto value = [zs, sq](std::span<const double> u) {
    double f = 1.0;
    for (std::size_t j = 0; j < zs->size(); ++j) f *= sq(u, j);
    return f;
  };
  // grad F = sum_j 2(u - z_j) prod_{k != j} q_k.
  auto gradient = [zs, sq, m](std::span<const double> u) {
    const std::size_t K = zs->size();
    Vec q(K);
    for (std::size_t j = 0; j < K; ++j) q[j] = sq(u, j);
    Vec g(m, 0.0);
    for (std::size_t j = 0; j < K; ++j) {
      double others = 1.0;
      for (std::size_t k = 0; k < K; ++k)
        if (k != j) others *= q[k];
      for (std::size_t c = 0; c < m; ++c) g[c] += 2.0 * (u[c] - (*zs)[j][c]) * others;
    }
    return g;
  };
  // Hess F = sum_j 2 I prod_{k != j} q_k + sum_{j != l} 4 (u - z_j)(u - z_l)^T prod_{k != j,l} q_k.
  auto hessian = [zs, sq, m](std::span<const double> u) {
    const std::size_t K = zs->size();
    Vec q(K);
    for (std::size_t j = 0; j < K; ++j) q[j] = sq(u, j);
    Matrix h(m, m);
    for (std::size_t j = 0; j < K; ++j) {
      double others = 1.0;
      for (std::size_t k = 0; k < K; ++k)
        if (k != j) others *= q[k];
      for (std::size_t c = 0; c < m; ++c) h(c, c) += 2.0 * others;
      for (std::size_t l = 0; l < K; ++l) {
        if (l == j) continue;
        double rest = 1.0;
        for (std::size_t k = 0; k < K; ++k)
          if (k != j && k != l) rest *= q[k];
        for (std::size_t r = 0; r < m; ++r)
          for (std::size_t c = 0; c < m; ++c)
            h(r, c) += 4.0 * (u[r] - (*zs)[j][r]) * (u[c] - (*zs)[l][c]) * rest;
      }
    }
    return h;
  };
  return PotentialSpec("product_wells", m, value, std::move(zeros), gradient, hessian);
}

PotentialSpec PotentialSpec::custom_polynomial(Vec coefficients, std::vector<Vec> zeros) {
  if (coefficients.empty()) throw ConfigError("custom_polynomial: no coefficients");
  auto c = std::make_shared<const Vec>(std::move(coefficients));
  auto horner = [](const Vec& a, double x) {
    double acc = 0.0;
    for (std::size_t k = a.size(); k-- > 0;) acc = acc * x + a[k];
    return acc;
  };
  auto derivative = [](const Vec& a) {
    Vec d(a.size() > 1 ? a.size() - 1 : 1, 0.0);
    for (std::size_t k = 1; k < a.size(); ++k) d[k - 1] = static_cast<double>(k) * a[k];
    return d;
  };
  auto d1 = std::make_shared<const Vec>(derivative(*c));
  auto d2 = std::make_shared<const Vec>(derivative(*d1));
  return PotentialSpec(
      "custom_polynomial", 1, [c, horner](std::span<const double> u) { return horner(*c, u[0]); },
      std::move(zeros), [d1, horner](std::span<const double> u) { return Vec{horner(*d1, u[0])}; },
      [d2, horner](std::span<const double> u) { return Matrix{{horner(*d2, u[0])}}; });
}

Vec PotentialSpec::gradient(std::span<const double> u) const {
  if (gradient_) return gradient_(u);
  Vec g(dim_);
  Vec p(u.begin(), u.end());
  for (std::size_t i = 0; i < dim_; ++i) {
    const double h = fd_step(u[i]);
    p[i] = u[i] + h;
    const double fp = value_(p);
    p[i] = u[i] - h;
    const double fm = value_(p);
    p[i] = u[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

Matrix PotentialSpec::hessian(std::span<const double> u) const {
  if (hessian_) return hessian_(u);
  Matrix h(dim_, dim_);
  Vec p(u.begin(), u.end());
  for (std::size_t j = 0; j < dim_; ++j) {
    const double step = fd_step(u[j]);
    p[j] = u[j] + step;
    const Vec gp = gradient(p);
    p[j] = u[j] - step;
    const Vec gm = gradient(p);
    p[j] = u[j];
    for (std::size_t i = 0; i < dim_; ++i) h(i, j) = (gp[i] - gm[i]) / (2.0 * step);
  }
  return h.symmetric_part();
}

std::pair<std::size_t, double> PotentialSpec::nearest_zero(std::span<const double> u) const {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < zeros_.size(); ++j) {
    const double d = distance(u, zeros_[j]);
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  return {best, best_d};
}

double eval_potential(const PotentialSpec& spec, std::span<const double> u) {
  if (u.size() != spec.dimension()) throw DomainError("eval_potential: dimension mismatch");
  require_finite(u, "eval_potential");
  const double f = spec.value_unchecked(u);
  if (!std::isfinite(f)) throw DomainError("eval_potential: non-finite value");
  if (f < -kTolZero) {
    std::ostringstream os;
    os << "potential '" << spec.name() << "' is negative (" << f << ")";
    throw InvalidPotentialError(os.str());
  }
  return f;
}

Vec eval_reaction(const PotentialSpec& spec, std::span<const double> u) {
  if (u.size() != spec.dimension()) throw DomainError("eval_reaction: dimension mismatch");
  require_finite(u, "eval_reaction");
  Vec g = spec.gradient(u);
  for (double& x : g) x = -x;
  return g;
}

SpectralBounds spectral_bounds(const PotentialSpec& spec) {
  SpectralBounds sb;
  sb.lambda = std::numeric_limits<double>::infinity();
  sb.Lambda = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < spec.well_count(); ++j) {
    const Vec eig = symmetric_eigenvalues(spec.hessian(spec.zeros()[j]).symmetric_part());
    if (!(eig.front() > 0.0)) {
      std::ostringstream os;
      os << "Hessian at zero " << j << " is not positive definite (smallest eigenvalue "
         << eig.front() << ")";
      throw HypothesisViolationError(os.str());
    }
    sb.lambda_per_well.push_back(eig.front());
    sb.Lambda_per_well.push_back(eig.back());
    sb.lambda = std::min(sb.lambda, eig.front());
    sb.Lambda = std::max(sb.Lambda, eig.back());
  }
  return sb;
}

ValidationReport validate(const PotentialSpec& spec, std::size_t sample_count) {
  ValidationReport rep;
  auto fail = [&rep](std::string msg) {
    rep.pass = false;
    rep.failures.push_back(std::move(msg));
  };
  const double grad_tol = spec.analytic_gradient() ? kTolZero : 1e-6;

  for (std::size_t j = 0; j < spec.well_count(); ++j) {
    const auto& z = spec.zeros()[j];
    const double fz = std::abs(spec.value_unchecked(z));
    const double gz = norm(spec.gradient(z));
    rep.worst_zero_value = std::max(rep.worst_zero_value, fz);
    rep.worst_zero_gradient = std::max(rep.worst_zero_gradient, gz);
    if (fz > kTolZero) {
      std::ostringstream os;
      os << "F(z_" << j << ") = " << fz << " is not zero";
      fail(os.str());
    }
    if (gz > grad_tol) {
      std::ostringstream os;
      os << "grad F(z_" << j << ") has norm " << gz;
      fail(os.str());
    }
  }

  try {
    rep.bounds = spectral_bounds(spec);
  } catch (const HypothesisViolationError& e) {
    rep.hessians_positive_definite = false;
    fail(e.what());
  }

  const Box box = Box::bounding(spec.zeros()).inflated(0.5, 1.0);
  rep.min_sample_value = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k <= sample_count; ++k) {
    const Vec p = halton_point(box, k);
    const double f = spec.value_unchecked(p);
    if (f < rep.min_sample_value) {
      rep.min_sample_value = f;
      rep.min_sample_point = p;
    }
  }
  rep.samples = sample_count;
  if (rep.min_sample_value < -kTolZero) {
    std::ostringstream os;
    os << "F is negative at a sample (" << rep.min_sample_value << ")";
    fail(os.str());
  }

  // Quadratic growth on the shell L < |x| < 3L.
  double zmax = 0.0;
  for (const auto& z : spec.zeros()) zmax = std::max(zmax, norm(z));
  const double L = 2.0 * zmax + 1.0;
  rep.coercivity_radius = L;
  Box shell{Vec(spec.dimension(), -3.0 * L), Vec(spec.dimension(), 3.0 * L)};
  rep.coercivity_constant = std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  for (std::size_t k = 1; used < std::max<std::size_t>(sample_count / 10, 64) && k < 100 * sample_count + 1000; ++k) {
    const Vec p = halton_point(shell, k);
    const double r = norm(p);
    if (r <= L || r >= 3.0 * L) continue;
    ++used;
    rep.coercivity_constant = std::min(rep.coercivity_constant, spec.value_unchecked(p) / (r * r));
  }
  rep.coercive = rep.coercivity_constant > 0.0;
  if (!rep.coercive) fail("quadratic growth probe failed outside radius " + std::to_string(L));
  return rep;
}

}  // namespace metastab
