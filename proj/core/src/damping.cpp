#include "metastab/damping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "metastab/errors.hpp"

namespace metastab {

std::string to_string(DampingKind kind) {
  switch (kind) {
    case DampingKind::identity: return "identity";
    case DampingKind::scalar_function: return "scalar_function";
    case DampingKind::constant_matrix: return "constant";
    case DampingKind::relaxation: return "relaxation";
  }
  return "unknown";
}

DampingSpec DampingSpec::identity(std::size_t m) {
  const Matrix id = Matrix::identity(m);
  return DampingSpec(DampingKind::identity, m, [id](std::span<const double>) { return id; });
}

DampingSpec DampingSpec::scalar_function(std::size_t m,
                                         std::function<double(std::span<const double>)> g) {
  return DampingSpec(DampingKind::scalar_function, m, [m, g = std::move(g)](std::span<const double> u) {
    Matrix out = Matrix::identity(m);
    out *= g(u);
    return out;
  });
}

DampingSpec DampingSpec::constant(Matrix g) {
  if (g.rows() != g.cols() || g.rows() == 0) throw ConfigError("damping: constant matrix must be square");
  const std::size_t m = g.rows();
  return DampingSpec(DampingKind::constant_matrix, m, [g = std::move(g)](std::span<const double>) { return g; });
}

DampingSpec DampingSpec::relaxation(std::shared_ptr<const PotentialSpec> potential, double tau) {
  if (!potential) throw ConfigError("damping: relaxation needs a potential");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("damping: relaxation tau must be positive");
  const std::size_t m = potential->dimension();
  return DampingSpec(
      DampingKind::relaxation, m,
      [potential = std::move(potential), tau, m](std::span<const double> u) {
        Matrix out = potential->hessian(u);
        out *= tau;
        out += Matrix::identity(m);
        return out;
      },
      tau);
}

Matrix eval_damping(const DampingSpec& spec, std::span<const double> u) {
  if (u.size() != spec.dimension()) throw DomainError("eval_damping: dimension mismatch");
  if (!all_finite(u)) throw DomainError("eval_damping: non-finite argument");
  return spec(u);
}

DampingSpec relaxation_preset(std::shared_ptr<const PotentialSpec> potential, double tau) {
  return DampingSpec::relaxation(std::move(potential), tau);
}

double smallest_symmetric_eigenvalue(const DampingSpec& spec, std::span<const double> u) {
  return symmetric_eigenvalues(spec(u).symmetric_part()).front();
}

Box default_certification_box(const PotentialSpec& potential) {
  return Box::bounding(potential.zeros()).inflated(0.5, 0.5);
}

PositivityCertificate certify_positivity(const DampingSpec& spec, const Box& region,
                                         std::size_t n_samples) {
  if (region.dimension() != spec.dimension()) throw ConfigError("certify_positivity: region dimension mismatch");
  for (std::size_t i = 0; i < region.dimension(); ++i)
    if (!(region.lower[i] <= region.upper[i]) || !std::isfinite(region.lower[i]) || !std::isfinite(region.upper[i]))
      throw ConfigError("certify_positivity: region must be a finite box");

  PositivityCertificate cert;
  cert.region = region;
  cert.alpha = std::numeric_limits<double>::infinity();
  auto probe = [&](const Vec& p) {
    const double e = smallest_symmetric_eigenvalue(spec, p);
    ++cert.samples;
    if (e < cert.alpha) {
      cert.alpha = e;
      cert.worst_point = p;
    }
  };

  const std::size_t m = region.dimension();
  probe(region.center());
  for (std::size_t mask = 0; mask < (std::size_t{1} << m); ++mask) {
    Vec corner(m);
    for (std::size_t i = 0; i < m; ++i) corner[i] = (mask >> i & 1U) ? region.upper[i] : region.lower[i];
    probe(corner);
  }
  for (std::size_t k = 1; k <= n_samples; ++k) probe(halton_point(region, k));

  // Compass search from the worst sample, kept inside the box.
  Vec step(m);
  for (std::size_t i = 0; i < m; ++i) step[i] = 0.05 * (region.upper[i] - region.lower[i]);
  for (int iter = 0; iter < 200; ++iter) {
    bool improved = false;
    for (std::size_t i = 0; i < m && !improved; ++i) {
      for (double sign : {1.0, -1.0}) {
        Vec p = cert.worst_point;
        p[i] = std::clamp(p[i] + sign * step[i], region.lower[i], region.upper[i]);
        const double before = cert.alpha;
        probe(p);
        if (cert.alpha < before) {
          improved = true;
          break;
        }
      }
    }
    if (!improved) {
      bool tiny = true;
      for (double& s : step) {
        s *= 0.5;
        tiny = tiny && s < 1e-12;
      }
      if (tiny) break;
    }
  }

  if (!(cert.alpha > 0.0)) {
    std::ostringstream os;
    os << "damping positivity fails: smallest eigenvalue " << cert.alpha << " at (";
    for (std::size_t i = 0; i < m; ++i) os << (i ? ", " : "") << cert.worst_point[i];
    os << ")";
    throw CertificationError(os.str(), cert.alpha, cert.worst_point);
  }
  return cert;
}

}  // namespace metastab
