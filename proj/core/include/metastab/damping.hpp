#pragma once

// Damping matrix fields G : R^m -> R^{m x m} and sample-based certification of
// uniform positivity of the quadratic form v . G(u) v.

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>

#include "metastab/linalg.hpp"
#include "metastab/potential.hpp"
#include "metastab/sampling.hpp"

namespace metastab {

enum class DampingKind { identity, scalar_function, constant_matrix, relaxation };

std::string to_string(DampingKind kind);

class DampingSpec {
 public:
  using MatrixFn = std::function<Matrix(std::span<const double>)>;

  static DampingSpec identity(std::size_t m);
  /// G(u) = g(u) I.
  static DampingSpec scalar_function(std::size_t m, std::function<double(std::span<const double>)> g);
  static DampingSpec constant(Matrix g);
  /// G(u) = I - tau f'(u) = I + tau Hess F(u), the one-field form of the relaxation system.
  static DampingSpec relaxation(std::shared_ptr<const PotentialSpec> potential, double tau);

  DampingKind kind() const noexcept { return kind_; }
  std::size_t dimension() const noexcept { return dim_; }
  /// Relaxation time for the relaxation kind, 0 otherwise.
  double relaxation_tau() const noexcept { return tau_; }

  Matrix operator()(std::span<const double> u) const { return eval_(u); }

 private:
  DampingSpec(DampingKind kind, std::size_t m, MatrixFn eval, double tau = 0.0)
      : kind_(kind), dim_(m), eval_(std::move(eval)), tau_(tau) {}

  DampingKind kind_;
  std::size_t dim_;
  MatrixFn eval_;
  double tau_;
};

/// G(u); throws DomainError for non-finite input.
Matrix eval_damping(const DampingSpec& spec, std::span<const double> u);

/// Builds the relaxation damping. Throws ConfigError unless tau > 0.
DampingSpec relaxation_preset(std::shared_ptr<const PotentialSpec> potential, double tau);

/// Smallest eigenvalue of the symmetric part of G(u).
double smallest_symmetric_eigenvalue(const DampingSpec& spec, std::span<const double> u);

struct PositivityCertificate {
  double alpha = 0.0;
  Box region;
  std::size_t samples = 0;
  Vec worst_point;
  bool accepted() const noexcept { return alpha > 0.0; }
};

/// Default certification region: bounding box of the zeros inflated by 50% per side
/// (with a minimum pad of 0.5).
Box default_certification_box(const PotentialSpec& potential);

/// alpha = min over samples of the smallest eigenvalue of sym(G(u)). Samples are the box
/// center and corners, the Halton cloud, then a compass refinement around the worst sample.
/// A negative alpha is a proof of failure; a positive one is evidence only.
/// Throws CertificationError (with the worst point) when alpha <= 0.
PositivityCertificate certify_positivity(const DampingSpec& spec, const Box& region,
                                         std::size_t n_samples = 4096);

}  // namespace metastab
