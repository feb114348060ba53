#pragma once

// Multi-well potentials F : R^m -> R with finitely many non-degenerate zeros,
// and the reaction field f = -grad F.

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "metastab/linalg.hpp"
#include "metastab/sampling.hpp"

namespace metastab {

inline constexpr double kTolZero = 1e-10;

/// Per-well and global extremes of the Hessian spectrum at the zeros.
struct SpectralBounds {
  double lambda = 0.0;      // min over wells of the smallest eigenvalue
  double Lambda = 0.0;      // max over wells of the largest eigenvalue
  Vec lambda_per_well;
  Vec Lambda_per_well;
};

struct ValidationReport {
  bool pass = true;
  std::vector<std::string> failures;

  double worst_zero_value = 0.0;     // max_j |F(z_j)|
  double worst_zero_gradient = 0.0;  // max_j |grad F(z_j)|
  double min_sample_value = 0.0;     // min F over the sample cloud
  Vec min_sample_point;
  std::size_t samples = 0;
  bool hessians_positive_definite = true;
  std::optional<SpectralBounds> bounds;

  bool coercive = true;
  double coercivity_constant = 0.0;  // min F(x)/|x|^2 over the outer shell samples
  double coercivity_radius = 0.0;
};

/// Immutable description of a potential. Evaluators not supplied analytically are replaced by
/// centered finite differences with step cbrt(machine epsilon) * (1 + |u|).
class PotentialSpec {
 public:
  using ScalarFn = std::function<double(std::span<const double>)>;
  using VectorFn = std::function<Vec(std::span<const double>)>;
  using MatrixFn = std::function<Matrix(std::span<const double>)>;

  PotentialSpec(std::string name, std::size_t dimension, ScalarFn value, std::vector<Vec> zeros,
                VectorFn gradient = {}, MatrixFn hessian = {});

  /// F(u) = (u^2 - 1)^2 / 4 on R, zeros {-1, +1}.
  static PotentialSpec quartic();
  /// F(u) = prod_j |u - z_j|^2 on R^m with the given zeros (K >= 2).
  static PotentialSpec product_wells(std::vector<Vec> zeros);
  /// Scalar polynomial F(u) = sum_k c_k u^k with claimed zeros.
  static PotentialSpec custom_polynomial(Vec coefficients, std::vector<Vec> zeros);

  const std::string& name() const noexcept { return name_; }
  std::size_t dimension() const noexcept { return dim_; }
  const std::vector<Vec>& zeros() const noexcept { return zeros_; }
  std::size_t well_count() const noexcept { return zeros_.size(); }
  bool analytic_gradient() const noexcept { return static_cast<bool>(gradient_); }
  bool analytic_hessian() const noexcept { return static_cast<bool>(hessian_); }

  /// Raw evaluators: no validation, hot-path use.
  double value_unchecked(std::span<const double> u) const { return value_(u); }
  Vec gradient(std::span<const double> u) const;
  Matrix hessian(std::span<const double> u) const;

  /// Index of the listed zero closest to u and its distance.
  std::pair<std::size_t, double> nearest_zero(std::span<const double> u) const;

 private:
  std::string name_;
  std::size_t dim_;
  ScalarFn value_;
  VectorFn gradient_;
  MatrixFn hessian_;
  std::vector<Vec> zeros_;
};

/// F(u). Throws DomainError for non-finite input and InvalidPotentialError if F(u) < -tol_zero.
double eval_potential(const PotentialSpec& spec, std::span<const double> u);

/// f(u) = -grad F(u).
Vec eval_reaction(const PotentialSpec& spec, std::span<const double> u);

/// Spectral bounds of the Hessians at the zeros. Throws HypothesisViolationError if some
/// Hessian is not positive definite.
SpectralBounds spectral_bounds(const PotentialSpec& spec);

/// Checks nonnegativity, the zero set and the Hessians on a deterministic Halton cloud in the
/// inflated bounding box of the zeros, plus a quadratic-growth probe on an outer shell.
/// Never throws for hypothesis failures; they are reported.
ValidationReport validate(const PotentialSpec& spec, std::size_t sample_count = 10000);

}  // namespace metastab
