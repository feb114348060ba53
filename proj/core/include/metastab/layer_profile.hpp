#pragma once

// Transition-layer initial data: the profile ODE w' = sigma^-1 sqrt(2 F(psi(w))), the composed
// layer u0 = psi(w((x - gamma) / eps)) with linear connectors, and small initial velocities.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "metastab/geodesic.hpp"
#include "metastab/grid.hpp"
#include "metastab/path.hpp"
#include "metastab/potential.hpp"
#include "metastab/step_function.hpp"

namespace metastab {

struct ProfileOptions {
  double sample_step = 0.01;  // spacing of the stored samples in the fast variable
  double tol_tail = 1e-12;    // stop once w is this close to the parameter endpoint
  double y_max = 1000.0;      // give up if the endpoint is not reached by |y| = y_max
  double abs_tol = 1e-14;
  double rel_tol = 1e-12;
};

/// Samples of the increasing solution w(y) on a uniform grid y_0 < ... < y_n, w(0) = mid.
class ProfileCurve {
 public:
  ProfileCurve() = default;
  ProfileCurve(double y0, double h, Vec w, Vec dw, double a_w, double b_w, double mid, bool clamped);

  double operator()(double y) const;
  /// Cubic Hermite derivative; zero outside the sampled range.
  double derivative(double y) const;

  double y_min() const noexcept { return y0_; }
  double y_max() const noexcept { return y0_ + h_ * static_cast<double>(w_.size() - 1); }
  double step() const noexcept { return h_; }
  double a_w() const noexcept { return a_w_; }
  double b_w() const noexcept { return b_w_; }
  double midpoint() const noexcept { return mid_; }
  const Vec& samples() const noexcept { return w_; }
  /// Strictly increasing samples.
  bool monotone() const noexcept { return monotone_; }
  /// The square-root argument had to be clamped at zero somewhere.
  bool clamped() const noexcept { return clamped_; }

 private:
  double y0_ = 0.0;
  double h_ = 1.0;
  Vec w_;
  Vec dw_;
  double a_w_ = 0.0;
  double b_w_ = 0.0;
  double mid_ = 0.0;
  bool monotone_ = false;
  bool clamped_ = false;
};

/// Integrates forward and backward from the parameter midpoint of `path` with an adaptive
/// Dormand-Prince (4)5 method. Throws NonConvergenceError if an endpoint is not approached
/// within tol_tail by |y| = y_max.
ProfileCurve solve_profile_ode(const PotentialSpec& potential, const PathPolyline& path,
                               const ProfileOptions& options = {});

/// sigma^-1 sqrt(2 max(F(psi(w)), 0)).
double profile_rate(const PotentialSpec& potential, const PathPolyline& path, double w);

struct JumpLayer {
  double gamma = 0.0;
  std::size_t from = 0;  // well index of v(gamma - r)
  std::size_t to = 0;    // well index of v(gamma + r)
  PathPolyline path;
  ProfileCurve profile;
};

/// One layer per jump of v. Scalar potentials use the straight segment between the wells on
/// [-L/2, L/2] (unit speed); otherwise the table's optimal path on [0, 1].
std::vector<JumpLayer> build_layers(const PotentialSpec& potential, const StepFunction& v, const MetricTable& table,
                                    const ProfileOptions& options = {});

/// The continuous function u0^eps: v outside the balls B(gamma_i, r), the composed profile on
/// [gamma_i - r + eps, gamma_i + r - eps], linear connectors of width eps at the ball edges.
class InitialDatum {
 public:
  /// Throws ConfigError if eps >= r or v is invalid.
  InitialDatum(PotentialSpec potential, StepFunction v, double eps, std::vector<JumpLayer> layers);

  const StepFunction& step_function() const noexcept { return v_; }
  const PotentialSpec& potential() const noexcept { return potential_; }
  const std::vector<JumpLayer>& layers() const noexcept { return layers_; }
  double eps() const noexcept { return eps_; }

  Vec at(double x) const;
  /// One-sided (right) derivative at the connector kinks.
  Vec derivative(double x) const;
  /// Cell-centre samples. Throws ConfigError unless dx <= eps / 10.
  Field sample(const Grid1D& grid) const;
  /// v at cell centres.
  Field sample_target(const Grid1D& grid) const;

  /// int_c^d (eps/2)|u'|^2 + F(u)/eps by adaptive Gauss-Kronrod quadrature split at every kink.
  double continuum_energy(double c, double d) const;
  double continuum_energy() const { return continuum_energy(v_.a, v_.b); }
  /// int_a^b |u0 - v| dx by the same quadrature.
  double continuum_l1_to_target() const;

  /// True if x lies in a core interval [gamma_i - r + eps, gamma_i + r - eps].
  bool in_core(double x) const;

 private:
  const JumpLayer* layer_containing(double x) const;
  Vec breakpoints(double c, double d) const;

  PotentialSpec potential_;
  StepFunction v_;
  double eps_;
  std::vector<JumpLayer> layers_;
};

/// build_layers + InitialDatum in one call.
InitialDatum build_initial_datum(const PotentialSpec& potential, const StepFunction& v, double eps,
                                 const MetricTable& table, const ProfileOptions& options = {});

/// max over core cells of |eps^2/2 |u'|^2 - F(u)| with centred differences of the sampled datum.
double equipartition_residual(const InitialDatum& datum, const Grid1D& grid);

enum class VelocityKind { zero, scaled_noise };
std::string to_string(VelocityKind kind);
VelocityKind parse_velocity_kind(const std::string& text);

/// Zero field, or a fixed-seed random combination of the first cosine modes rescaled so that
/// tau sum |u1_i|^2 dx = C_target eps exp(-A_target / eps).
Field build_initial_velocity(VelocityKind kind, double eps, double tau, double A_target, double C_target,
                             const Grid1D& grid, std::size_t components, std::uint64_t seed = 42);

/// Rescales u1 so that tau ||u1||^2 = C eps exp(-A / eps). Zero fields are returned unchanged.
Field rescale_velocity(Field u1, const Grid1D& grid, double eps, double tau, double A_target, double C_target);

struct StructureReport {
  double l1_to_v = 0.0;         // discrete sum |u0_i - v_i| dx
  double energy = 0.0;           // P_eps[u0] used for the excess
  double grid_energy = 0.0;      // discrete P_eps on the grid
  double P0 = 0.0;
  double excess = 0.0;           // energy - P0
  double tolerance = 0.0;        // negative excess allowed before InconsistencyError
  bool continuum = false;        // energy came from quadrature of the continuous datum
  bool layer_structure = true;   // false when the excess is far above the layer scale
};

/// Grid-only check: energy is the discrete P_eps, whose quadrature error (of order
/// (dx/eps)^2 P0) widens the negative-excess allowance to 1e-8 + (dx/eps)^2 P0.
StructureReport verify_transition_layer_structure(const Grid1D& grid, const Field& u0, const Field& v_sampled,
                                                  const PotentialSpec& potential, double eps, double P0,
                                                  double non_layer_factor = 0.1);

/// Constructed datum: energy is the continuum P_eps (allowance 1e-8 + p0_uncertainty); grid values
/// are reported. For m >= 2 P0 is a discretised path action, so callers pass its table tolerance.
StructureReport verify_transition_layer_structure(const InitialDatum& datum, const Grid1D& grid, double P0,
                                                  double non_layer_factor = 0.1, double p0_uncertainty = 0.0);

}  // namespace metastab
