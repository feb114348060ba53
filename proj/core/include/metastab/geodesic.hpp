#pragma once

// Degenerate metric phi(xi1, xi2) = inf J[z], J[z] = sqrt(2) int sqrt(F(z)) |z'|, its minimizing
// well-to-well paths, and the asymptotic energy of a step function.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "metastab/linalg.hpp"
#include "metastab/path.hpp"
#include "metastab/potential.hpp"
#include "metastab/step_function.hpp"

namespace metastab {

struct PathOptions {
  std::size_t nodes = 257;
  std::size_t max_sweeps = 5000;
  double tol_path = 1e-10;
  /// Distance below which an intermediate well is treated as visited and the path is split.
  double rho_split = 1e-3;
  /// Amplitude of the transverse bump in the initial guess, relative to the chord length (m >= 2).
  double bump = 0.1;
};

struct PathResult {
  PathPolyline path;
  double action = 0.0;  // action of the returned polyline (accurate quadrature, not the midpoint sum)
  bool converged = false;
  std::size_t sweeps = 0;
  /// Indices of intermediate wells the path was split at, in path order.
  std::vector<std::size_t> split_wells;
  std::vector<std::string> warnings;
};

/// Discrete action: sum over segments of sqrt(2 F(midpoint)) * segment length.
double action_J(const PotentialSpec& potential, const PathPolyline& path);

/// |int_{xi1}^{xi2} sqrt(2 F(s)) ds| for scalar potentials, by adaptive Gauss-Kronrod quadrature
/// split at the zeros.
double phi_scalar(const PotentialSpec& potential, double xi1, double xi2);

/// String-method minimization of the discrete action between arbitrary endpoints. Endpoints are
/// kept exactly; returned nodes are equally spaced on [0, 1].
PathResult optimize_path(const PotentialSpec& potential, const Vec& from, const Vec& to,
                         const PathOptions& options = {});

/// Optimal path between two listed zeros (i != j).
PathResult optimal_path(const PotentialSpec& potential, std::size_t i, std::size_t j,
                        const PathOptions& options = {});

/// phi(xi1, xi2). Closed form for m = 1; path optimization otherwise.
/// Throws NonConvergenceError carrying the best action if the optimizer does not converge.
double phi(const PotentialSpec& potential, const Vec& xi1, const Vec& xi2, const PathOptions& options = {});

struct MetricTable {
  Matrix values;                                      // K x K
  std::vector<std::vector<std::optional<PathPolyline>>> paths;  // paths[i][j], i != j
  double sigma_max = 0.0;                             // max arclength speed of the stored paths
  double tolerance = 1e-6;                            // absolute for m = 1, relative for m >= 2
  bool relative_tolerance = false;
  std::size_t closure_updates = 0;                    // entries improved by concatenating paths
  std::vector<std::string> warnings;

  std::size_t size() const noexcept { return values.rows(); }
  double operator()(std::size_t i, std::size_t j) const { return values(i, j); }
  /// Tolerance in absolute terms for comparisons involving the value v.
  double tolerance_for(double v) const { return relative_tolerance ? tolerance * std::max(v, 1.0) : tolerance; }
};

/// phi between every pair of zeros. Pairs are optimized concurrently when `concurrent`; the
/// merge is by index so the result does not depend on scheduling. A shortest-path closure over
/// the table replaces any entry beaten by a chain through other wells.
MetricTable build_metric_table(const PotentialSpec& potential, const PathOptions& options = {},
                               bool concurrent = true);

/// Worst violations of the metric axioms in a table.
struct MetricAxiomReport {
  double max_diagonal = 0.0;
  double max_asymmetry = 0.0;
  double max_triangle_excess = 0.0;  // max over i,j,k of phi(i,k) - phi(i,j) - phi(j,k)
  bool pass = true;
};
MetricAxiomReport check_metric_axioms(const MetricTable& table);

/// P_0[v] = sum over jumps of phi(v(gamma_i - r), v(gamma_i + r)).
double asymptotic_energy_P0(const PotentialSpec& potential, const StepFunction& v, const MetricTable& table);

}  // namespace metastab
