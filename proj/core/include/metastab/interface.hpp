#pragma once

// Interface sets I_D[u] = u^-1(D) with D = {p : min_j |p - z_j| >= rho_D}, their Hausdorff
// distance, and the exit time of the interface from a delta_1 neighbourhood.

#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "metastab/grid.hpp"
#include "metastab/potential.hpp"
#include "metastab/solver.hpp"
#include "metastab/step_function.hpp"

namespace metastab {

inline constexpr double kInfiniteDistance = std::numeric_limits<double>::infinity();

/// Sorted finite set of positions.
struct InterfaceSet {
  Vec points;

  InterfaceSet() = default;
  explicit InterfaceSet(Vec pts);
  bool empty() const noexcept { return points.empty(); }
  std::size_t size() const noexcept { return points.size(); }
  friend bool operator==(const InterfaceSet&, const InterfaceSet&) = default;
};

struct DSetSpec {
  double rho_D = 0.5;

  /// Throws ConfigError unless 0 < rho_D < (minimal well separation) / 2.
  void validate(const PotentialSpec& potential) const;
  bool contains(const PotentialSpec& potential, std::span<const double> p) const;
};

InterfaceSet interface_of_step(const StepFunction& v);

/// Cell centres x_i with min_j |u_i - z_j| >= rho_D.
InterfaceSet interface_of_profile(const Grid1D& grid, const Field& u, const PotentialSpec& potential, const DSetSpec& D);

/// max of the directed sup-inf distances; kInfiniteDistance if exactly one set is empty.
double hausdorff(const InterfaceSet& A, const InterfaceSet& B);

/// Maximal run of consecutive D-cells.
struct InterfaceCluster {
  std::size_t first = 0;  // cell index range [first, last]
  std::size_t last = 0;
  double median = 0.0;    // median cell centre of the run
  /// Sub-cell position where |u - z_left| - |u - z_right| changes sign, z_left / z_right being the
  /// wells nearest to u just outside the run. Equals `median` when both sides share a well.
  double front = 0.0;
  std::size_t left_well = 0;
  std::size_t right_well = 0;
};
std::vector<InterfaceCluster> interface_clusters(const Grid1D& grid, const Field& u, const PotentialSpec& potential,
                                                 const DSetSpec& D);

/// Streams ledger rows and reports the first time the Hausdorff distance between I_D[u(t)]
/// and I_D[u0] exceeds delta_1.
class ExitTimeDetector {
 public:
  /// Throws ConfigError if delta_1 <= 0, if delta_1 >= r when r > 0, or if I_D[u0] is empty.
  ExitTimeDetector(const Grid1D& grid, const PotentialSpec& potential, DSetSpec D, double delta1, const Field& u0,
                   double r = 0.0);

  /// Returns the Hausdorff distance to the initial interface and fills the interface columns.
  double observe(double t, const Field& u, LedgerRow* row = nullptr);

  bool exited() const noexcept { return exit_time_.has_value(); }
  std::optional<double> exit_time() const noexcept { return exit_time_; }
  const InterfaceSet& initial() const noexcept { return initial_; }
  double delta1() const noexcept { return delta1_; }
  double max_distance() const noexcept { return max_distance_; }

 private:
  const Grid1D* grid_;
  const PotentialSpec* potential_;
  DSetSpec D_;
  double delta1_;
  InterfaceSet initial_;
  std::optional<double> exit_time_;
  double max_distance_ = 0.0;
};

/// Exit time over a recorded stream of (t, u) snapshots; nullopt if never exited.
std::optional<double> detect_exit_time(const Grid1D& grid, const PotentialSpec& potential, const DSetSpec& D,
                                       double delta1, const std::vector<State>& snapshots);

}  // namespace metastab
