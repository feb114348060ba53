#include "metastab/interface.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "metastab/errors.hpp"

namespace metastab {

InterfaceSet::InterfaceSet(Vec pts) : points(std::move(pts)) { std::sort(points.begin(), points.end()); }

void DSetSpec::validate(const PotentialSpec& potential) const {
  const auto& z = potential.zeros();
  double sep = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < z.size(); ++i)
    for (std::size_t j = i + 1; j < z.size(); ++j) sep = std::min(sep, distance(z[i], z[j]));
  if (!(rho_D > 0.0) || !(rho_D < 0.5 * sep)) {
    std::ostringstream os;
    os << "rho_D = " << rho_D << " must lie in (0, " << 0.5 * sep << ")";
    throw ConfigError(os.str());
  }
}

bool DSetSpec::contains(const PotentialSpec& potential, std::span<const double> p) const {
  return potential.nearest_zero(p).second >= rho_D;
}

InterfaceSet interface_of_step(const StepFunction& v) { return InterfaceSet(v.jumps); }

InterfaceSet interface_of_profile(const Grid1D& grid, const Field& u, const PotentialSpec& potential, const DSetSpec& D) {
  Vec pts;
  for (std::size_t i = 0; i < u.cells(); ++i)
    if (D.contains(potential, u.cell(i))) pts.push_back(grid.x(i));
  return InterfaceSet(std::move(pts));
}

namespace {

double directed(const Vec& A, const Vec& B) {
  // Both sorted: walk B once.
  double worst = 0.0;
  std::size_t j = 0;
  for (double a : A) {
    while (j + 1 < B.size() && std::abs(B[j + 1] - a) <= std::abs(B[j] - a)) ++j;
    worst = std::max(worst, std::abs(B[j] - a));
  }
  return worst;
}

}  // namespace

double hausdorff(const InterfaceSet& A, const InterfaceSet& B) {
  if (A.empty() && B.empty()) return 0.0;
  if (A.empty() || B.empty()) return kInfiniteDistance;
  return std::max(directed(A.points, B.points), directed(B.points, A.points));
}

std::vector<InterfaceCluster> interface_clusters(const Grid1D& grid, const Field& u, const PotentialSpec& potential,
                                                 const DSetSpec& D) {
  const std::size_t n = u.cells();
  const auto& zeros = potential.zeros();
  std::vector<InterfaceCluster> out;
  std::size_t i = 0;
  while (i < n) {
    if (!D.contains(potential, u.cell(i))) {
      ++i;
      continue;
    }
    InterfaceCluster c;
    c.first = i;
    while (i + 1 < n && D.contains(potential, u.cell(i + 1))) ++i;
    c.last = i;
    ++i;
    const std::size_t count = c.last - c.first + 1;
    c.median = count % 2 == 1 ? grid.x(c.first + count / 2)
                              : 0.5 * (grid.x(c.first + count / 2 - 1) + grid.x(c.first + count / 2));
    const std::size_t lcell = c.first > 0 ? c.first - 1 : c.first;
    const std::size_t rcell = c.last + 1 < n ? c.last + 1 : c.last;
    c.left_well = potential.nearest_zero(u.cell(lcell)).first;
    c.right_well = potential.nearest_zero(u.cell(rcell)).first;
    c.front = c.median;
    if (c.left_well != c.right_well) {
      const Vec& zl = zeros[c.left_well];
      const Vec& zr = zeros[c.right_well];
      auto g = [&](std::size_t k) { return distance(u.cell(k), zl) - distance(u.cell(k), zr); };
      // g < 0 near the left well, > 0 near the right one; take the sign change closest to the median.
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t k = lcell; k < rcell; ++k) {
        const double g0 = g(k), g1 = g(k + 1);
        if ((g0 <= 0.0 && g1 > 0.0) || (g0 >= 0.0 && g1 < 0.0)) {
          const double x = grid.x(k) + grid.dx() * g0 / (g0 - g1);
          if (std::abs(x - c.median) < std::abs(best - c.median)) best = x;
        }
      }
      if (std::isfinite(best)) c.front = best;
    }
    out.push_back(c);
  }
  return out;
}

ExitTimeDetector::ExitTimeDetector(const Grid1D& grid, const PotentialSpec& potential, DSetSpec D, double delta1,
                                   const Field& u0, double r)
    : grid_(&grid), potential_(&potential), D_(D), delta1_(delta1) {
  D_.validate(potential);
  if (!(delta1 > 0.0)) throw ConfigError("exit detector: delta_1 must be positive");
  if (r > 0.0 && !(delta1 < r)) throw ConfigError("exit detector: need delta_1 < r");
  initial_ = interface_of_profile(grid, u0, potential, D_);
  if (initial_.empty()) throw ConfigError("exit detector: the initial interface is empty");
}

double ExitTimeDetector::observe(double t, const Field& u, LedgerRow* row) {
  const InterfaceSet now = interface_of_profile(*grid_, u, *potential_, D_);
  const double d = hausdorff(now, initial_);
  max_distance_ = std::max(max_distance_, d);
  if (!exit_time_ && d > delta1_) exit_time_ = t;
  if (row) {
    row->iface_count = static_cast<double>(now.size());
    row->iface_min = now.empty() ? std::numeric_limits<double>::quiet_NaN() : now.points.front();
    row->iface_max = now.empty() ? std::numeric_limits<double>::quiet_NaN() : now.points.back();
    row->iface_hausdorff_to_init = d;
  }
  return d;
}

std::optional<double> detect_exit_time(const Grid1D& grid, const PotentialSpec& potential, const DSetSpec& D,
                                       double delta1, const std::vector<State>& snapshots) {
  if (snapshots.empty()) throw ConfigError("detect_exit_time: empty stream");
  ExitTimeDetector det(grid, potential, D, delta1, snapshots.front().u);
  for (const auto& s : snapshots) {
    det.observe(s.t, s.u);
    if (det.exited()) break;
  }
  return det.exit_time();
}

}  // namespace metastab
