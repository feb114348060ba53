#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "metastab/linalg.hpp"

namespace metastab {

/// Polyline p_0..p_P in R^m, read as a path over the parameter interval [param_lo, param_hi].
/// Evaluation interpolates linearly in arclength, so a path with equally spaced nodes is
/// a constant-speed parametrization with speed sigma = length / (param_hi - param_lo).
class PathPolyline {
 public:
  PathPolyline() = default;
  PathPolyline(std::vector<Vec> nodes, double param_lo = 0.0, double param_hi = 1.0);

  static PathPolyline segment(const Vec& from, const Vec& to, std::size_t node_count,
                              double param_lo = 0.0, double param_hi = 1.0);

  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t dimension() const noexcept { return nodes_.empty() ? 0 : nodes_.front().size(); }
  const std::vector<Vec>& nodes() const noexcept { return nodes_; }
  const Vec& front() const { return nodes_.front(); }
  const Vec& back() const { return nodes_.back(); }
  double param_lo() const noexcept { return lo_; }
  double param_hi() const noexcept { return hi_; }
  double param_mid() const noexcept { return 0.5 * (lo_ + hi_); }

  double length() const noexcept { return cumulative_.empty() ? 0.0 : cumulative_.back(); }
  double sigma() const noexcept { return length() / (hi_ - lo_); }
  /// Cumulative arclength at each node.
  const Vec& arclengths() const noexcept { return cumulative_; }

  /// Point at parameter s (clamped to the interval).
  Vec at(double s) const;
  void at(double s, std::span<double> out) const;
  /// Unit-speed tangent scaled by sigma on the segment containing s.
  Vec derivative(double s) const;

  /// Same geometry, `count` nodes at equal arclength spacing.
  PathPolyline reparametrized(std::size_t count) const;
  PathPolyline reversed() const;
  PathPolyline with_interval(double lo, double hi) const;

  /// max_k |h_k - h_mean| / h_mean over segment lengths h_k.
  double spacing_deviation() const;

 private:
  void rebuild();
  std::size_t segment_index(double arclength) const;

  std::vector<Vec> nodes_;
  Vec cumulative_;
  double lo_ = 0.0;
  double hi_ = 1.0;
};

/// Joins two paths sharing an endpoint (a.back() == b.front()) into one with `count` equally
/// spaced nodes on [lo, hi].
PathPolyline concatenate(const PathPolyline& a, const PathPolyline& b, std::size_t count,
                         double lo = 0.0, double hi = 1.0);

}  // namespace metastab
