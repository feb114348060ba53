#include "metastab/path.hpp"

#include <algorithm>
#include <cmath>

#include "metastab/errors.hpp"

namespace metastab {

PathPolyline::PathPolyline(std::vector<Vec> nodes, double param_lo, double param_hi)
    : nodes_(std::move(nodes)), lo_(param_lo), hi_(param_hi) {
  if (nodes_.size() < 2) throw DomainError("PathPolyline: need at least two nodes");
  if (!(hi_ > lo_)) throw DomainError("PathPolyline: empty parameter interval");
  const std::size_t m = nodes_.front().size();
  for (const auto& p : nodes_) {
    if (p.size() != m) throw DomainError("PathPolyline: inconsistent node dimension");
    if (!all_finite(p)) throw DomainError("PathPolyline: non-finite node");
  }
  rebuild();
}

PathPolyline PathPolyline::segment(const Vec& from, const Vec& to, std::size_t node_count,
                                   double param_lo, double param_hi) {
  if (node_count < 2) throw DomainError("PathPolyline::segment: need at least two nodes");
  std::vector<Vec> nodes(node_count, Vec(from.size()));
  for (std::size_t k = 0; k < node_count; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(node_count - 1);
    for (std::size_t i = 0; i < from.size(); ++i) nodes[k][i] = (1.0 - t) * from[i] + t * to[i];
  }
  nodes.back() = to;
  return PathPolyline(std::move(nodes), param_lo, param_hi);
}

void PathPolyline::rebuild() {
  cumulative_.assign(nodes_.size(), 0.0);
  for (std::size_t k = 1; k < nodes_.size(); ++k)
    cumulative_[k] = cumulative_[k - 1] + distance(nodes_[k - 1], nodes_[k]);
}

std::size_t PathPolyline::segment_index(double s) const {
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
  std::size_t k = static_cast<std::size_t>(std::distance(cumulative_.begin(), it));
  k = std::clamp<std::size_t>(k, 1, nodes_.size() - 1);
  // Skip zero-length segments so the interpolation weight is well defined.
  while (k < nodes_.size() - 1 && cumulative_[k] == cumulative_[k - 1]) ++k;
  return k - 1;
}

void PathPolyline::at(double s, std::span<double> out) const {
  const double total = length();
  const double frac = std::clamp((s - lo_) / (hi_ - lo_), 0.0, 1.0);
  const double target = frac * total;
  if (frac <= 0.0 || total == 0.0) {
    std::copy(nodes_.front().begin(), nodes_.front().end(), out.begin());
    return;
  }
  if (frac >= 1.0) {
    std::copy(nodes_.back().begin(), nodes_.back().end(), out.begin());
    return;
  }
  const std::size_t k = segment_index(target);
  const double seg = cumulative_[k + 1] - cumulative_[k];
  const double t = seg > 0.0 ? std::clamp((target - cumulative_[k]) / seg, 0.0, 1.0) : 0.0;
  const Vec& p = nodes_[k];
  const Vec& q = nodes_[k + 1];
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = p[i] + t * (q[i] - p[i]);
}

Vec PathPolyline::at(double s) const {
  Vec out(dimension());
  at(s, out);
  return out;
}

Vec PathPolyline::derivative(double s) const {
  Vec d(dimension(), 0.0);
  const double total = length();
  if (total == 0.0) return d;
  const double frac = std::clamp((s - lo_) / (hi_ - lo_), 0.0, 1.0);
  const std::size_t k = segment_index(frac * total);
  const double seg = cumulative_[k + 1] - cumulative_[k];
  if (seg == 0.0) return d;
  const double speed = sigma();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = speed * (nodes_[k + 1][i] - nodes_[k][i]) / seg;
  return d;
}

PathPolyline PathPolyline::reparametrized(std::size_t count) const {
  if (count < 2) throw DomainError("reparametrized: need at least two nodes");
  std::vector<Vec> out(count, Vec(dimension()));
  const double total = length();
  for (std::size_t k = 0; k < count; ++k) {
    const double s = lo_ + (hi_ - lo_) * static_cast<double>(k) / static_cast<double>(count - 1);
    at(s, out[k]);
  }
  out.front() = nodes_.front();
  out.back() = nodes_.back();
  if (total == 0.0) return PathPolyline(std::move(out), lo_, hi_);
  return PathPolyline(std::move(out), lo_, hi_);
}

PathPolyline PathPolyline::reversed() const {
  std::vector<Vec> rev(nodes_.rbegin(), nodes_.rend());
  return PathPolyline(std::move(rev), lo_, hi_);
}

PathPolyline PathPolyline::with_interval(double lo, double hi) const {
  return PathPolyline(nodes_, lo, hi);
}

double PathPolyline::spacing_deviation() const {
  const std::size_t segs = nodes_.size() - 1;
  const double mean = length() / static_cast<double>(segs);
  if (mean == 0.0) return 0.0;
  double worst = 0.0;
  for (std::size_t k = 0; k < segs; ++k)
    worst = std::max(worst, std::abs((cumulative_[k + 1] - cumulative_[k]) - mean) / mean);
  return worst;
}

PathPolyline concatenate(const PathPolyline& a, const PathPolyline& b, std::size_t count,
                         double lo, double hi) {
  if (distance(a.back(), b.front()) > 1e-12 * (1.0 + norm(a.back())))
    throw DomainError("concatenate: paths do not share an endpoint");
  std::vector<Vec> nodes = a.nodes();
  nodes.insert(nodes.end(), b.nodes().begin() + 1, b.nodes().end());
  return PathPolyline(std::move(nodes), lo, hi).reparametrized(count);
}

}  // namespace metastab
