#include "metastab/geodesic.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "metastab/errors.hpp"

namespace metastab {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;

Vec midpoint(const Vec& p, const Vec& q) {
  Vec m(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) m[i] = 0.5 * (p[i] + q[i]);
  return m;
}

double weight(const PotentialSpec& potential, const Vec& x) {
  return kSqrt2 * std::sqrt(std::max(potential.value_unchecked(x), 0.0));
}

double discrete_action(const PotentialSpec& potential, const std::vector<Vec>& nodes) {
  double j = 0.0;
  for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
    const double len = distance(nodes[k], nodes[k + 1]);
    if (len == 0.0) continue;
    j += weight(potential, midpoint(nodes[k], nodes[k + 1])) * len;
  }
  return j;
}

// Action of the polyline itself, 20-point Gauss per segment.
double polyline_action(const PotentialSpec& potential, const std::vector<Vec>& nodes) {
  double j = 0.0;
  Vec z(nodes.front().size());
  for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
    const double len = distance(nodes[k], nodes[k + 1]);
    if (len == 0.0) continue;
    auto f = [&](double t) {
      for (std::size_t i = 0; i < z.size(); ++i) z[i] = nodes[k][i] + t * (nodes[k + 1][i] - nodes[k][i]);
      return weight(potential, z);
    };
    j += boost::math::quadrature::gauss<double, 20>::integrate(f, 0.0, 1.0) * len;
  }
  return j;
}

// Gradient of the discrete action with respect to every node (end nodes included, unused).
std::vector<Vec> action_gradient(const PotentialSpec& potential, const std::vector<Vec>& nodes,
                                 Vec& seg_weight, Vec& seg_length) {
  const std::size_t n = nodes.size();
  const std::size_t m = nodes.front().size();
  std::vector<Vec> grad(n, Vec(m, 0.0));
  seg_weight.assign(n - 1, 0.0);
  seg_length.assign(n - 1, 0.0);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const Vec mid = midpoint(nodes[k], nodes[k + 1]);
    const double f = std::max(potential.value_unchecked(mid), 0.0);
    const double w = kSqrt2 * std::sqrt(f);
    const double len = distance(nodes[k], nodes[k + 1]);
    seg_weight[k] = w;
    seg_length[k] = len;
    if (len == 0.0) continue;
    // d sqrt(2F) = grad F / sqrt(2F); zero where F vanishes.
    Vec gw(m, 0.0);
    if (f > 0.0) {
      const Vec gf = potential.gradient(mid);
      for (std::size_t i = 0; i < m; ++i) gw[i] = gf[i] / w;
    }
    for (std::size_t i = 0; i < m; ++i) {
      const double t = (nodes[k + 1][i] - nodes[k][i]) / len;
      grad[k][i] += 0.5 * len * gw[i] - w * t;
      grad[k + 1][i] += 0.5 * len * gw[i] + w * t;
    }
  }
  return grad;
}

// Solves the Dirichlet chain system (c_{k-1} + c_k) x_k - c_{k-1} x_{k-1} - c_k x_{k+1} = rhs_k for
// interior nodes k = 1..n-2, one coordinate at a time (Thomas algorithm).
void solve_chain(const Vec& c, std::vector<Vec>& rhs) {
  const std::size_t n = rhs.size();
  if (n < 3) return;
  const std::size_t m = rhs.front().size();
  const std::size_t interior = n - 2;
  Vec diag(interior), upper(interior), cprime(interior);
  for (std::size_t k = 0; k < interior; ++k) {
    diag[k] = c[k] + c[k + 1];
    upper[k] = -c[k + 1];
  }
  for (std::size_t i = 0; i < m; ++i) {
    Vec d(interior);
    for (std::size_t k = 0; k < interior; ++k) d[k] = rhs[k + 1][i];
    cprime[0] = upper[0] / diag[0];
    d[0] /= diag[0];
    for (std::size_t k = 1; k < interior; ++k) {
      const double lower = -c[k];
      const double denom = diag[k] - lower * cprime[k - 1];
      cprime[k] = upper[k] / denom;
      d[k] = (d[k] - lower * d[k - 1]) / denom;
    }
    for (std::size_t k = interior - 1; k-- > 0;) d[k] -= cprime[k] * d[k + 1];
    for (std::size_t k = 0; k < interior; ++k) rhs[k + 1][i] = d[k];
  }
}

void remove_tangential(const std::vector<Vec>& nodes, std::vector<Vec>& field) {
  const std::size_t n = nodes.size();
  const std::size_t m = nodes.front().size();
  for (std::size_t k = 1; k + 1 < n; ++k) {
    Vec t(m);
    for (std::size_t i = 0; i < m; ++i) t[i] = nodes[k + 1][i] - nodes[k - 1][i];
    const double tn = norm(t);
    if (tn == 0.0) continue;
    const double proj = dot(field[k], t) / (tn * tn);
    for (std::size_t i = 0; i < m; ++i) field[k][i] -= proj * t[i];
  }
  for (double& x : field.front()) x = 0.0;
  for (double& x : field.back()) x = 0.0;
}

std::vector<std::size_t> level_sizes(std::size_t target) {
  std::vector<std::size_t> sizes;
  for (std::size_t n = 17; n < target; n = 2 * n - 1) sizes.push_back(n);
  sizes.push_back(target);
  return sizes;
}

struct LevelOutcome {
  bool converged = false;
  std::size_t sweeps = 0;
};

LevelOutcome relax(const PotentialSpec& potential, PathPolyline& path, const PathOptions& opt,
                   std::size_t sweep_budget) {
  LevelOutcome out;
  std::vector<Vec> nodes = path.nodes();
  double J = discrete_action(potential, nodes);
  double eta = 1.0;
  Vec w, len;
  while (out.sweeps < sweep_budget) {
    ++out.sweeps;
    std::vector<Vec> g = action_gradient(potential, nodes, w, len);
    remove_tangential(nodes, g);
    double gmax = 0.0;
    for (std::size_t k = 1; k + 1 < nodes.size(); ++k) gmax = std::max(gmax, norm(g[k]));
    if (gmax <= 1e-15 * std::max(J, 1e-300) || nodes.size() < 3) {
      out.converged = true;
      break;
    }
    // Precondition with the weighted second-difference operator of the length term.
    Vec c(w.size());
    double cmax = 0.0;
    for (std::size_t s = 0; s < w.size(); ++s) {
      c[s] = len[s] > 0.0 ? w[s] / len[s] : 0.0;
      cmax = std::max(cmax, c[s]);
    }
    if (cmax == 0.0) {
      out.converged = true;
      break;
    }
    for (double& x : c) x = std::max(x, 1e-12 * cmax);
    for (auto& v : g)
      for (double& x : v) x = -x;
    solve_chain(c, g);
    remove_tangential(nodes, g);

    bool accepted = false;
    double J_trial = J;
    std::vector<Vec> trial_nodes;
    eta = std::min(1.0, 2.0 * eta);
    for (int attempt = 0; attempt < 40; ++attempt, eta *= 0.5) {
      std::vector<Vec> trial = nodes;
      for (std::size_t k = 1; k + 1 < trial.size(); ++k)
        for (std::size_t i = 0; i < trial[k].size(); ++i) trial[k][i] += eta * g[k][i];
      PathPolyline candidate = PathPolyline(std::move(trial)).reparametrized(nodes.size());
      J_trial = discrete_action(potential, candidate.nodes());
      if (J_trial < J) {
        trial_nodes = candidate.nodes();
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // No descent direction survives the reparametrization: discretization floor reached.
      out.converged = true;
      break;
    }
    const double decrease = J - J_trial;
    nodes = std::move(trial_nodes);
    J = J_trial;
    if (decrease < opt.tol_path * J) {
      out.converged = true;
      break;
    }
  }
  path = PathPolyline(std::move(nodes));
  return out;
}

PathPolyline initial_guess(const Vec& from, const Vec& to, std::size_t count, double bump) {
  PathPolyline seg = PathPolyline::segment(from, to, count);
  const std::size_t m = from.size();
  if (m < 2 || bump == 0.0) return seg;
  Vec chord(m);
  for (std::size_t i = 0; i < m; ++i) chord[i] = to[i] - from[i];
  const double L = norm(chord);
  if (L == 0.0) return seg;
  for (double& x : chord) x /= L;
  std::size_t axis = 0;
  for (std::size_t i = 1; i < m; ++i)
    if (std::abs(chord[i]) < std::abs(chord[axis])) axis = i;
  Vec normal(m, 0.0);
  normal[axis] = 1.0;
  const double proj = chord[axis];
  for (std::size_t i = 0; i < m; ++i) normal[i] -= proj * chord[i];
  const double nn = norm(normal);
  for (double& x : normal) x /= nn;
  std::vector<Vec> nodes = seg.nodes();
  for (std::size_t k = 1; k + 1 < count; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(count - 1);
    const double amp = bump * L * std::sin(M_PI * t);
    for (std::size_t i = 0; i < m; ++i) nodes[k][i] += amp * normal[i];
  }
  return PathPolyline(std::move(nodes));
}

PathResult optimize_impl(const PotentialSpec& potential, const Vec& from, const Vec& to,
                         const PathOptions& opt, int depth) {
  PathResult res;
  const std::size_t count = std::max<std::size_t>(opt.nodes, 3);
  if (distance(from, to) == 0.0) {
    res.path = PathPolyline(std::vector<Vec>(count, from));
    res.action = 0.0;
    res.converged = true;
    return res;
  }
  const auto sizes = level_sizes(count);
  PathPolyline path = initial_guess(from, to, sizes.front(), opt.bump);
  bool converged = true;
  for (std::size_t lvl = 0; lvl < sizes.size(); ++lvl) {
    if (lvl > 0) path = path.reparametrized(sizes[lvl]);
    const std::size_t budget = opt.max_sweeps > res.sweeps ? opt.max_sweeps - res.sweeps : 0;
    const LevelOutcome o = relax(potential, path, opt, budget);
    res.sweeps += o.sweeps;
    converged = o.converged;
    if (!converged && lvl + 1 < sizes.size()) {
      // Out of budget on a coarse level: carry the best path up without further sweeps.
      for (std::size_t rest = lvl + 1; rest < sizes.size(); ++rest) path = path.reparametrized(sizes[rest]);
      break;
    }
  }

  // Split at an intermediate well the path runs through.
  if (depth < 4) {
    std::size_t best_well = potential.well_count();
    double best_dist = opt.rho_split;
    for (std::size_t j = 0; j < potential.well_count(); ++j) {
      const Vec& z = potential.zeros()[j];
      if (distance(z, from) <= opt.rho_split || distance(z, to) <= opt.rho_split) continue;
      for (std::size_t k = 1; k + 1 < path.node_count(); ++k) {
        const double d = distance(path.nodes()[k], z);
        if (d < best_dist) {
          best_dist = d;
          best_well = j;
        }
      }
    }
    if (best_well < potential.well_count()) {
      const Vec& z = potential.zeros()[best_well];
      PathResult first = optimize_impl(potential, from, z, opt, depth + 1);
      PathResult second = optimize_impl(potential, z, to, opt, depth + 1);
      res.path = concatenate(first.path, second.path, count);
      res.action = polyline_action(potential, res.path.nodes());
      res.converged = first.converged && second.converged;
      res.sweeps += first.sweeps + second.sweeps;
      res.split_wells = first.split_wells;
      res.split_wells.push_back(best_well);
      res.split_wells.insert(res.split_wells.end(), second.split_wells.begin(), second.split_wells.end());
      res.warnings = first.warnings;
      res.warnings.insert(res.warnings.end(), second.warnings.begin(), second.warnings.end());
      return res;
    }
  }

  res.path = std::move(path);
  res.action = polyline_action(potential, res.path.nodes());
  res.converged = converged;
  if (!converged) {
    std::ostringstream os;
    os << "path optimizer stopped after " << res.sweeps << " sweeps without meeting tol_path; J = " << res.action;
    res.warnings.push_back(os.str());
  }
  if (potential.dimension() >= 3)
    res.warnings.push_back("m >= 3: the returned path is a local minimizer only");
  return res;
}

}  // namespace

double action_J(const PotentialSpec& potential, const PathPolyline& path) {
  for (const auto& p : path.nodes())
    if (!all_finite(p)) throw DomainError("action_J: non-finite node");
  return discrete_action(potential, path.nodes());
}

double phi_scalar(const PotentialSpec& potential, double xi1, double xi2) {
  if (potential.dimension() != 1) throw DomainError("phi_scalar: potential is not scalar");
  if (!std::isfinite(xi1) || !std::isfinite(xi2)) throw DomainError("phi_scalar: non-finite endpoint");
  double lo = std::min(xi1, xi2);
  const double hi = std::max(xi1, xi2);
  if (lo == hi) return 0.0;
  Vec cuts;
  for (const auto& z : potential.zeros())
    if (z[0] > lo && z[0] < hi) cuts.push_back(z[0]);
  std::sort(cuts.begin(), cuts.end());
  cuts.push_back(hi);
  auto integrand = [&potential](double s) {
    const double x[1] = {s};
    return kSqrt2 * std::sqrt(std::max(potential.value_unchecked(x), 0.0));
  };
  double total = 0.0;
  for (double c : cuts) {
    double err = 0.0;
    total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, lo, c, 20, 1e-15, &err);
    lo = c;
  }
  return total;
}

PathResult optimize_path(const PotentialSpec& potential, const Vec& from, const Vec& to,
                         const PathOptions& options) {
  if (from.size() != potential.dimension() || to.size() != potential.dimension())
    throw DomainError("optimize_path: endpoint dimension mismatch");
  if (!all_finite(from) || !all_finite(to)) throw DomainError("optimize_path: non-finite endpoint");
  return optimize_impl(potential, from, to, options, 0);
}

PathResult optimal_path(const PotentialSpec& potential, std::size_t i, std::size_t j,
                        const PathOptions& options) {
  if (i >= potential.well_count() || j >= potential.well_count()) throw DomainError("optimal_path: well index out of range");
  if (i == j) throw DomainError("optimal_path: endpoints must be distinct zeros");
  return optimize_path(potential, potential.zeros()[i], potential.zeros()[j], options);
}

double phi(const PotentialSpec& potential, const Vec& xi1, const Vec& xi2, const PathOptions& options) {
  if (xi1.size() != potential.dimension() || xi2.size() != potential.dimension())
    throw DomainError("phi: dimension mismatch");
  if (potential.dimension() == 1) return phi_scalar(potential, xi1[0], xi2[0]);
  PathResult r = optimize_path(potential, xi1, xi2, options);
  if (!r.converged) throw NonConvergenceError("phi: path optimizer did not converge", r.action);
  return r.action;
}

MetricTable build_metric_table(const PotentialSpec& potential, const PathOptions& options, bool concurrent) {
  const std::size_t K = potential.well_count();
  const bool scalar = potential.dimension() == 1;
  MetricTable table;
  table.values = Matrix(K, K);
  table.paths.assign(K, std::vector<std::optional<PathPolyline>>(K));
  table.relative_tolerance = !scalar;
  table.tolerance = scalar ? 1e-6 : 2e-2;

  struct PairResult {
    double value;
    PathPolyline path;
    std::vector<std::string> warnings;
  };
  auto solve_pair = [&potential, &options, scalar](std::size_t i, std::size_t j) {
    const Vec& zi = potential.zeros()[i];
    const Vec& zj = potential.zeros()[j];
    if (scalar) {
      // Straight segment, unit speed on a parameter interval centred at 0.
      const double L = std::abs(zj[0] - zi[0]);
      return PairResult{phi_scalar(potential, zi[0], zj[0]),
                        PathPolyline::segment(zi, zj, options.nodes, -0.5 * L, 0.5 * L), {}};
    }
    PathResult r = optimize_path(potential, zi, zj, options);
    return PairResult{r.action, r.path, r.warnings};
  };

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < K; ++i)
    for (std::size_t j = i + 1; j < K; ++j) pairs.emplace_back(i, j);
  std::vector<PairResult> results;
  results.reserve(pairs.size());
  if (concurrent && pairs.size() > 1) {
    std::vector<std::future<PairResult>> futures;
    for (auto [i, j] : pairs) futures.push_back(std::async(std::launch::async, solve_pair, i, j));
    for (auto& f : futures) results.push_back(f.get());
  } else {
    for (auto [i, j] : pairs) results.push_back(solve_pair(i, j));
  }
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto [i, j] = pairs[p];
    table.values(i, j) = table.values(j, i) = results[p].value;
    table.paths[i][j] = results[p].path;
    table.paths[j][i] = results[p].path.reversed();
    table.warnings.insert(table.warnings.end(), results[p].warnings.begin(), results[p].warnings.end());
  }

  // Chains through other wells are admissible paths too.
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t i = 0; i < K; ++i)
      for (std::size_t j = 0; j < K; ++j) {
        if (i == j || i == k || j == k) continue;
        const double via = table.values(i, k) + table.values(k, j);
        if (via < table.values(i, j) - table.tolerance_for(via) * 1e-3) {
          table.values(i, j) = via;
          const PathPolyline& a = *table.paths[i][k];
          const PathPolyline& b = *table.paths[k][j];
          table.paths[i][j] = concatenate(a.with_interval(0, 1), b.with_interval(0, 1), options.nodes);
          if (scalar) {
            const double L = table.paths[i][j]->length();
            table.paths[i][j] = table.paths[i][j]->with_interval(-0.5 * L, 0.5 * L);
          }
          ++table.closure_updates;
        }
      }

  for (std::size_t i = 0; i < K; ++i)
    for (std::size_t j = 0; j < K; ++j)
      if (i != j) table.sigma_max = std::max(table.sigma_max, table.paths[i][j]->sigma());
  return table;
}

MetricAxiomReport check_metric_axioms(const MetricTable& table) {
  MetricAxiomReport rep;
  const std::size_t K = table.size();
  for (std::size_t i = 0; i < K; ++i) {
    rep.max_diagonal = std::max(rep.max_diagonal, std::abs(table(i, i)));
    if (table(i, i) != 0.0) rep.pass = false;
    for (std::size_t j = 0; j < K; ++j) {
      const double asym = std::abs(table(i, j) - table(j, i));
      rep.max_asymmetry = std::max(rep.max_asymmetry, asym);
      if (asym > table.tolerance_for(table(i, j))) rep.pass = false;
      for (std::size_t k = 0; k < K; ++k) {
        const double excess = table(i, k) - table(i, j) - table(j, k);
        rep.max_triangle_excess = std::max(rep.max_triangle_excess, excess);
        if (excess > table.tolerance_for(table(i, k))) rep.pass = false;
      }
    }
  }
  return rep;
}

double asymptotic_energy_P0(const PotentialSpec& potential, const StepFunction& v, const MetricTable& table) {
  if (table.size() != potential.well_count()) throw DomainError("asymptotic_energy_P0: table does not match potential");
  double total = 0.0;
  for (std::size_t i = 0; i < v.jump_count(); ++i) {
    const std::size_t from = v.plateaus.at(i);
    const std::size_t to = v.plateaus.at(i + 1);
    if (from >= table.size() || to >= table.size())
      throw DomainError("asymptotic_energy_P0: step value is not a listed zero");
    total += table(from, to);
  }
  return total;
}

}  // namespace metastab
