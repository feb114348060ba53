#include "metastab/layer_profile.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>

#include "metastab/errors.hpp"
#include "metastab/sampling.hpp"
#include "metastab/solver.hpp"

namespace metastab {

namespace {

namespace odeint = boost::numeric::odeint;
using OdeState = std::array<double, 1>;

double gk(const std::function<double(double)>& f, const Vec& pts) {
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    if (!(pts[k + 1] > pts[k])) continue;
    double err = 0.0;
    total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, pts[k], pts[k + 1], 15, 1e-14, &err);
  }
  return total;
}

struct HalfProfile {
  Vec w;
  Vec dw;
  bool clamped = false;
};

/// Integrates dw/dy = dir * rate(w) from w(0) = mid, sampling every h, until |w - target| <= tol.
HalfProfile integrate_half(const PotentialSpec& potential, const PathPolyline& path, double dir, double target,
                           const ProfileOptions& opt) {
  HalfProfile out;
  const double mid = path.param_mid();
  auto rhs = [&](const OdeState& x, OdeState& dxdy, double) {
    const Vec p = path.at(x[0]);
    const double F = potential.value_unchecked(p);
    if (F < 0.0) out.clamped = true;
    dxdy[0] = dir * std::sqrt(2.0 * std::max(F, 0.0)) / path.sigma();
  };
  auto stepper = odeint::make_controlled(opt.abs_tol, opt.rel_tol, odeint::runge_kutta_dopri5<OdeState>());
  OdeState s{mid};
  double dt = 0.1 * opt.sample_step;
  out.w.push_back(mid);
  OdeState d{};
  rhs(s, d, 0.0);
  out.dw.push_back(dir * d[0]);
  std::size_t k = 1;
  while (true) {
    const double y_prev = static_cast<double>(k - 1) * opt.sample_step;
    const double y_next = static_cast<double>(k) * opt.sample_step;
    if (y_next > opt.y_max) {
      std::ostringstream os;
      os << "profile does not reach the path endpoint within |y| <= " << opt.y_max << " (w = " << out.w.back() << ")";
      throw NonConvergenceError(os.str(), out.w.back());
    }
    // Chunks end exactly on the sample grid, so no interpolation of the stepper is involved.
    odeint::integrate_adaptive(stepper, rhs, s, y_prev, y_next, std::min(dt, opt.sample_step));
    rhs(s, d, y_next);
    out.w.push_back(s[0]);
    out.dw.push_back(dir * d[0]);
    ++k;
    if (std::abs(s[0] - target) <= opt.tol_tail) break;
  }
  return out;
}

}  // namespace

ProfileCurve::ProfileCurve(double y0, double h, Vec w, Vec dw, double a_w, double b_w, double mid, bool clamped)
    : y0_(y0), h_(h), w_(std::move(w)), dw_(std::move(dw)), a_w_(a_w), b_w_(b_w), mid_(mid), clamped_(clamped) {
  if (w_.size() < 2 || w_.size() != dw_.size() || !(h_ > 0.0)) throw ConfigError("ProfileCurve: bad samples");
  monotone_ = true;
  for (std::size_t i = 0; i + 1 < w_.size(); ++i)
    if (!(w_[i + 1] > w_[i])) monotone_ = false;
}

double ProfileCurve::operator()(double y) const {
  const double t = (y - y0_) / h_;
  if (t <= 0.0) return w_.front();
  const auto last = static_cast<double>(w_.size() - 1);
  if (t >= last) return w_.back();
  const auto i = static_cast<std::size_t>(t);
  const double s = t - static_cast<double>(i);
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * w_[i] + (s3 - 2 * s2 + s) * h_ * dw_[i] + (-2 * s3 + 3 * s2) * w_[i + 1] +
         (s3 - s2) * h_ * dw_[i + 1];
}

double ProfileCurve::derivative(double y) const {
  const double t = (y - y0_) / h_;
  const auto last = static_cast<double>(w_.size() - 1);
  if (t <= 0.0 || t >= last) return 0.0;
  const auto i = static_cast<std::size_t>(t);
  const double s = t - static_cast<double>(i);
  const double s2 = s * s;
  return ((6 * s2 - 6 * s) * w_[i] + (-6 * s2 + 6 * s) * w_[i + 1]) / h_ + (3 * s2 - 4 * s + 1) * dw_[i] +
         (3 * s2 - 2 * s) * dw_[i + 1];
}

double profile_rate(const PotentialSpec& potential, const PathPolyline& path, double w) {
  const Vec p = path.at(w);
  return std::sqrt(2.0 * std::max(potential.value_unchecked(p), 0.0)) / path.sigma();
}

ProfileCurve solve_profile_ode(const PotentialSpec& potential, const PathPolyline& path, const ProfileOptions& opt) {
  if (path.node_count() < 2 || path.dimension() != potential.dimension())
    throw ConfigError("solve_profile_ode: path does not match the potential");
  if (!(path.length() > 0.0)) throw ConfigError("solve_profile_ode: degenerate path");
  if (!(opt.sample_step > 0.0) || !(opt.tol_tail > 0.0)) throw ConfigError("solve_profile_ode: bad options");
  const double lo = path.param_lo(), hi = path.param_hi();
  HalfProfile fwd = integrate_half(potential, path, 1.0, hi, opt);
  HalfProfile bwd = integrate_half(potential, path, -1.0, lo, opt);
  Vec w, dw;
  w.reserve(fwd.w.size() + bwd.w.size());
  dw.reserve(w.capacity());
  for (std::size_t i = bwd.w.size(); i-- > 1;) {
    w.push_back(bwd.w[i]);
    dw.push_back(bwd.dw[i]);
  }
  w.insert(w.end(), fwd.w.begin(), fwd.w.end());
  dw.insert(dw.end(), fwd.dw.begin(), fwd.dw.end());
  const double y0 = -static_cast<double>(bwd.w.size() - 1) * opt.sample_step;
  return ProfileCurve(y0, opt.sample_step, std::move(w), std::move(dw), lo, hi, path.param_mid(),
                      fwd.clamped || bwd.clamped);
}

std::vector<JumpLayer> build_layers(const PotentialSpec& potential, const StepFunction& v, const MetricTable& table,
                                    const ProfileOptions& options) {
  v.validate(potential);
  const auto& zeros = potential.zeros();
  if (table.size() != zeros.size()) throw ConfigError("build_layers: table does not cover the potential's wells");
  std::vector<JumpLayer> layers;
  layers.reserve(v.jump_count());
  for (std::size_t i = 0; i < v.jump_count(); ++i) {
    JumpLayer L;
    L.gamma = v.jumps[i];
    L.from = v.plateaus[i];
    L.to = v.plateaus[i + 1];
    if (potential.dimension() == 1) {
      const double len = distance(zeros[L.from], zeros[L.to]);
      L.path = PathPolyline::segment(zeros[L.from], zeros[L.to], 2, -0.5 * len, 0.5 * len);
    } else {
      const auto& p = table.paths.at(L.from).at(L.to);
      if (!p) throw ConfigError("build_layers: table has no path for a jump of v");
      L.path = p->with_interval(0.0, 1.0);
    }
    L.profile = solve_profile_ode(potential, L.path, options);
    layers.push_back(std::move(L));
  }
  return layers;
}

InitialDatum::InitialDatum(PotentialSpec potential, StepFunction v, double eps, std::vector<JumpLayer> layers)
    : potential_(std::move(potential)), v_(std::move(v)), eps_(eps), layers_(std::move(layers)) {
  v_.validate(potential_);
  if (!(eps_ > 0.0)) throw ConfigError("InitialDatum: eps must be positive");
  if (v_.jump_count() > 0 && !(eps_ < v_.r)) throw ConfigError("InitialDatum: need eps < r");
  if (layers_.size() != v_.jump_count()) throw ConfigError("InitialDatum: one layer per jump required");
}

const JumpLayer* InitialDatum::layer_containing(double x) const {
  for (const auto& L : layers_)
    if (std::abs(x - L.gamma) < v_.r) return &L;
  return nullptr;
}

bool InitialDatum::in_core(double x) const {
  for (const auto& L : layers_)
    if (std::abs(x - L.gamma) <= v_.r - eps_) return true;
  return false;
}

Vec InitialDatum::at(double x) const {
  const JumpLayer* L = layer_containing(x);
  if (!L) return v_.value_at(potential_, x);
  const auto& zeros = potential_.zeros();
  const double r = v_.r;
  const double d = x - L->gamma;
  if (std::abs(d) <= r - eps_) return L->path.at(L->profile(d / eps_));
  if (d < 0.0) {
    const Vec& vm = zeros[L->from];
    const Vec edge = L->path.at(L->profile(1.0 - r / eps_));
    Vec out(vm);
    const double t = (d + r) / eps_;
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += t * (edge[k] - vm[k]);
    return out;
  }
  const Vec& vp = zeros[L->to];
  const Vec edge = L->path.at(L->profile(r / eps_ - 1.0));
  Vec out(vp);
  const double t = (r - d) / eps_;
  for (std::size_t k = 0; k < out.size(); ++k) out[k] += t * (edge[k] - vp[k]);
  return out;
}

Vec InitialDatum::derivative(double x) const {
  const JumpLayer* L = layer_containing(x);
  const std::size_t m = potential_.dimension();
  if (!L) return Vec(m, 0.0);
  const auto& zeros = potential_.zeros();
  const double r = v_.r;
  const double d = x - L->gamma;
  if (d >= -(r - eps_) && d < r - eps_) {
    const double w = L->profile(d / eps_);
    Vec t = L->path.derivative(w);
    const double rate = profile_rate(potential_, L->path, w) / eps_;
    for (double& c : t) c *= rate;
    return t;
  }
  Vec out(m);
  if (d < 0.0) {
    const Vec edge = L->path.at(L->profile(1.0 - r / eps_));
    for (std::size_t k = 0; k < m; ++k) out[k] = (edge[k] - zeros[L->from][k]) / eps_;
  } else {
    const Vec edge = L->path.at(L->profile(r / eps_ - 1.0));
    for (std::size_t k = 0; k < m; ++k) out[k] = -(edge[k] - zeros[L->to][k]) / eps_;
  }
  return out;
}

Field InitialDatum::sample(const Grid1D& grid) const {
  if (grid.a() != v_.a || grid.b() != v_.b) throw ConfigError("InitialDatum: grid interval differs from v");
  if (grid.dx() > eps_ / 10.0 * (1.0 + 1e-12)) throw ConfigError("InitialDatum: grid must resolve eps (dx <= eps/10)");
  Field u(grid.size(), potential_.dimension());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec p = at(grid.x(i));
    std::copy(p.begin(), p.end(), u.cell(i).begin());
  }
  return u;
}

Field InitialDatum::sample_target(const Grid1D& grid) const {
  Field u(grid.size(), potential_.dimension());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec& p = v_.value_at(potential_, grid.x(i));
    std::copy(p.begin(), p.end(), u.cell(i).begin());
  }
  return u;
}

Vec InitialDatum::breakpoints(double c, double d) const {
  Vec pts{c, d};
  const double r = v_.r;
  for (const auto& L : layers_)
    for (double o : {-r, -(r - eps_), 0.0, r - eps_, r}) pts.push_back(L.gamma + o);
  std::sort(pts.begin(), pts.end());
  Vec out;
  for (double p : pts)
    if (p >= c && p <= d && (out.empty() || p > out.back())) out.push_back(p);
  return out;
}

double InitialDatum::continuum_energy(double c, double d) const {
  if (!(d > c) || c < v_.a || d > v_.b) throw ConfigError("continuum_energy: bad interval");
  auto f = [this](double x) {
    const Vec u = at(x);
    const Vec du = derivative(x);
    return 0.5 * eps_ * dot(du, du) + std::max(potential_.value_unchecked(u), 0.0) / eps_;
  };
  return gk(f, breakpoints(c, d));
}

double InitialDatum::continuum_l1_to_target() const {
  auto f = [this](double x) { return distance(at(x), v_.value_at(potential_, x)); };
  return gk(f, breakpoints(v_.a, v_.b));
}

InitialDatum build_initial_datum(const PotentialSpec& potential, const StepFunction& v, double eps,
                                 const MetricTable& table, const ProfileOptions& options) {
  if (v.jump_count() > 0 && !(eps < v.r)) throw ConfigError("build_initial_datum: need eps < r");
  return InitialDatum(potential, v, eps, build_layers(potential, v, table, options));
}

double equipartition_residual(const InitialDatum& datum, const Grid1D& grid) {
  const Field u = datum.sample(grid);
  const double eps = datum.eps();
  const double h = grid.dx();
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
    if (!datum.in_core(grid.x(i - 1)) || !datum.in_core(grid.x(i + 1))) continue;
    double g2 = 0.0;
    for (std::size_t k = 0; k < u.components(); ++k) {
      const double d = (u(i + 1, k) - u(i - 1, k)) / (2.0 * h);
      g2 += d * d;
    }
    worst = std::max(worst, std::abs(0.5 * eps * eps * g2 - datum.potential().value_unchecked(u.cell(i))));
  }
  return worst;
}

std::string to_string(VelocityKind kind) { return kind == VelocityKind::zero ? "zero" : "scaled_noise"; }

VelocityKind parse_velocity_kind(const std::string& text) {
  if (text == "zero") return VelocityKind::zero;
  if (text == "scaled_noise") return VelocityKind::scaled_noise;
  throw ConfigError("unknown velocity kind '" + text + "'");
}

Field rescale_velocity(Field u1, const Grid1D& grid, double eps, double tau, double A_target, double C_target) {
  double norm2 = 0.0;
  for (double x : u1.values()) norm2 += x * x;
  norm2 *= grid.dx();
  if (norm2 == 0.0) return u1;
  const double target = C_target * eps * std::exp(-A_target / eps) / tau;
  const double scale = std::sqrt(target / norm2);
  for (double& x : u1.values()) x *= scale;
  return u1;
}

Field build_initial_velocity(VelocityKind kind, double eps, double tau, double A_target, double C_target,
                             const Grid1D& grid, std::size_t components, std::uint64_t seed) {
  if (!(eps > 0.0) || !(tau > 0.0)) throw ConfigError("build_initial_velocity: eps and tau must be positive");
  Field u1(grid.size(), components);
  if (kind == VelocityKind::zero) return u1;
  if (!(A_target > 0.0) || !(C_target > 0.0))
    throw ConfigError("build_initial_velocity: A_target and C_target must be positive");
  constexpr std::size_t kModes = 8;
  constexpr double kPi = 3.14159265358979323846;
  std::mt19937_64 rng(seed);
  std::vector<double> coeff(kModes * components);
  for (std::size_t j = 0; j < coeff.size(); ++j) {
    const double k = static_cast<double>(j / components + 1);
    coeff[j] = (2.0 * unit_from_bits(rng()) - 1.0) / k;
  }
  const double len = grid.b() - grid.a();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double xi = (grid.x(i) - grid.a()) / len;
    for (std::size_t c = 0; c < components; ++c) {
      double s = 0.0;
      for (std::size_t k = 0; k < kModes; ++k) s += coeff[k * components + c] * std::cos(static_cast<double>(k + 1) * kPi * xi);
      u1(i, c) = s;
    }
  }
  return rescale_velocity(std::move(u1), grid, eps, tau, A_target, C_target);
}

StructureReport verify_transition_layer_structure(const Grid1D& grid, const Field& u0, const Field& v_sampled,
                                                  const PotentialSpec& potential, double eps, double P0,
                                                  double non_layer_factor) {
  if (u0.cells() != grid.size() || v_sampled.cells() != grid.size()) throw ConfigError("structure check: shape mismatch");
  StructureReport rep;
  rep.l1_to_v = l1_distance(grid, u0, v_sampled);
  rep.grid_energy = energy_P(grid, u0, eps, potential);
  rep.energy = rep.grid_energy;
  rep.P0 = P0;
  rep.excess = rep.energy - P0;
  const double ratio = grid.dx() / eps;
  rep.tolerance = 1e-8 + ratio * ratio * P0;
  rep.layer_structure = rep.excess <= non_layer_factor * (1.0 + P0);
  if (rep.excess < -rep.tolerance) {
    std::ostringstream os;
    os << "energy " << rep.energy << " lies below the asymptotic energy " << P0 << " by more than " << rep.tolerance;
    throw InconsistencyError(os.str());
  }
  return rep;
}

StructureReport verify_transition_layer_structure(const InitialDatum& datum, const Grid1D& grid, double P0,
                                                  double non_layer_factor, double p0_uncertainty) {
  const Field u0 = datum.sample(grid);
  const Field v = datum.sample_target(grid);
  StructureReport rep;
  rep.l1_to_v = l1_distance(grid, u0, v);
  rep.grid_energy = energy_P(grid, u0, datum.eps(), datum.potential());
  rep.energy = datum.continuum_energy();
  rep.continuum = true;
  rep.P0 = P0;
  rep.excess = rep.energy - P0;
  rep.tolerance = 1e-8 + std::max(p0_uncertainty, 0.0);
  rep.layer_structure = rep.excess <= non_layer_factor * (1.0 + P0);
  if (rep.excess < -rep.tolerance) {
    std::ostringstream os;
    os << "energy " << rep.energy << " lies below the asymptotic energy " << P0 << " by more than " << rep.tolerance;
    throw InconsistencyError(os.str());
  }
  return rep;
}

}  // namespace metastab
