#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "metastab/errors.hpp"

namespace metastab {

/// Uniform cell-centred grid on [a, b] with n cells.
class Grid1D {
 public:
  Grid1D(double a, double b, std::size_t n) : a_(a), b_(b), n_(n) {
    if (!(b > a)) throw ConfigError("Grid1D: need b > a");
    if (n < 16) throw ConfigError("Grid1D: need at least 16 cells");
  }
  /// Grid with spacing no larger than `max_dx`.
  static Grid1D with_max_spacing(double a, double b, double max_dx);

  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  std::size_t size() const noexcept { return n_; }
  double dx() const noexcept { return (b_ - a_) / static_cast<double>(n_); }
  double x(std::size_t i) const noexcept { return a_ + (static_cast<double>(i) + 0.5) * dx(); }
  /// Left boundary of cell i (i == n gives b).
  double face(std::size_t i) const noexcept { return a_ + static_cast<double>(i) * dx(); }

 private:
  double a_;
  double b_;
  std::size_t n_;
};

/// n samples of R^m stored cell-major.
class Field {
 public:
  Field() = default;
  Field(std::size_t n, std::size_t m, double fill = 0.0) : n_(n), m_(m), data_(n * m, fill) {}

  std::size_t cells() const noexcept { return n_; }
  std::size_t components() const noexcept { return m_; }

  std::span<double> cell(std::size_t i) noexcept { return {data_.data() + i * m_, m_}; }
  std::span<const double> cell(std::size_t i) const noexcept { return {data_.data() + i * m_, m_}; }
  double& operator()(std::size_t i, std::size_t k) noexcept { return data_[i * m_ + k]; }
  double operator()(std::size_t i, std::size_t k) const noexcept { return data_[i * m_ + k]; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  friend bool operator==(const Field&, const Field&) = default;

 private:
  std::size_t n_ = 0;
  std::size_t m_ = 0;
  std::vector<double> data_;
};

inline Grid1D Grid1D::with_max_spacing(double a, double b, double max_dx) {
  if (!(max_dx > 0.0)) throw ConfigError("Grid1D: spacing must be positive");
  const double cells = (b - a) / max_dx;
  auto n = static_cast<std::size_t>(cells);
  if (static_cast<double>(n) < cells * (1.0 - 1e-12)) ++n;
  return Grid1D(a, b, n < 16 ? 16 : n);
}

}  // namespace metastab
