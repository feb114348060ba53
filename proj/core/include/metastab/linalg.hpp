#pragma once

// Small dense vectors and matrices for states in R^m (m is expected to be <= 4).

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace metastab {

using Vec = std::vector<double>;

/// Row-major square-or-rectangular dense matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t m);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  std::span<const double> data() const noexcept { return data_; }

  Matrix transposed() const;
  Matrix symmetric_part() const;
  Vec apply(std::span<const double> v) const;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator*=(double s);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator*(double s, Matrix a);

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);
double distance(std::span<const double> a, std::span<const double> b);
bool all_finite(std::span<const double> a);

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
/// Only the upper triangle is read.
Vec symmetric_eigenvalues(const Matrix& a, double tol = 1e-14, int max_sweeps = 100);

/// Solves A x = b in place by Gaussian elimination with partial pivoting.
/// Throws DomainError on a singular matrix.
void solve_in_place(Matrix a, std::span<double> b);

}  // namespace metastab
