#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace treeharm::linalg {

// Dense row-major matrix. Rows are contiguous so the kern:: loops apply
// directly to row slices.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double* row(std::size_t i) { return data_.data() + i * cols_; }
  const double* row(std::size_t i) const { return data_.data() + i * cols_; }
  std::span<const double> data() const { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix transpose(const Matrix& a);
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix subtract(const Matrix& a, const Matrix& b);
double max_abs(const Matrix& a);
double max_abs_diff(const Matrix& a, const Matrix& b);
// x^T A y
double bilinear(std::span<const double> x, const Matrix& a, std::span<const double> y);
std::vector<double> matvec(const Matrix& a, std::span<const double> x);

struct Cholesky {
  bool ok = false;
  Matrix lower;       // A = L L^T when ok
  int pivot_index = -1;
  double pivot_value = 0.0;  // the offending pivot when !ok
};

Cholesky cholesky(const Matrix& sym);
// Solves A x = b with the lower factor of A.
std::vector<double> cholesky_solve(const Matrix& lower, std::span<const double> b);

// Cyclic Jacobi; ascending eigenvalues of a symmetric matrix.
std::vector<double> sym_eigenvalues(Matrix a);
// One-sided Jacobi; descending singular values of a general matrix.
std::vector<double> singular_values(Matrix a);
// Count of singular values above rel_tol * max singular value.
int numerical_rank(const Matrix& a, double rel_tol = 1e-8);
double smallest_eigenvalue(const Matrix& sym);
// Inverse-iteration estimate for an SPD matrix with a ready factor.
// Much cheaper than a full eigensolve at the sizes used here.
double smallest_eigenvalue_spd(const Matrix& sym, const Matrix& lower,
                               int iters = 60);

}  // namespace treeharm::linalg
