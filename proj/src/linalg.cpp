#include "treeharm/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "treeharm/kernels.hpp"

namespace treeharm::linalg {

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: shape mismatch");
  Matrix bt = transpose(b);
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j)
      c(i, j) = kern::dot(a.row(i), bt.row(j), a.cols());
  return c;
}

Matrix subtract(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("subtract: shape mismatch");
  Matrix c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = a(i, j) - b(i, j);
  return c;
}

double max_abs(const Matrix& a) {
  double m = 0.0;
  for (double v : a.data()) m = std::max(m, std::fabs(v));
  return m;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("max_abs_diff: shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      m = std::max(m, std::fabs(a(i, j) - b(i, j)));
  return m;
}

double bilinear(std::span<const double> x, const Matrix& a,
                std::span<const double> y) {
  if (x.size() != a.rows() || y.size() != a.cols())
    throw std::invalid_argument("bilinear: shape mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    acc += x[i] * kern::dot(a.row(i), y.data(), a.cols());
  return acc;
}

std::vector<double> matvec(const Matrix& a, std::span<const double> x) {
  if (x.size() != a.cols()) throw std::invalid_argument("matvec: shape mismatch");
  std::vector<double> y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    y[i] = kern::dot(a.row(i), x.data(), a.cols());
  return y;
}

Cholesky cholesky(const Matrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("cholesky: not square");
  const std::size_t n = a.rows();
  Cholesky out;
  out.lower = Matrix(n, n);
  Matrix& l = out.lower;
  for (std::size_t j = 0; j < n; ++j) {
    const double d = a(j, j) - kern::dot(l.row(j), l.row(j), j);
    if (!(d > 0.0)) {
      out.ok = false;
      out.pivot_index = static_cast<int>(j);
      out.pivot_value = d;
      return out;
    }
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i)
      l(i, j) = (a(i, j) - kern::dot(l.row(i), l.row(j), j)) / ljj;
  }
  out.ok = true;
  return out;
}

std::vector<double> cholesky_solve(const Matrix& lower,
                                   std::span<const double> b) {
  const std::size_t n = lower.rows();
  if (b.size() != n) throw std::invalid_argument("cholesky_solve: shape mismatch");
  std::vector<double> y(b.begin(), b.end());
  for (std::size_t i = 0; i < n; ++i) {
    y[i] -= kern::dot(lower.row(i), y.data(), i);
    y[i] /= lower(i, i);
  }
  for (std::size_t k = n; k-- > 0;) {
    double acc = y[k];
    for (std::size_t i = k + 1; i < n; ++i) acc -= lower(i, k) * y[i];
    y[k] = acc / lower(k, k);
  }
  return y;
}

std::vector<double> sym_eigenvalues(Matrix a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("sym_eigenvalues: not square");
  const std::size_t n = a.rows();
  if (n == 0) return {};
  const double scale0 = max_abs(a);
  const int max_sweeps = 64;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += std::fabs(a(p, q));
    if (off <= double(n) * 1e-15 * scale0) break;
    const double thresh = (sweep < 3) ? 0.2 * off / double(n * n) : 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        const double scale = 100.0 * std::fabs(apq);
        if (sweep > 3 && std::fabs(a(p, p)) + scale == std::fabs(a(p, p)) &&
            std::fabs(a(q, q)) + scale == std::fabs(a(q, q))) {
          a(p, q) = a(q, p) = 0.0;
          continue;
        }
        if (std::fabs(apq) <= thresh) continue;
        const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        kern::rot(a.row(p), a.row(q), c, s, n);
        for (std::size_t i = 0; i < n; ++i) {
          const double aip = a(i, p);
          const double aiq = a(i, q);
          a(i, p) = c * aip - s * aiq;
          a(i, q) = s * aip + c * aiq;
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

std::vector<double> singular_values(Matrix a) {
  // One-sided Jacobi on the columns; rows of the transpose are contiguous.
  Matrix at = transpose(a);
  const std::size_t n = at.rows();
  const std::size_t m = at.cols();
  if (n == 0) return {};
  const int max_sweeps = 64;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    // Cross products below this floor cannot move any singular value that
    // a 1e-8 relative rank cutoff could see; without the floor, sweeps
    // burn forever on pairs of numerically dead columns.
    double alpha_max = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      alpha_max = std::max(alpha_max, kern::dot(at.row(p), at.row(p), m));
    if (alpha_max == 0.0) break;
    const double floor = 1e-18 * alpha_max;
    bool rotated = false;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double alpha = kern::dot(at.row(p), at.row(p), m);
        const double beta = kern::dot(at.row(q), at.row(q), m);
        const double gamma = kern::dot(at.row(p), at.row(q), m);
        if (alpha == 0.0 || beta == 0.0) continue;
        if (std::fabs(gamma) <= 1e-15 * std::sqrt(alpha * beta)) continue;
        if (std::fabs(gamma) <= floor) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        kern::rot(at.row(p), at.row(q), c, s, m);
      }
    }
    if (!rotated) break;
  }
  std::vector<double> sv(n);
  for (std::size_t i = 0; i < n; ++i)
    sv[i] = std::sqrt(kern::dot(at.row(i), at.row(i), m));
  std::sort(sv.begin(), sv.end(), std::greater<double>());
  return sv;
}

namespace {

bool is_symmetric(const Matrix& a) {
  if (a.rows() != a.cols()) return false;
  const double scale = max_abs(a);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j)
      if (std::fabs(a(i, j) - a(j, i)) > 1e-14 * scale) return false;
  return true;
}

}  // namespace

int numerical_rank(const Matrix& a, double rel_tol) {
  std::vector<double> sv;
  if (is_symmetric(a)) {
    // eigenvalue magnitudes of a symmetric matrix are its singular values
    sv = sym_eigenvalues(a);
    for (double& v : sv) v = std::fabs(v);
    std::sort(sv.begin(), sv.end(), std::greater<double>());
  } else {
    sv = singular_values(a);
  }
  if (sv.empty() || sv.front() == 0.0) return 0;
  const double cut = rel_tol * sv.front();
  int rank = 0;
  for (double s : sv)
    if (s > cut) ++rank;
  return rank;
}

double smallest_eigenvalue(const Matrix& sym) {
  const auto ev = sym_eigenvalues(sym);
  if (ev.empty()) throw std::invalid_argument("smallest_eigenvalue: empty matrix");
  return ev.front();
}

double smallest_eigenvalue_spd(const Matrix& sym, const Matrix& lower,
                               int iters) {
  const std::size_t n = sym.rows();
  std::vector<double> x(n, 1.0);
  double lambda = 0.0;
  // Iterate until the Rayleigh quotient settles; clustered spectra need
  // far more steps than well separated ones.
  for (int it = 0; it < std::max(iters, 5000); ++it) {
    std::vector<double> y = cholesky_solve(lower, x);
    const double norm = std::sqrt(kern::dot(y.data(), y.data(), n));
    if (norm == 0.0) break;
    for (auto& v : y) v /= norm;
    x = std::move(y);
    const auto ax = matvec(sym, x);
    const double next = kern::dot(x.data(), ax.data(), n);
    const bool settled = std::fabs(next - lambda) <= 1e-13 * std::fabs(next);
    lambda = next;
    if (settled && it > 3) break;
  }
  return lambda;
}

}  // namespace treeharm::linalg
