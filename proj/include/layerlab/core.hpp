#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace layerlab {

using Vec = std::vector<double>;

/// Dense row-major square matrix.
struct Matrix {
  std::size_t n = 0;
  std::vector<double> a;

  Matrix() = default;
  explicit Matrix(std::size_t dim) : n(dim), a(dim * dim, 0.0) {}

  static Matrix identity(std::size_t dim) {
    Matrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
    return m;
  }

  double& operator()(std::size_t i, std::size_t j) { return a[i * n + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }

  double trace() const {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += (*this)(i, i);
    return s;
  }
};

/// Invalid parameters or arguments outside an operation's domain.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Adaptive quadrature failed to reach its tolerance.
class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double dot(const Vec& x, const Vec& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

inline double norm(const Vec& x) { return std::sqrt(dot(x, x)); }

inline Vec scaled(const Vec& x, double c) {
  Vec out(x);
  for (double& v : out) v *= c;
  return out;
}

inline bool is_zero(const Vec& x) {
  for (double v : x)
    if (v != 0.0) return false;
  return true;
}

/// Relative Frobenius distance ||a - b|| / ||b||.
inline double relative_frobenius(const Matrix& a, const Matrix& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < b.a.size(); ++k) {
    num += (a.a[k] - b.a[k]) * (a.a[k] - b.a[k]);
    den += b.a[k] * b.a[k];
  }
  return std::sqrt(num / den);
}

}  // namespace layerlab
