#ifndef PHASEMIX_MATRIX_HPP
#define PHASEMIX_MATRIX_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace phasemix {

using Vector = std::vector<double>;

struct SingularMatrixError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnsupportedSpectrumError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ImpossibleObservationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct StructureMismatchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numerical tolerances shared by all kernels. Callers may pass their own.
struct Tolerances {
  double singular_pivot = 1e-12;  // pivot < singular_pivot*||A||_1 is singular
  double eigen_gap = 1e-8;        // min gap > eigen_gap*max|lambda| is simple
  double eigen_imag = 1e-10;      // |Im| < eigen_imag*max|lambda| is real
};

inline const Tolerances& default_tolerances() {
  static const Tolerances tol;
  return tol;
}

/// Dense real matrix, row-major.
class Matrix {
 public:
  Matrix() : rows_(0), cols_(0) {}
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), a_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix I(n, n);
    for (std::size_t i = 0; i < n; ++i) I(i, i) = 1.0;
    return I;
  }

  static Matrix diagonal(const Vector& d) {
    Matrix D(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) D(i, i) = d[i];
    return D;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const {
    return a_[i * cols_ + j];
  }

  bool finite() const {
    for (double x : a_)
      if (!std::isfinite(x)) return false;
    return true;
  }

  Matrix& operator+=(const Matrix& o) {
    check_same_shape(o);
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
    return *this;
  }
  Matrix& operator-=(const Matrix& o) {
    check_same_shape(o);
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
    return *this;
  }
  Matrix& operator*=(double s) {
    for (double& x : a_) x *= s;
    return *this;
  }

  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(Matrix a, double s) { return a *= s; }
  friend Matrix operator*(double s, Matrix a) { return a *= s; }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_)
      throw std::invalid_argument("matrix product: dimension mismatch");
    Matrix c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const double aik = a(i, k);
        if (aik == 0.0) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
      }
    return c;
  }

  /// A*v
  friend Vector operator*(const Matrix& a, const Vector& v) {
    if (a.cols_ != v.size())
      throw std::invalid_argument("matrix-vector product: dimension mismatch");
    Vector r(a.rows_, 0.0);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t j = 0; j < a.cols_; ++j) r[i] += a(i, j) * v[j];
    return r;
  }

  /// v^T * A
  friend Vector operator*(const Vector& v, const Matrix& a) {
    if (a.rows_ != v.size())
      throw std::invalid_argument("vector-matrix product: dimension mismatch");
    Vector r(a.cols_, 0.0);
    for (std::size_t i = 0; i < a.rows_; ++i) {
      const double vi = v[i];
      if (vi == 0.0) continue;
      for (std::size_t j = 0; j < a.cols_; ++j) r[j] += vi * a(i, j);
    }
    return r;
  }

  double norm1() const {  // max column sum
    double best = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < rows_; ++i) s += std::fabs((*this)(i, j));
      if (s > best) best = s;
    }
    return best;
  }

  double max_abs() const {
    double best = 0.0;
    for (double x : a_) best = std::max(best, std::fabs(x));
    return best;
  }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  Matrix block(std::size_t i0, std::size_t j0, std::size_t r,
               std::size_t c) const {
    if (i0 + r > rows_ || j0 + c > cols_)
      throw std::invalid_argument("block out of range");
    Matrix b(r, c);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) b(i, j) = (*this)(i0 + i, j0 + j);
    return b;
  }

 private:
  void check_same_shape(const Matrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_)
      throw std::invalid_argument("matrix shape mismatch");
  }

  std::size_t rows_, cols_;
  std::vector<double> a_;
};

inline Vector basis_vector(std::size_t n, std::size_t i) {
  Vector e(n, 0.0);
  e[i] = 1.0;
  return e;
}

inline Vector ones(std::size_t n) { return Vector(n, 1.0); }

inline double dot(const Vector& a, const Vector& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double sum(const Vector& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

/// AB - BA
inline Matrix commutator(const Matrix& a, const Matrix& b) {
  if (!a.square() || a.rows() != b.rows() || !b.square())
    throw std::invalid_argument("commutator: same square dimension required");
  return a * b - b * a;
}

/// Left-multiplies by diag(d): rows of m scaled by d.
inline Matrix diag_scale_rows(const Vector& d, const Matrix& m) {
  Matrix r = m;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) r(i, j) *= d[i];
  return r;
}

/// Componentwise product of a vector with a diagonal (both length n).
inline Vector diag_apply(const Vector& d, const Vector& v) {
  Vector r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) r[i] = d[i] * v[i];
  return r;
}

}  // namespace phasemix

#endif
