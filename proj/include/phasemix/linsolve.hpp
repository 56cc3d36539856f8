#ifndef PHASEMIX_LINSOLVE_HPP
#define PHASEMIX_LINSOLVE_HPP

#include <cmath>
#include <utility>

#include "phasemix/matrix.hpp"

namespace phasemix {

/// LU factorization with partial pivoting. Throws SingularMatrixError when the
/// smallest pivot falls below tol.singular_pivot * ||A||_1.
class LuFactorization {
 public:
  explicit LuFactorization(Matrix a,
                           const Tolerances& tol = default_tolerances())
      : lu_(std::move(a)), perm_(lu_.rows()), sign_(1.0) {
    if (!lu_.square()) throw std::invalid_argument("lu: square matrix required");
    if (!lu_.finite()) throw std::invalid_argument("lu: non-finite entries");
    const std::size_t n = lu_.rows();
    const double cutoff = tol.singular_pivot * lu_.norm1();
    for (std::size_t i = 0; i < n; ++i) perm_[i] = i;
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t piv = k;
      for (std::size_t i = k + 1; i < n; ++i)
        if (std::fabs(lu_(i, k)) > std::fabs(lu_(piv, k))) piv = i;
      if (std::fabs(lu_(piv, k)) <= cutoff)
        throw SingularMatrixError("matrix singular to tolerance");
      if (piv != k) {
        for (std::size_t j = 0; j < n; ++j)
          std::swap(lu_(k, j), lu_(piv, j));
        std::swap(perm_[k], perm_[piv]);
        sign_ = -sign_;
      }
      for (std::size_t i = k + 1; i < n; ++i) {
        lu_(i, k) /= lu_(k, k);
        const double f = lu_(i, k);
        if (f == 0.0) continue;
        for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= f * lu_(k, j);
      }
    }
  }

  Vector solve(const Vector& b) const {
    const std::size_t n = lu_.rows();
    Vector x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[perm_[i]];
    for (std::size_t i = 1; i < n; ++i)
      for (std::size_t j = 0; j < i; ++j) x[i] -= lu_(i, j) * x[j];
    for (std::size_t ii = n; ii-- > 0;) {
      for (std::size_t j = ii + 1; j < n; ++j) x[ii] -= lu_(ii, j) * x[j];
      x[ii] /= lu_(ii, ii);
    }
    return x;
  }

  Matrix solve(const Matrix& b) const {
    const std::size_t n = lu_.rows();
    if (b.rows() != n)
      throw std::invalid_argument("solve: dimension mismatch");
    Matrix x(n, b.cols());
    Vector col(n);
    for (std::size_t j = 0; j < b.cols(); ++j) {
      for (std::size_t i = 0; i < n; ++i) col[i] = b(i, j);
      Vector s = solve(col);
      for (std::size_t i = 0; i < n; ++i) x(i, j) = s[i];
    }
    return x;
  }

  double determinant() const {
    double d = sign_;
    for (std::size_t i = 0; i < lu_.rows(); ++i) d *= lu_(i, i);
    return d;
  }

 private:
  Matrix lu_;
  std::vector<std::size_t> perm_;
  double sign_;
};

/// X with A X = B.
inline Matrix solve(const Matrix& a, const Matrix& b,
                    const Tolerances& tol = default_tolerances()) {
  return LuFactorization(a, tol).solve(b);
}

inline Vector solve(const Matrix& a, const Vector& b,
                    const Tolerances& tol = default_tolerances()) {
  return LuFactorization(a, tol).solve(b);
}

inline Matrix inverse(const Matrix& a,
                      const Tolerances& tol = default_tolerances()) {
  return solve(a, Matrix::identity(a.rows()), tol);
}

}  // namespace phasemix

#endif
