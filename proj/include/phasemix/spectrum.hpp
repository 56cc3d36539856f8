#ifndef PHASEMIX_SPECTRUM_HPP
#define PHASEMIX_SPECTRUM_HPP

#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "phasemix/matrix.hpp"

namespace phasemix {

struct Spectrum {
  std::vector<std::complex<double>> eigenvalues;
  std::size_t dominant_index = 0;  // maximal real part
  bool all_real_and_simple = false;
};

namespace detail {

/// Diagonal similarity scaling to reduce the norm spread (radix-2 balancing).
inline void balance(Matrix& a) {
  const std::size_t n = a.rows();
  const double radix = 2.0, sq = radix * radix;
  bool done = false;
  while (!done) {
    done = true;
    for (std::size_t i = 0; i < n; ++i) {
      double c = 0.0, r = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) {
          c += std::fabs(a(j, i));
          r += std::fabs(a(i, j));
        }
      if (c == 0.0 || r == 0.0) continue;
      double f = 1.0, s = c + r, g = r / radix;
      while (c < g) {
        f *= radix;
        c *= sq;
      }
      g = r * radix;
      while (c >= g) {
        f /= radix;
        c /= sq;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        const double ginv = 1.0 / f;
        for (std::size_t j = 0; j < n; ++j) a(i, j) *= ginv;
        for (std::size_t j = 0; j < n; ++j) a(j, i) *= f;
      }
    }
  }
}

/// Reduction to upper Hessenberg form by stabilized elementary similarity
/// transformations. Entries below the subdiagonal are zeroed on exit.
inline void hessenberg(Matrix& a) {
  const std::size_t n = a.rows();
  for (std::size_t m = 1; m + 1 < n; ++m) {
    std::size_t piv = m;
    for (std::size_t i = m + 1; i < n; ++i)
      if (std::fabs(a(i, m - 1)) > std::fabs(a(piv, m - 1))) piv = i;
    if (piv != m) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(m, j), a(piv, j));
      for (std::size_t j = 0; j < n; ++j) std::swap(a(j, m), a(j, piv));
    }
    const double x = a(m, m - 1);
    if (x == 0.0) continue;
    for (std::size_t i = m + 1; i < n; ++i) {
      double y = a(i, m - 1);
      if (y == 0.0) continue;
      y /= x;
      a(i, m - 1) = 0.0;
      for (std::size_t j = m; j < n; ++j) a(i, j) -= y * a(m, j);
      for (std::size_t j = 0; j < n; ++j) a(j, m) += y * a(j, i);
    }
  }
  for (std::size_t i = 2; i < n; ++i)
    for (std::size_t j = 0; j + 1 < i; ++j) a(i, j) = 0.0;
}

/// Francis double-shift QR on an upper Hessenberg matrix; eigenvalues only.
inline void hqr(Matrix& a, std::vector<double>& wr, std::vector<double>& wi) {
  const int n = static_cast<int>(a.rows());
  wr.assign(n, 0.0);
  wi.assign(n, 0.0);
  const double eps = std::numeric_limits<double>::epsilon();

  double anorm = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = std::max(i - 1, 0); j < n; ++j) anorm += std::fabs(a(i, j));

  int nn = n - 1;
  double t = 0.0;
  while (nn >= 0) {
    int its = 0;
    int l = 0;
    do {
      for (l = nn; l >= 1; --l) {
        double s = std::fabs(a(l - 1, l - 1)) + std::fabs(a(l, l));
        if (s == 0.0) s = anorm;
        if (std::fabs(a(l, l - 1)) <= eps * s) {
          a(l, l - 1) = 0.0;
          break;
        }
      }
      double x = a(nn, nn);
      if (l == nn) {
        wr[nn] = x + t;
        wi[nn] = 0.0;
        --nn;
      } else {
        double y = a(nn - 1, nn - 1);
        double w = a(nn, nn - 1) * a(nn - 1, nn);
        if (l == nn - 1) {
          double p = 0.5 * (y - x);
          double q = p * p + w;
          double z = std::sqrt(std::fabs(q));
          x += t;
          if (q >= 0.0) {
            z = p + (p >= 0.0 ? z : -z);
            wr[nn - 1] = wr[nn] = x + z;
            if (z != 0.0) wr[nn] = x - w / z;
            wi[nn - 1] = wi[nn] = 0.0;
          } else {
            wr[nn - 1] = wr[nn] = x + p;
            wi[nn] = z;
            wi[nn - 1] = -z;
          }
          nn -= 2;
        } else {
          if (its == 60)
            throw std::runtime_error("eigen: QR iteration failed to converge");
          if (its == 10 || its == 20 || its == 30 || its == 40 || its == 50) {
            t += x;
            for (int i = 0; i <= nn; ++i) a(i, i) -= x;
            double s = std::fabs(a(nn, nn - 1)) + std::fabs(a(nn - 1, nn - 2));
            y = x = 0.75 * s;
            w = -0.4375 * s * s;
          }
          ++its;
          int m;
          double p = 0.0, q = 0.0, r = 0.0, z = 0.0;
          for (m = nn - 2; m >= l; --m) {
            z = a(m, m);
            double rr = x - z;
            double ss = y - z;
            p = (rr * ss - w) / a(m + 1, m) + a(m, m + 1);
            q = a(m + 1, m + 1) - z - rr - ss;
            r = a(m + 2, m + 1);
            double s = std::fabs(p) + std::fabs(q) + std::fabs(r);
            p /= s;
            q /= s;
            r /= s;
            if (m == l) break;
            const double u = std::fabs(a(m, m - 1)) * (std::fabs(q) + std::fabs(r));
            const double v = std::fabs(p) * (std::fabs(a(m - 1, m - 1)) +
                                             std::fabs(z) +
                                             std::fabs(a(m + 1, m + 1)));
            if (u <= eps * v) break;
          }
          for (int i = m + 2; i <= nn; ++i) {
            a(i, i - 2) = 0.0;
            if (i != m + 2) a(i, i - 3) = 0.0;
          }
          for (int k = m; k <= nn - 1; ++k) {
            if (k != m) {
              p = a(k, k - 1);
              q = a(k + 1, k - 1);
              r = (k != nn - 1) ? a(k + 2, k - 1) : 0.0;
              x = std::fabs(p) + std::fabs(q) + std::fabs(r);
              if (x != 0.0) {
                p /= x;
                q /= x;
                r /= x;
              }
            }
            double s = std::sqrt(p * p + q * q + r * r);
            if (p < 0.0) s = -s;
            if (s == 0.0) continue;
            if (k == m) {
              if (l != m) a(k, k - 1) = -a(k, k - 1);
            } else {
              a(k, k - 1) = -s * x;
            }
            p += s;
            x = p / s;
            y = q / s;
            z = r / s;
            q /= p;
            r /= p;
            for (int j = k; j <= nn; ++j) {
              p = a(k, j) + q * a(k + 1, j);
              if (k != nn - 1) {
                p += r * a(k + 2, j);
                a(k + 2, j) -= p * z;
              }
              a(k + 1, j) -= p * y;
              a(k, j) -= p * x;
            }
            const int mmin = (nn < k + 3) ? nn : k + 3;
            for (int i = l; i <= mmin; ++i) {
              p = x * a(i, k) + y * a(i, k + 1);
              if (k != nn - 1) {
                p += z * a(i, k + 2);
                a(i, k + 2) -= p * r;
              }
              a(i, k + 1) -= p * q;
              a(i, k) -= p;
            }
          }
        }
      }
    } while (l < nn - 1);
  }
}

}  // namespace detail

/// Eigenvalues of a real square matrix via real Schur (Francis QR double
/// shift). Complex eigenvalues are reported, not hidden.
inline Spectrum eigen(const Matrix& a,
                      const Tolerances& tol = default_tolerances()) {
  if (!a.square()) throw std::invalid_argument("eigen: square matrix required");
  if (!a.finite()) throw std::invalid_argument("eigen: non-finite entries");
  const std::size_t n = a.rows();
  Spectrum sp;
  if (n == 0) return sp;

  Matrix h = a;
  detail::balance(h);
  detail::hessenberg(h);
  std::vector<double> wr, wi;
  detail::hqr(h, wr, wi);

  sp.eigenvalues.resize(n);
  double max_abs = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sp.eigenvalues[i] = {wr[i], wi[i]};
    max_abs = std::max(max_abs, std::abs(sp.eigenvalues[i]));
  }
  sp.dominant_index = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (wr[i] > wr[sp.dominant_index]) sp.dominant_index = i;

  bool real_ok = true;
  for (std::size_t i = 0; i < n; ++i)
    if (std::fabs(wi[i]) >= tol.eigen_imag * max_abs) real_ok = false;
  bool simple_ok = true;
  for (std::size_t i = 0; i < n && simple_ok; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(sp.eigenvalues[i] - sp.eigenvalues[j]) <=
          tol.eigen_gap * max_abs) {
        simple_ok = false;
        break;
      }
  sp.all_real_and_simple = (n == 1) ? real_ok : (real_ok && simple_ok);
  return sp;
}

/// Spectral projector onto eigenvalue l of A with real simple spectrum:
/// prod over j != l of (A - lambda_j I) / (lambda_l - lambda_j).
inline Matrix lagrange_coefficient(const Matrix& a, const Spectrum& sp,
                                   std::size_t l) {
  if (!sp.all_real_and_simple)
    throw UnsupportedSpectrumError(
        "lagrange_coefficient: repeated or complex eigenvalues");
  if (l >= sp.eigenvalues.size())
    throw std::invalid_argument("lagrange_coefficient: index out of range");
  const std::size_t n = a.rows();
  const double lam_l = sp.eigenvalues[l].real();
  Matrix p = Matrix::identity(n);
  for (std::size_t j = 0; j < sp.eigenvalues.size(); ++j) {
    if (j == l) continue;
    const double lam_j = sp.eigenvalues[j].real();
    p = p * (a - lam_j * Matrix::identity(n));
    p *= 1.0 / (lam_l - lam_j);
  }
  return p;
}

}  // namespace phasemix

#endif
