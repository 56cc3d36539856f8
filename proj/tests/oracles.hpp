// Independent numerical oracles used by the tests only. These deliberately
// avoid the library's own kernels: the exponential is a truncated Taylor
// series, the solver is plain Gaussian elimination, and the quadrature is
// an adaptive Gauss-Kronrod 7-15 rule.
#ifndef PHASEMIX_TESTS_ORACLES_HPP
#define PHASEMIX_TESTS_ORACLES_HPP

#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

#include <phasemix/matrix.hpp>
#include <phasemix/model.hpp>

namespace oracles {

using phasemix::Matrix;
using phasemix::Vector;

/// Truncated Taylor series with power-of-two scaling and repeated squaring.
inline Matrix taylor_expm(const Matrix& a, double t = 1.0,
                          std::size_t terms = 200) {
  const std::size_t n = a.rows();
  int squarings = 0;
  double scale = a.norm1() * std::abs(t);
  while (scale > 1.0) {
    scale *= 0.5;
    ++squarings;
  }
  const Matrix at = (t / std::pow(2.0, squarings)) * a;
  Matrix result = Matrix::identity(n);
  Matrix term = Matrix::identity(n);
  for (std::size_t k = 1; k <= terms; ++k) {
    term = (1.0 / static_cast<double>(k)) * (term * at);
    result = result + term;
  }
  for (int s = 0; s < squarings; ++s) result = result * result;
  return result;
}

/// Plain Gaussian elimination with partial pivoting (no factorization reuse).
inline Vector gauss_solve(Matrix a, Vector b) {
  const std::size_t n = a.rows();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
    if (a(piv, col) == 0.0)
      throw std::runtime_error("gauss_solve: singular matrix");
    if (piv != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a(col, c), a(piv, c));
      std::swap(b[col], b[piv]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a(r, col) / a(col, col);
      for (std::size_t c = col; c < n; ++c) a(r, c) -= f * a(col, c);
      b[r] -= f * b[col];
    }
  }
  Vector x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a(i, c) * x[c];
    x[i] = s / a(i, i);
  }
  return x;
}

/// |det(A - lambda I)| via complex Gaussian elimination.
inline double char_poly_abs(const Matrix& a, std::complex<double> lambda) {
  const std::size_t n = a.rows();
  std::vector<std::complex<double>> m(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      m[i * n + j] = a(i, j) - (i == j ? lambda : 0.0);
  std::complex<double> det = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(m[r * n + col]) > std::abs(m[piv * n + col])) piv = r;
    if (piv != col) {
      for (std::size_t c = 0; c < n; ++c)
        std::swap(m[col * n + c], m[piv * n + c]);
      det = -det;
    }
    det *= m[col * n + col];
    if (m[col * n + col] == 0.0) return 0.0;
    for (std::size_t r = col + 1; r < n; ++r) {
      const std::complex<double> f = m[r * n + col] / m[col * n + col];
      for (std::size_t c = col; c < n; ++c) m[r * n + c] -= f * m[col * n + c];
    }
  }
  return std::abs(det);
}

// --- adaptive Gauss-Kronrod 7-15 quadrature ----------------------------

namespace detail {

// QUADPACK dqk15 abscissae and weights on [-1, 1].
inline constexpr double xgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.0};
inline constexpr double wgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
inline constexpr double wg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469};

struct Panel {
  double value;
  double error;
};

template <class F>
Panel gk15(const F& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double f_mid = f(mid);
  double kronrod = wgk[7] * f_mid;
  double gauss = wg[3] * f_mid;
  for (int i = 0; i < 7; ++i) {
    const double dx = half * xgk[i];
    const double fsum = f(mid - dx) + f(mid + dx);
    kronrod += wgk[i] * fsum;
    if (i % 2 == 1) gauss += wg[i / 2] * fsum;
  }
  return {kronrod * half, std::abs(kronrod - gauss) * half};
}

template <class F>
double adaptive(const F& f, double a, double b, double tol, int depth) {
  const Panel p = gk15(f, a, b);
  if (p.error <= tol || depth >= 30) return p.value;
  const double mid = 0.5 * (a + b);
  return adaptive(f, a, mid, 0.5 * tol, depth + 1) +
         adaptive(f, mid, b, 0.5 * tol, depth + 1);
}

}  // namespace detail

template <class F>
double quad(const F& f, double a, double b, double tol = 1e-10) {
  if (b <= a) return 0.0;
  return detail::adaptive(f, a, b, tol, 0);
}

// --- random model generation -------------------------------------------

/// Random valid mixture model: every transient state has a direct exit rate,
/// so absorption is certain and the phase generators are nonsingular.
inline phasemix::MixtureModel random_model(std::mt19937_64& rng, std::size_t n,
                                           std::size_t m) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  phasemix::MixtureModel model;
  model.n = n;
  model.m = m;
  const std::size_t N = n + 1;
  for (std::size_t k = 0; k < m; ++k) {
    Matrix q(N, N);
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        q(i, j) = unif(rng) < 0.6 ? unif(rng) : 0.0;
        row += q(i, j);
      }
      q(i, N - 1) = 0.1 + unif(rng);  // guaranteed exit to the absorbing state
      row += q(i, N - 1);
      q(i, i) = -row;
    }
    model.Q.push_back(std::move(q));
  }
  model.pi0.assign(N, 0.0);
  double mass = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    model.pi0[i] = 0.05 + unif(rng);
    mass += model.pi0[i];
  }
  for (std::size_t i = 0; i < n; ++i) model.pi0[i] /= mass;
  for (std::size_t k = 0; k < m; ++k) model.S0.emplace_back(N, 0.0);
  for (std::size_t i = 0; i < N; ++i) {
    double total = 0.0;
    Vector draw(m);
    for (std::size_t k = 0; k < m; ++k) {
      draw[k] = 0.05 + unif(rng);
      total += draw[k];
    }
    for (std::size_t k = 0; k < m; ++k) model.S0[k][i] = draw[k] / total;
  }
  return model;
}

struct RandomFamilyModel {
  phasemix::MixtureModel model;
  phasemix::ClosedSetFamily family;
  std::size_t n1, n2, n3;  // common complement, set-1-only, set-2-only sizes
};

/// Random model with two overlapping stochastically closed sets. States are
/// grouped contiguously (complement, set-1 block, set-2 block) and the
/// forbidden transitions out of each closed set are zeroed.
inline RandomFamilyModel random_family_model(std::mt19937_64& rng,
                                             std::size_t n1, std::size_t n2,
                                             std::size_t n3, std::size_t m) {
  RandomFamilyModel out;
  const std::size_t n = n1 + n2 + n3;
  out.n1 = n1;
  out.n2 = n2;
  out.n3 = n3;
  out.model = random_model(rng, n, m);
  const std::size_t delta = n;
  for (auto& q : out.model.Q) {
    for (std::size_t i = n1; i < n; ++i) {
      const bool in_set1 = i < n1 + n2;
      double row = 0.0;
      for (std::size_t j = 0; j < n + 1; ++j) {
        if (j == i) continue;
        const bool allowed =
            j == delta || (in_set1 ? (j >= n1 && j < n1 + n2)
                                   : (j >= n1 + n2 && j < n));
        if (!allowed) q(i, j) = 0.0;
        row += q(i, j);
      }
      q(i, i) = -row;
    }
  }
  // initial mass on the common complement only
  for (std::size_t i = n1; i < n + 1; ++i) out.model.pi0[i] = 0.0;
  double mass = 0.0;
  for (std::size_t i = 0; i < n1; ++i) mass += out.model.pi0[i];
  for (std::size_t i = 0; i < n1; ++i) out.model.pi0[i] /= mass;

  std::vector<std::size_t> set1, set2;
  for (std::size_t i = n1; i < n1 + n2; ++i) set1.push_back(i);
  for (std::size_t i = n1 + n2; i < n; ++i) set2.push_back(i);
  set1.push_back(delta);
  set2.push_back(delta);
  out.family = phasemix::ClosedSetFamily::make(n, {set1, set2});
  return out;
}

}  // namespace oracles

#endif
