#ifndef PHASEMIX_STRUCTURED_HPP
#define PHASEMIX_STRUCTURED_HPP

#include "phasemix/distributions.hpp"
#include "phasemix/model.hpp"

namespace phasemix {

namespace detail {

/// Restriction of a weighting to a contiguous state window [lo, lo+len).
inline Vector window(const Vector& v, std::size_t lo, std::size_t len) {
  Vector out(len);
  for (std::size_t i = 0; i < len; ++i) out[i] = v[lo + i];
  return out;
}

/// Stacks the 2x2 block composition [[X11, X1j], [0, Xjj]].
inline Matrix stack2(const Matrix& x11, const Matrix& x1j, const Matrix& xjj) {
  const std::size_t a = x11.rows(), b = xjj.rows();
  Matrix out(a + b, a + b);
  for (std::size_t i = 0; i < a; ++i) {
    for (std::size_t j = 0; j < a; ++j) out(i, j) = x11(i, j);
    for (std::size_t j = 0; j < b; ++j) out(i, a + j) = x1j(i, j);
  }
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t j = 0; j < b; ++j) out(a + i, a + j) = xjj(i, j);
  return out;
}

}  // namespace detail

/// Bivariate law through the triangular block structure: the second regime
/// occupies the B-blocks with weight S11(t), the first regime the A-blocks
/// with weight I - S11(t). The weighting must come from a two-regime model
/// ordered as (common complement, set 1, set 2).
inline DensityDecomposition structured_dens_biv(const StructuredBlocks& sb,
                                                const Weighting& wt, double t1,
                                                double t2) {
  if (wt.sdiag.size() != 2)
    throw StructureMismatchError(
        "structured_dens_biv: two regimes required");
  if (t1 < wt.t || t2 < wt.t)
    throw std::invalid_argument(
        "structured_dens_biv: evaluation time precedes conditioning time");
  const std::size_t n1 = sb.n1;
  const auto& A = sb.regime[0];
  const auto& B = sb.regime[1];
  // alpha(t): state weight on the common complement; s11: regime-2 share
  Vector alpha = detail::window(wt.w, 0, n1);
  const Vector s11 = detail::window(wt.sdiag[1], 0, n1);
  Vector row_b(n1), row_a(n1);
  for (std::size_t i = 0; i < n1; ++i) {
    row_b[i] = alpha[i] * s11[i];
    row_a[i] = alpha[i] * (1.0 - s11[i]);
  }

  if (t1 == t2 && t1 == wt.t)
    return DensityDecomposition{Region::Atom, 1.0 - sum(alpha)};

  if (t1 == t2) {
    // simultaneous exits come from the row-sum deficits of the top blocks
    auto deficit = [&](const StructuredBlocks::RegimeBlocks& r) {
      Vector d = r.b11 * ones(sb.n1);
      const Vector d2 = r.b12 * ones(sb.n2);
      const Vector d3 = r.b13 * ones(sb.n3);
      for (std::size_t i = 0; i < sb.n1; ++i) d[i] += d2[i] + d3[i];
      return d;
    };
    const double v =
        -dot(row_b * expm(B.b11, t1 - wt.t), deficit(B)) -
        dot(row_a * expm(A.b11, t1 - wt.t), deficit(A));
    return DensityDecomposition{Region::Diagonal, v};
  }

  const bool first = t1 > t2;  // f^(1): exit to set 2 first, then set 1
  const double outer = (first ? t2 : t1) - wt.t;
  const double gap = first ? t1 - t2 : t2 - t1;
  auto ac = [&](const Vector& row, const StructuredBlocks::RegimeBlocks& r) {
    const Matrix& bridge = first ? r.b13 : r.b12;
    const Matrix& tail = first ? r.b33 : r.b22;
    Vector v = row * expm(r.b11, outer);
    v = v * bridge;
    v = v * expm(tail, gap);
    return dot(v, tail * ones(tail.rows()));
  };
  const double v = -ac(row_b, B) - ac(row_a, A);
  return DensityDecomposition{first ? Region::AC1 : Region::AC2, v};
}

/// Marginal density of tau_which via the 2x2 block compositions.
inline double structured_marginal(const StructuredBlocks& sb,
                                  const Weighting& wt, int which, double s) {
  if (wt.sdiag.size() != 2)
    throw StructureMismatchError("structured_marginal: two regimes required");
  if (which != 1 && which != 2)
    throw std::invalid_argument("structured_marginal: which must be 1 or 2");
  if (s < wt.t)
    throw std::invalid_argument(
        "structured_marginal: evaluation time precedes conditioning time");
  const auto& A = sb.regime[0];
  const auto& B = sb.regime[1];
  // tau_1 lives on (common complement, set 2 states); tau_2 on (.., set 1)
  const std::size_t other = which == 1 ? sb.n3 : sb.n2;
  const std::size_t lo = which == 1 ? sb.n1 + sb.n2 : sb.n1;
  const Matrix bk = which == 1 ? detail::stack2(B.b11, B.b13, B.b33)
                               : detail::stack2(B.b11, B.b12, B.b22);
  const Matrix ak = which == 1 ? detail::stack2(A.b11, A.b13, A.b33)
                               : detail::stack2(A.b11, A.b12, A.b22);
  const std::size_t dim = sb.n1 + other;
  Vector w(dim), s2(dim);
  for (std::size_t i = 0; i < sb.n1; ++i) {
    w[i] = wt.w[i];
    s2[i] = wt.sdiag[1][i];
  }
  for (std::size_t i = 0; i < other; ++i) {
    w[sb.n1 + i] = wt.w[lo + i];
    s2[sb.n1 + i] = wt.sdiag[1][lo + i];
  }
  Vector row_b(dim), row_a(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    row_b[i] = w[i] * s2[i];
    row_a[i] = w[i] * (1.0 - s2[i]);
  }
  return -dot(row_b * expm(bk, s - wt.t), bk * ones(dim)) -
         dot(row_a * expm(ak, s - wt.t), ak * ones(dim));
}

}  // namespace phasemix

#endif
