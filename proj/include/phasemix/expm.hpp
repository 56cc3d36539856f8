#ifndef PHASEMIX_EXPM_HPP
#define PHASEMIX_EXPM_HPP

#include <cmath>

#include "phasemix/linsolve.hpp"
#include "phasemix/matrix.hpp"

namespace phasemix {

/// e^{At} by scaling-and-squaring with a degree-13 Pade approximant.
/// The argument is scaled so that ||At||_1 / 2^s <= 5.4.
inline Matrix expm(const Matrix& a, double t = 1.0,
                   const Tolerances& tol = default_tolerances()) {
  if (!a.square()) throw std::invalid_argument("expm: square matrix required");
  if (!a.finite()) throw std::invalid_argument("expm: non-finite entries");
  if (t < 0.0) throw std::invalid_argument("expm: negative time");
  const std::size_t n = a.rows();
  if (t == 0.0) return Matrix::identity(n);

  Matrix m = a * t;
  const double theta = 5.4;
  int squarings = 0;
  const double nrm = m.norm1();
  if (nrm > theta) {
    squarings = static_cast<int>(std::ceil(std::log2(nrm / theta)));
    m *= std::ldexp(1.0, -squarings);
  }

  static const double b[14] = {64764752532480000.0, 32382376266240000.0,
                               7771770303897600.0,  1187353796428800.0,
                               129060195264000.0,   10559470521600.0,
                               670442572800.0,      33522128640.0,
                               1323241920.0,        40840800.0,
                               960960.0,            16380.0,
                               182.0,               1.0};

  const Matrix I = Matrix::identity(n);
  const Matrix m2 = m * m;
  const Matrix m4 = m2 * m2;
  const Matrix m6 = m4 * m2;

  Matrix u = m * (m6 * (b[13] * m6 + b[11] * m4 + b[9] * m2) + b[7] * m6 +
                  b[5] * m4 + b[3] * m2 + b[1] * I);
  Matrix v = m6 * (b[12] * m6 + b[10] * m4 + b[8] * m2) + b[6] * m6 +
             b[4] * m4 + b[2] * m2 + b[0] * I;

  Matrix r = solve(v - u, v + u, tol);
  for (int s = 0; s < squarings; ++s) r = r * r;
  return r;
}

}  // namespace phasemix

#endif
