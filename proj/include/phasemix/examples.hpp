#ifndef PHASEMIX_EXAMPLES_HPP
#define PHASEMIX_EXAMPLES_HPP

#include "phasemix/model.hpp"
#include "phasemix/model_io.hpp"

namespace phasemix {

namespace detail {

/// Builds the full intensity matrix [[B, -B1], [0, 0]] of one regime.
inline Matrix intensity_from_phase(const Matrix& b) {
  const std::size_t n = b.rows();
  Matrix q(n + 1, n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      q(i, j) = b(i, j);
      row += b(i, j);
    }
    q(i, n) = -row;
  }
  return q;
}

}  // namespace detail

/// Two-regime competing-exit model on states {1,2,3}: from state 1 the
/// clocks race; rates (a1,a2,a3) drive regime 1 and (b1,b2,b3) regime 2,
/// with a3/b3 the shared (simultaneous) exit rates. a3 = b3 = 0 gives the
/// independent-exponential special case.
struct MarshallOlkinParams {
  double a1 = 1.0, a2 = 2.0, a3 = 0.0;
  double b1 = 3.0, b2 = 4.0, b3 = 0.0;
  double p1 = 0.5;  // initial weight of the second (b-rate) regime
};

inline ModelFile example_marshall_olkin(const MarshallOlkinParams& p = {}) {
  auto phase = [](double r1, double r2, double r3) {
    Matrix b(3, 3);
    b(0, 0) = -(r1 + r2 + r3);
    b(0, 1) = r1;
    b(0, 2) = r2;
    b(1, 1) = -(r2 + r3);
    b(2, 2) = -(r1 + r3);
    return b;
  };
  ModelFile mf;
  mf.model.n = 3;
  mf.model.m = 2;
  mf.model.Q.push_back(
      detail::intensity_from_phase(phase(p.a1, p.a2, p.a3)));
  mf.model.Q.push_back(
      detail::intensity_from_phase(phase(p.b1, p.b2, p.b3)));
  mf.model.pi0 = {1.0, 0.0, 0.0, 0.0};
  mf.model.S0.push_back(Vector(4, 1.0 - p.p1));
  mf.model.S0.push_back(Vector(4, p.p1));
  mf.family = ClosedSetFamily::make(3, {{1, 3}, {2, 3}});
  return mf;
}

inline ModelFile example_exponential(double a1 = 1.0, double a2 = 2.0,
                                     double b1 = 3.0, double b2 = 4.0,
                                     double p1 = 0.5) {
  MarshallOlkinParams p;
  p.a1 = a1;
  p.a2 = a2;
  p.a3 = 0.0;
  p.b1 = b1;
  p.b2 = b2;
  p.b3 = 0.0;
  p.p1 = p1;
  return example_marshall_olkin(p);
}

/// Two-regime birth-death chain on states {1..5}: random walk on {1,2,3},
/// exits from 3 into the side states 4 and 5 (each one step from
/// absorption) or straight to the absorbing state. The second regime runs
/// the same chain at speed psi.
struct BirthDeathParams {
  double beta1 = 2.0, beta2 = 2.0;
  double alpha1 = 0.5, alpha2 = 0.5;
  double gamma1 = 1.0, gamma2 = 1.0;
  double delta1 = 1.0, delta2 = 1.0, delta3 = 1.0;
  double psi = 0.5;
};

inline ModelFile example_birth_death(const BirthDeathParams& p = {}) {
  Matrix q(6, 6);
  q(0, 0) = -p.beta1;
  q(0, 1) = p.beta1;
  q(1, 0) = p.alpha1;
  q(1, 1) = -(p.beta2 + p.alpha1);
  q(1, 2) = p.beta2;
  q(2, 1) = p.alpha2;
  q(2, 2) = -(p.alpha2 + p.gamma1 + p.gamma2 + p.delta3);
  q(2, 3) = p.gamma1;
  q(2, 4) = p.gamma2;
  q(2, 5) = p.delta3;
  q(3, 3) = -p.delta1;
  q(3, 5) = p.delta1;
  q(4, 4) = -p.delta2;
  q(4, 5) = p.delta2;

  ModelFile mf;
  mf.model.n = 5;
  mf.model.m = 2;
  mf.model.Q.push_back(q);
  mf.model.Q.push_back(p.psi * q);
  mf.model.pi0 = {0.6, 0.3, 0.1, 0.0, 0.0, 0.0};
  mf.model.S0.push_back(Vector(6, 0.5));
  mf.model.S0.push_back(Vector(6, 0.5));
  mf.family = ClosedSetFamily::make(5, {{3, 5}, {4, 5}});
  return mf;
}

}  // namespace phasemix

#endif
