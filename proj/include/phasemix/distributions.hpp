#ifndef PHASEMIX_DISTRIBUTIONS_HPP
#define PHASEMIX_DISTRIBUTIONS_HPP

#include <algorithm>
#include <cmath>
#include <numeric>

#include "phasemix/expm.hpp"
#include "phasemix/inference.hpp"
#include "phasemix/linsolve.hpp"
#include "phasemix/model.hpp"

namespace phasemix {

enum class Region { AC1, AC2, Diagonal, Atom };

inline const char* region_name(Region r) {
  switch (r) {
    case Region::AC1: return "AC1";
    case Region::AC2: return "AC2";
    case Region::Diagonal: return "Diagonal";
    default: return "Atom";
  }
}

/// One point of the bivariate exit law: the ordering region the point falls
/// in and the density there (probability mass for the atom).
struct DensityDecomposition {
  Region region;
  double value;
};

struct UnivariateDensity {
  double value;  // density at s (right limit at s = t)
  double atom;   // probability mass sitting at s = t
};

/// Everything the closed-form laws need: the phase blocks of the model and
/// the conditioning weights at time t.
struct EvalContext {
  PhaseBlocks blocks;
  Weighting wt;
};

inline EvalContext make_context(const MixtureModel& model, const Scenario& sc,
                                const Tolerances& tol = default_tolerances()) {
  return EvalContext{block_partition(model, tol), make_weighting(model, sc)};
}

namespace detail {

/// Row vector w^T S^(k)(t) over the transient states.
inline Vector weighted_row(const Weighting& wt, std::size_t k) {
  Vector row(wt.w.size());
  for (std::size_t i = 0; i < row.size(); ++i)
    row[i] = wt.w[i] * wt.sdiag[k][i];
  return row;
}

inline void check_horizon(const Weighting& wt, double s, const char* who) {
  if (s < wt.t)
    throw std::invalid_argument(std::string(who) +
                                ": evaluation time precedes conditioning time");
}

/// Stable ordering permutation of the requested times.
inline std::vector<std::size_t> time_order(const Vector& times) {
  std::vector<std::size_t> idx(times.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });
  return idx;
}

}  // namespace detail

/// Conditional survival P{tau > s | scenario} of the absorption time.
inline double surv_uni(const PhaseBlocks& blocks, const Weighting& wt,
                       double s) {
  detail::check_horizon(wt, s, "surv_uni");
  double total = 0.0;
  for (std::size_t k = 0; k < blocks.m(); ++k) {
    const Vector row = detail::weighted_row(wt, k);
    total += sum(row * expm(blocks.B[k], s - wt.t));
  }
  return total;
}

/// Conditional density of the absorption time, with the atom at s = t.
inline UnivariateDensity dens_uni(const PhaseBlocks& blocks,
                                  const Weighting& wt, double s) {
  detail::check_horizon(wt, s, "dens_uni");
  double total = 0.0;
  for (std::size_t k = 0; k < blocks.m(); ++k) {
    const Vector row = detail::weighted_row(wt, k);
    total -= dot(row * expm(blocks.B[k], s - wt.t) * blocks.B[k],
                 ones(blocks.n()));
  }
  return UnivariateDensity{total, 1.0 - sum(wt.w)};
}

/// Conditional Laplace transform E{e^{-lambda tau} | scenario}.
inline double laplace_uni(const PhaseBlocks& blocks, const Weighting& wt,
                          double lambda,
                          const Tolerances& tol = default_tolerances()) {
  if (lambda < 0.0)
    throw std::invalid_argument("laplace_uni: negative transform argument");
  const std::size_t n = blocks.n();
  double total = 1.0 - sum(wt.w);  // mass already absorbed at time t
  for (std::size_t k = 0; k < blocks.m(); ++k) {
    const Matrix resolvent = lambda * Matrix::identity(n) - blocks.B[k];
    const Vector x = solve(resolvent, blocks.B[k] * ones(n), tol);
    total -= dot(detail::weighted_row(wt, k), x);
  }
  return total;
}

/// Conditional n-th moment E{tau^n | scenario}.
inline double moment_uni(const PhaseBlocks& blocks, const Weighting& wt,
                         unsigned n,
                         const Tolerances& tol = default_tolerances()) {
  double total = 0.0;
  double factorial = 1.0;
  for (unsigned i = 2; i <= n; ++i) factorial *= i;
  const double sign = (n % 2 == 0) ? 1.0 : -1.0;
  for (std::size_t k = 0; k < blocks.m(); ++k) {
    const LuFactorization lu(blocks.B[k], tol);
    Vector x = ones(blocks.n());
    for (unsigned i = 0; i < n; ++i) x = lu.solve(x);
    total += sign * factorial * dot(detail::weighted_row(wt, k), x);
  }
  return total;
}

/// Conditional joint survival P{tau_1 > t_1, ..., tau_p > t_p | scenario}.
/// Ties contribute identity factors, so the value is continuous at them.
inline double surv_multi(const PhaseBlocks& blocks,
                         const ClosedSetFamily& family, const Weighting& wt,
                         const Vector& times) {
  if (times.size() != family.p)
    throw std::invalid_argument("surv_multi: one time per closed set required");
  for (double ti : times) detail::check_horizon(wt, ti, "surv_multi");
  const auto order = detail::time_order(times);
  const std::size_t n = blocks.n();
  double total = 0.0;
  for (std::size_t k = 0; k < blocks.m(); ++k) {
    Vector row = detail::weighted_row(wt, k);
    double prev = wt.t;
    for (std::size_t l = 0; l < order.size(); ++l) {
      const double tl = times[order[l]];
      if (tl > prev) row = row * expm(blocks.B[k], tl - prev);
      // mask to the complement of the set whose clock expires here
      for (std::size_t i = 0; i < n; ++i)
        if (family.contains(order[l], i)) row[i] = 0.0;
      prev = tl;
    }
    total += sum(row);
  }
  return total;
}

/// Joint density over an ordering region with strictly distinct interior
/// times. Diagonal strata carry their own (singular) components and are
/// rejected here; use dens_biv for p = 2.
inline double dens_multi(const PhaseBlocks& blocks,
                         const ClosedSetFamily& family, const Weighting& wt,
                         const Vector& times) {
  if (times.size() != family.p)
    throw std::invalid_argument("dens_multi: one time per closed set required");
  const auto order = detail::time_order(times);
  double prev = wt.t;
  for (std::size_t l : order) {
    if (times[l] <= prev)
      throw std::invalid_argument(
          "dens_multi: times must be distinct and exceed the conditioning time");
    prev = times[l];
  }
  const std::size_t p = family.p;
  double total = 0.0;
  for (std::size_t k = 0; k < blocks.m(); ++k) {
    Vector row = detail::weighted_row(wt, k);
    double last = wt.t;
    for (std::size_t l = 0; l + 1 < p; ++l) {
      const Matrix h = family.H_matrix(order[l]);
      row = row * expm(blocks.B[k], times[order[l]] - last);
      row = row * commutator(blocks.B[k], h);
      last = times[order[l]];
    }
    row = row * expm(blocks.B[k], times[order[p - 1]] - last);
    row = row * blocks.B[k];
    row = row * family.H_matrix(order[p - 1]);
    total += sum(row);
  }
  return (p % 2 == 0 ? 1.0 : -1.0) * total;
}

/// Bivariate exit law at (t1, t2): density on the ordering regions and the
/// diagonal, probability mass at the corner (t, t).
inline DensityDecomposition dens_biv(const PhaseBlocks& blocks,
                                     const ClosedSetFamily& family,
                                     const Weighting& wt, double t1,
                                     double t2) {
  if (family.p != 2)
    throw std::invalid_argument("dens_biv: exactly two closed sets required");
  detail::check_horizon(wt, t1, "dens_biv");
  detail::check_horizon(wt, t2, "dens_biv");
  const Matrix h1 = family.H_matrix(0);
  const Matrix h2 = family.H_matrix(1);
  const Vector one = ones(blocks.n());

  if (t1 == t2 && t1 == wt.t) {
    const double atom = 1.0 - dot(wt.w, h2 * (h1 * one));
    return DensityDecomposition{Region::Atom, atom};
  }
  if (t1 == t2) {
    double total = 0.0;
    for (std::size_t k = 0; k < blocks.m(); ++k) {
      const Matrix& b = blocks.B[k];
      const Matrix core = commutator(b, h2) * h1 + commutator(b, h1) * h2 -
                          b * h2 * h1;
      const Vector row =
          detail::weighted_row(wt, k) * expm(b, t1 - wt.t);
      total += dot(row, core * one);
    }
    return DensityDecomposition{Region::Diagonal, total};
  }
  // f^(1) covers t1 > t2, f^(2) covers t2 > t1; the inner exponential runs
  // over the gap between the two clocks
  const bool first = t1 > t2;
  const double inner_gap = first ? t1 - t2 : t2 - t1;
  const double outer = first ? t2 : t1;
  const Matrix& h_early = first ? h2 : h1;
  const Matrix& h_late = first ? h1 : h2;
  double total = 0.0;
  for (std::size_t k = 0; k < blocks.m(); ++k) {
    const Matrix& b = blocks.B[k];
    Vector row = detail::weighted_row(wt, k) * expm(b, outer - wt.t);
    row = row * commutator(b, h_early);
    row = row * expm(b, inner_gap);
    total += dot(row, b * (h_late * one));
  }
  return DensityDecomposition{first ? Region::AC1 : Region::AC2, total};
}

/// Tail mass of the singular (simultaneous-exit) component beyond t1.
inline double singular_surv_biv(const PhaseBlocks& blocks,
                                const ClosedSetFamily& family,
                                const Weighting& wt, double t1,
                                const Tolerances& tol = default_tolerances()) {
  if (family.p != 2)
    throw std::invalid_argument(
        "singular_surv_biv: exactly two closed sets required");
  detail::check_horizon(wt, t1, "singular_surv_biv");
  const Matrix h1 = family.H_matrix(0);
  const Matrix h2 = family.H_matrix(1);
  const Vector one = ones(blocks.n());
  double total = 0.0;
  for (std::size_t k = 0; k < blocks.m(); ++k) {
    const Matrix& b = blocks.B[k];
    const Matrix core =
        b * h2 * h1 - commutator(b, h2) * h1 - commutator(b, h1) * h2;
    const Vector x = solve(b, core * one, tol);
    total += dot(detail::weighted_row(wt, k) * expm(b, t1 - wt.t), x);
  }
  return total;
}

/// Per-regime test for a vanishing singular component: true iff no state in
/// the common complement exits straight to Delta under that regime.
inline std::vector<bool> singular_condition(const PhaseBlocks& blocks,
                                            const ClosedSetFamily& family) {
  if (family.p != 2)
    throw std::invalid_argument(
        "singular_condition: exactly two closed sets required");
  const Matrix h1 = family.H_matrix(0);
  const Matrix h2 = family.H_matrix(1);
  std::vector<bool> zero(blocks.m());
  const Vector one = ones(blocks.n());
  for (std::size_t k = 0; k < blocks.m(); ++k) {
    const Matrix& b = blocks.B[k];
    const Matrix core =
        b * h2 * h1 - commutator(b, h2) * h1 - commutator(b, h1) * h2;
    const Vector deficit = core * one;
    double peak = 0.0;
    for (double x : deficit) peak = std::max(peak, std::abs(x));
    zero[k] = peak <= 1e-12 * std::max(1.0, b.max_abs());
  }
  return zero;
}

/// Conditional joint Laplace transform E{e^{-l1 tau_1 - l2 tau_2} | scenario}.
inline double laplace_biv(const PhaseBlocks& blocks,
                          const ClosedSetFamily& family, const Weighting& wt,
                          double lambda1, double lambda2,
                          const Tolerances& tol = default_tolerances()) {
  if (family.p != 2)
    throw std::invalid_argument("laplace_biv: exactly two closed sets required");
  if (lambda1 < 0.0 || lambda2 < 0.0)
    throw std::invalid_argument("laplace_biv: negative transform argument");
  const std::size_t n = blocks.n();
  const Matrix h1 = family.H_matrix(0);
  const Matrix h2 = family.H_matrix(1);
  const Matrix I = Matrix::identity(n);
  const Vector one = ones(n);
  double total = 1.0 - dot(wt.w, h2 * (h1 * one));
  for (std::size_t k = 0; k < blocks.m(); ++k) {
    const Matrix& b = blocks.B[k];
    const Vector r1 = solve(lambda1 * I - b, b * (h1 * one), tol);
    const Vector r2 = solve(lambda2 * I - b, b * (h2 * one), tol);
    Vector core = commutator(b, h2) * r1;
    const Vector c2 = commutator(b, h1) * r2;
    for (std::size_t i = 0; i < n; ++i)
      core[i] += c2[i];
    const Vector tails = (commutator(b, h2) * h1 + commutator(b, h1) * h2 -
                          b * h2 * h1) * one;
    for (std::size_t i = 0; i < n; ++i) core[i] += tails[i];
    const Vector x = solve((lambda1 + lambda2) * I - b, core, tol);
    total += dot(detail::weighted_row(wt, k), x);
  }
  return total;
}

/// Conditional cross moment E{tau_1 tau_2 | scenario}.
inline double cross_moment(const PhaseBlocks& blocks,
                           const ClosedSetFamily& family, const Weighting& wt,
                           const Tolerances& tol = default_tolerances()) {
  if (family.p != 2)
    throw std::invalid_argument("cross_moment: exactly two closed sets required");
  const Matrix h1 = family.H_matrix(0);
  const Matrix h2 = family.H_matrix(1);
  const Vector one = ones(blocks.n());
  double total = 0.0;
  for (std::size_t k = 0; k < blocks.m(); ++k) {
    const LuFactorization lu(blocks.B[k], tol);
    const Vector x12 = lu.solve(h1 * lu.solve(h2 * one));
    const Vector x21 = lu.solve(h2 * lu.solve(h1 * one));
    Vector x = x12;
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += x21[i];
    total += dot(detail::weighted_row(wt, k), x);
  }
  return total;
}

// --- model-level convenience overloads ---------------------------------

inline double surv_uni(const MixtureModel& model, const Scenario& sc,
                       double s) {
  const EvalContext c = make_context(model, sc);
  return surv_uni(c.blocks, c.wt, s);
}

inline UnivariateDensity dens_uni(const MixtureModel& model,
                                  const Scenario& sc, double s) {
  const EvalContext c = make_context(model, sc);
  return dens_uni(c.blocks, c.wt, s);
}

inline double laplace_uni(const MixtureModel& model, const Scenario& sc,
                          double lambda) {
  const EvalContext c = make_context(model, sc);
  return laplace_uni(c.blocks, c.wt, lambda);
}

inline double moment_uni(const MixtureModel& model, const Scenario& sc,
                         unsigned n) {
  const EvalContext c = make_context(model, sc);
  return moment_uni(c.blocks, c.wt, n);
}

inline double surv_multi(const MixtureModel& model, const Scenario& sc,
                         const ClosedSetFamily& family, const Vector& times) {
  const EvalContext c = make_context(model, sc);
  return surv_multi(c.blocks, family, c.wt, times);
}

inline double dens_multi(const MixtureModel& model, const Scenario& sc,
                         const ClosedSetFamily& family, const Vector& times) {
  const EvalContext c = make_context(model, sc);
  return dens_multi(c.blocks, family, c.wt, times);
}

inline DensityDecomposition dens_biv(const MixtureModel& model,
                                     const Scenario& sc,
                                     const ClosedSetFamily& family, double t1,
                                     double t2) {
  const EvalContext c = make_context(model, sc);
  return dens_biv(c.blocks, family, c.wt, t1, t2);
}

inline double singular_surv_biv(const MixtureModel& model, const Scenario& sc,
                                const ClosedSetFamily& family, double t1) {
  const EvalContext c = make_context(model, sc);
  return singular_surv_biv(c.blocks, family, c.wt, t1);
}

inline std::vector<bool> singular_condition(const MixtureModel& model,
                                            const ClosedSetFamily& family) {
  return singular_condition(block_partition(model), family);
}

inline double laplace_biv(const MixtureModel& model, const Scenario& sc,
                          const ClosedSetFamily& family, double lambda1,
                          double lambda2) {
  const EvalContext c = make_context(model, sc);
  return laplace_biv(c.blocks, family, c.wt, lambda1, lambda2);
}

inline double cross_moment(const MixtureModel& model, const Scenario& sc,
                           const ClosedSetFamily& family) {
  const EvalContext c = make_context(model, sc);
  return cross_moment(c.blocks, family, c.wt);
}

}  // namespace phasemix

#endif
