#ifndef PHASEMIX_MODEL_HPP
#define PHASEMIX_MODEL_HPP

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "phasemix/expm.hpp"
#include "phasemix/linsolve.hpp"
#include "phasemix/matrix.hpp"

namespace phasemix {

/// Finite mixture of Markov jump processes on a shared state space
/// {0,..,n-1} transient, state n absorbing. Indices are 0-based internally;
/// the absorbing state is always the last one.
struct MixtureModel {
  std::size_t n = 0;          // transient states
  std::size_t m = 0;          // regimes
  std::vector<Matrix> Q;      // m intensity matrices, (n+1)x(n+1)
  Vector pi0;                 // initial distribution, length n+1
  std::vector<Vector> S0;     // m diagonals, length n+1, summing to 1 per state

  std::size_t delta() const { return n; }  // absorbing state index
};

/// Stochastically closed sets Gamma_1..Gamma_p, each containing the absorbing
/// state, intersecting only in it. H_k is the 0/1 diagonal mask of the
/// transient complement Gamma_k^c.
struct ClosedSetFamily {
  std::size_t p = 0;
  std::size_t n = 0;
  std::vector<std::vector<std::size_t>> gamma;  // sorted 0-based members
  std::vector<Vector> H;                        // p diagonals of length n

  static ClosedSetFamily make(std::size_t n,
                              std::vector<std::vector<std::size_t>> sets) {
    ClosedSetFamily f;
    f.n = n;
    f.p = sets.size();
    f.gamma = std::move(sets);
    for (auto& g : f.gamma) std::sort(g.begin(), g.end());
    f.H.resize(f.p);
    for (std::size_t k = 0; k < f.p; ++k) {
      f.H[k].assign(n, 1.0);
      for (std::size_t s : f.gamma[k])
        if (s < n) f.H[k][s] = 0.0;
    }
    return f;
  }

  bool contains(std::size_t k, std::size_t state) const {
    return std::binary_search(gamma[k].begin(), gamma[k].end(), state);
  }

  Matrix H_matrix(std::size_t k) const { return Matrix::diagonal(H[k]); }
};

struct Violation {
  std::string where;
  std::string what;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }

  void add(std::string where, std::string what) {
    violations.push_back({std::move(where), std::move(what)});
  }

  std::string to_string() const {
    std::ostringstream os;
    for (const auto& v : violations) os << v.where << ": " << v.what << "\n";
    return os.str();
  }
};

/// Leading transient blocks of the intensity matrices and their exit vectors.
struct PhaseBlocks {
  std::vector<Matrix> B;     // m blocks, n x n
  std::vector<Vector> exit;  // -B 1, nonnegative
  std::size_t n() const { return B.empty() ? 0 : B[0].rows(); }
  std::size_t m() const { return B.size(); }
};

inline ValidationReport validate(const MixtureModel& model,
                                 const ClosedSetFamily* family = nullptr,
                                 double tol = 1e-12) {
  ValidationReport rep;
  const std::size_t n = model.n, m = model.m, N = n + 1;

  if (model.Q.size() != m) rep.add("Q", "expected one intensity matrix per regime");
  if (model.pi0.size() != N) rep.add("pi0", "length must be n+1");
  if (model.S0.size() != m) rep.add("S0", "expected one diagonal per regime");

  for (std::size_t k = 0; k < model.Q.size(); ++k) {
    const Matrix& q = model.Q[k];
    std::ostringstream tag;
    tag << "Q[" << k << "]";
    if (q.rows() != N || q.cols() != N) {
      rep.add(tag.str(), "must be (n+1)x(n+1)");
      continue;
    }
    if (!q.finite()) rep.add(tag.str(), "non-finite entries");
    for (std::size_t i = 0; i < N; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < N; ++j) {
        row += q(i, j);
        if (i != j && q(i, j) < -tol) {
          std::ostringstream w;
          w << "negative off-diagonal at (" << i << "," << j << ")";
          rep.add(tag.str(), w.str());
        }
        if (i == j && q(i, j) > tol) {
          std::ostringstream w;
          w << "positive diagonal at (" << i << "," << i << ")";
          rep.add(tag.str(), w.str());
        }
      }
      if (std::fabs(row) > tol) {
        std::ostringstream w;
        w << "row " << i << " sums to " << row;
        rep.add(tag.str(), w.str());
      }
    }
    for (std::size_t j = 0; j < N; ++j)
      if (std::fabs(q(n, j)) > tol)
        rep.add(tag.str(), "absorbing-state row must be zero");
  }

  if (model.pi0.size() == N) {
    double s = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      s += model.pi0[i];
      if (model.pi0[i] < -tol) rep.add("pi0", "negative entry");
    }
    if (std::fabs(s - 1.0) > tol) rep.add("pi0", "must sum to 1");
    if (std::fabs(model.pi0[n]) > tol)
      rep.add("pi0", "absorbing state must carry zero initial mass");
  }

  if (model.S0.size() == m) {
    for (std::size_t i = 0; i < N; ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        if (model.S0[k].size() != N) {
          rep.add("S0", "diagonal length must be n+1");
          break;
        }
        const double v = model.S0[k][i];
        s += v;
        if (v < -tol || v > 1.0 + tol) {
          std::ostringstream w;
          w << "entry (" << k << "," << i << ") outside [0,1]";
          rep.add("S0", w.str());
        }
      }
      if (std::fabs(s - 1.0) > tol) {
        std::ostringstream w;
        w << "diagonals at state " << i << " sum to " << s << ", expected 1";
        rep.add("S0", w.str());
      }
    }
  }

  if (family) {
    const auto& f = *family;
    if (f.n != n) rep.add("gamma", "state-space size mismatch");
    for (std::size_t k = 0; k < f.p; ++k) {
      std::ostringstream tag;
      tag << "gamma[" << k << "]";
      if (f.gamma[k].empty() || !f.contains(k, model.delta()))
        rep.add(tag.str(), "must contain the absorbing state");
      for (std::size_t s : f.gamma[k])
        if (s > n) rep.add(tag.str(), "state index out of range");
    }
    // intersection must be exactly the absorbing state
    for (std::size_t s = 0; s < n; ++s) {
      bool in_all = f.p > 0;
      for (std::size_t k = 0; k < f.p; ++k)
        if (!f.contains(k, s)) in_all = false;
      if (in_all) {
        std::ostringstream w;
        w << "transient state " << s << " lies in every closed set";
        rep.add("gamma", w.str());
      }
    }
    // stochastic closedness: no intensity out of any Gamma_l
    for (std::size_t k = 0; k < model.Q.size(); ++k) {
      const Matrix& q = model.Q[k];
      if (q.rows() != N) continue;
      for (std::size_t l = 0; l < f.p; ++l)
        for (std::size_t i : f.gamma[l])
          for (std::size_t j = 0; j < N; ++j)
            if (!f.contains(l, j) && std::fabs(q(i, j)) > tol) {
              std::ostringstream w;
              w << "regime " << k << " leaves closed set " << l << " via ("
                << i << "," << j << ")";
              rep.add("gamma", w.str());
            }
    }
  }
  return rep;
}

inline double sum_row(const Matrix& a, std::size_t i) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j);
  return s;
}

/// Extracts the phase generators B^(k) and exit vectors -B^(k) 1.
/// Throws SingularMatrixError when absorption is not certain.
inline PhaseBlocks block_partition(const MixtureModel& model,
                                   const Tolerances& tol = default_tolerances()) {
  PhaseBlocks blocks;
  const std::size_t n = model.n;
  for (std::size_t k = 0; k < model.m; ++k) {
    Matrix b = model.Q[k].block(0, 0, n, n);
    try {
      LuFactorization lu(b, tol);
    } catch (const SingularMatrixError&) {
      throw SingularMatrixError(
          "phase generator singular: absorption is not certain");
    }
    Vector ex(n);
    for (std::size_t i = 0; i < n; ++i) ex[i] = -sum_row(b, i);
    blocks.B.push_back(std::move(b));
    blocks.exit.push_back(std::move(ex));
  }
  return blocks;
}

/// Full (n+1)x(n+1) transition matrix of regime k assembled from the phase
/// block: [[e^{Bt}, 1 - e^{Bt} 1], [0, 1]].
inline Matrix phase_expm(const PhaseBlocks& blocks, std::size_t k, double t) {
  const std::size_t n = blocks.n();
  Matrix eb = expm(blocks.B[k], t);
  Matrix full(n + 1, n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      full(i, j) = eb(i, j);
      row += eb(i, j);
    }
    full(i, n) = 1.0 - row;
  }
  full(n, n) = 1.0;
  return full;
}

/// The p=2 block pattern: states ordered as (G1^c n G2^c, G1 \ {Delta},
/// G2 \ {Delta}) so each B^(k) is [[B11,B12,B13],[0,B22,0],[0,0,B33]].
struct StructuredBlocks {
  std::size_t n1 = 0, n2 = 0, n3 = 0;
  struct RegimeBlocks {
    Matrix b11, b12, b13, b22, b33;
  };
  std::vector<RegimeBlocks> regime;  // one per regime

  std::size_t m() const { return regime.size(); }
};

inline StructuredBlocks structured_blocks(const PhaseBlocks& blocks,
                                          const ClosedSetFamily& family,
                                          double tol = 1e-12) {
  if (family.p != 2)
    throw StructureMismatchError("structured blocks require exactly two closed sets");
  const std::size_t n = blocks.n();

  // classify transient states by membership
  std::vector<int> cls(n);  // 0: outside both, 1: in Gamma_1, 2: in Gamma_2
  for (std::size_t s = 0; s < n; ++s) {
    const bool g1 = family.contains(0, s), g2 = family.contains(1, s);
    cls[s] = g1 ? 1 : (g2 ? 2 : 0);
  }
  StructuredBlocks sb;
  for (std::size_t s = 0; s < n; ++s) {
    if (cls[s] == 0) ++sb.n1;
    else if (cls[s] == 1) ++sb.n2;
    else ++sb.n3;
  }
  // states must already be ordered block-contiguously
  for (std::size_t s = 0; s < n; ++s) {
    const int want = s < sb.n1 ? 0 : (s < sb.n1 + sb.n2 ? 1 : 2);
    if (cls[s] != want)
      throw StructureMismatchError(
          "states are not ordered by (outside, Gamma_1, Gamma_2) blocks");
  }

  const std::size_t o2 = sb.n1, o3 = sb.n1 + sb.n2;
  for (std::size_t k = 0; k < blocks.m(); ++k) {
    const Matrix& b = blocks.B[k];
    auto check_zero = [&](std::size_t i0, std::size_t j0, std::size_t r,
                          std::size_t c) {
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j)
          if (std::fabs(b(i0 + i, j0 + j)) > tol)
            throw StructureMismatchError("nonzero entry in a structurally zero block");
    };
    check_zero(o2, 0, sb.n2, sb.n1);   // B21
    check_zero(o3, 0, sb.n3, sb.n1);   // B31
    check_zero(o2, o3, sb.n2, sb.n3);  // B23
    check_zero(o3, o2, sb.n3, sb.n2);  // B32
    StructuredBlocks::RegimeBlocks rb;
    rb.b11 = b.block(0, 0, sb.n1, sb.n1);
    rb.b12 = b.block(0, o2, sb.n1, sb.n2);
    rb.b13 = b.block(0, o3, sb.n1, sb.n3);
    rb.b22 = b.block(o2, o2, sb.n2, sb.n2);
    rb.b33 = b.block(o3, o3, sb.n3, sb.n3);
    sb.regime.push_back(std::move(rb));
  }
  return sb;
}

/// Relabels states by perm (new index i holds old state perm[i]); the
/// absorbing state must stay last. Useful to bring arbitrary inputs into the
/// contiguous block order structured_blocks expects.
inline MixtureModel reorder_states(const MixtureModel& model,
                                   const std::vector<std::size_t>& perm) {
  const std::size_t N = model.n + 1;
  if (perm.size() != N || perm.back() != model.n)
    throw std::invalid_argument("reorder_states: permutation must fix the absorbing state last");
  MixtureModel out;
  out.n = model.n;
  out.m = model.m;
  out.pi0.resize(N);
  for (std::size_t i = 0; i < N; ++i) out.pi0[i] = model.pi0[perm[i]];
  for (std::size_t k = 0; k < model.m; ++k) {
    Matrix q(N, N);
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j) q(i, j) = model.Q[k](perm[i], perm[j]);
    out.Q.push_back(std::move(q));
    Vector s(N);
    for (std::size_t i = 0; i < N; ++i) s[i] = model.S0[k][perm[i]];
    out.S0.push_back(std::move(s));
  }
  return out;
}

inline ClosedSetFamily reorder_states(const ClosedSetFamily& family,
                                      const std::vector<std::size_t>& perm) {
  std::vector<std::size_t> inv(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) inv[perm[i]] = i;
  std::vector<std::vector<std::size_t>> sets;
  for (const auto& g : family.gamma) {
    std::vector<std::size_t> s;
    for (std::size_t x : g) s.push_back(inv[x]);
    sets.push_back(std::move(s));
  }
  return ClosedSetFamily::make(family.n, std::move(sets));
}

}  // namespace phasemix

#endif
