#ifndef PHASEMIX_INFERENCE_HPP
#define PHASEMIX_INFERENCE_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <variant>
#include <vector>

#include "phasemix/model.hpp"
#include "phasemix/spectrum.hpp"

namespace phasemix {

/// A realized trajectory over [0, horizon): jump events (time, state), the
/// first at time 0.
struct PathRecord {
  struct Event {
    double time;
    std::size_t state;
  };
  std::vector<Event> events;
  double horizon = 0.0;

  std::size_t initial_state() const { return events.front().state; }
  std::size_t last_state() const { return events.back().state; }
};

struct PathStats {
  Vector occupation;  // T_l, length n+1
  Matrix jumps;       // N_lj, (n+1)x(n+1)
};

inline PathStats path_stats(const PathRecord& rec, std::size_t n_states) {
  if (rec.events.empty())
    throw std::invalid_argument("path: no events");
  if (rec.events.front().time != 0.0)
    throw std::invalid_argument("path: first event must be at time 0");
  PathStats st{Vector(n_states, 0.0), Matrix(n_states, n_states)};
  for (std::size_t i = 0; i < rec.events.size(); ++i) {
    const auto& e = rec.events[i];
    if (e.state >= n_states)
      throw std::invalid_argument("path: state index out of range");
    if (e.time >= rec.horizon && !(rec.horizon == 0.0 && e.time == 0.0))
      throw std::invalid_argument("path: event at or beyond horizon");
    if (i > 0) {
      const auto& prev = rec.events[i - 1];
      if (e.time <= prev.time)
        throw std::invalid_argument("path: times must be strictly increasing");
      // repeated states are checkpoints, not jumps, and count no transition
      if (e.state != prev.state) st.jumps(prev.state, e.state) += 1.0;
    }
    const double next_t =
        (i + 1 < rec.events.size()) ? rec.events[i + 1].time : rec.horizon;
    st.occupation[e.state] += next_t - e.time;
  }
  return st;
}

/// Truncation of a path to [0, t); the state at t- becomes the last state.
inline PathRecord truncate(const PathRecord& rec, double t) {
  PathRecord out;
  out.horizon = t;
  for (const auto& e : rec.events)
    if (e.time < t) out.events.push_back(e);
  return out;
}

inline double log_likelihood(const PathStats& st, const Matrix& q) {
  const std::size_t N = st.occupation.size();
  double ll = 0.0;
  for (std::size_t l = 0; l < N; ++l) {
    ll -= (-q(l, l)) * st.occupation[l];
    for (std::size_t j = 0; j < N; ++j) {
      if (j == l) continue;
      const double cnt = st.jumps(l, j);
      if (cnt > 0.0) {
        if (q(l, j) <= 0.0) return -std::numeric_limits<double>::infinity();
        ll += cnt * std::log(q(l, j));
      }
    }
  }
  return ll;
}

/// Probability of observing the path under intensity matrix q.
inline double likelihood(const PathRecord& rec, const Matrix& q) {
  const double ll = log_likelihood(path_stats(rec, q.rows()), q);
  return std::isinf(ll) ? 0.0 : std::exp(ll);
}

// --- information scenarios ---------------------------------------------

struct FullPath {           // past path plus current state (its last state)
  PathRecord path;
};
struct CurrentOnly {        // {X_t = j}
  std::size_t j;
  double t;
};
struct InitialAndCurrent {  // {X_0 = i0, X_t = j}
  std::size_t i0;
  std::size_t j;
  double t;
};
struct PastOnlyFull {       // full path, current state unrestricted
  PathRecord path;
};
struct AliveFull {          // full path, conditioned on survival at horizon
  PathRecord path;
};
struct AliveCurrentOnly {   // {X_t != Delta}
  double t;
};
struct AliveInitial {       // {X_0 = i0, X_t != Delta}
  std::size_t i0;
  double t;
};

using Scenario = std::variant<FullPath, CurrentOnly, InitialAndCurrent,
                              PastOnlyFull, AliveFull, AliveCurrentOnly,
                              AliveInitial>;

inline double scenario_time(const Scenario& sc) {
  return std::visit(
      [](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, FullPath> ||
                      std::is_same_v<T, PastOnlyFull> ||
                      std::is_same_v<T, AliveFull>)
          return s.path.horizon;
        else
          return s.t;
      },
      sc);
}

namespace detail {

/// Per-regime evidence vectors a_k with a_k[j] proportional (with a common
/// factor across regimes) to P{F_{t,j}, phi=k}. Likelihoods of observed
/// paths are handled in log space with max-subtraction.
inline std::vector<Vector> evidence_vectors(const MixtureModel& model,
                                            const Scenario& sc) {
  const std::size_t N = model.n + 1;
  std::vector<Vector> a(model.m, Vector(N, 0.0));

  auto no_past = [&](double t) {
    for (std::size_t k = 0; k < model.m; ++k) {
      Vector w = diag_apply(model.S0[k], model.pi0);
      a[k] = w * expm(model.Q[k], t);
    }
  };
  auto known_initial = [&](std::size_t i0, double t) {
    for (std::size_t k = 0; k < model.m; ++k) {
      Matrix p = expm(model.Q[k], t);
      for (std::size_t j = 0; j < N; ++j) a[k][j] = model.S0[k][i0] * p(i0, j);
    }
  };
  auto from_path = [&](const PathRecord& rec) {
    const PathStats st = path_stats(rec, N);
    const std::size_t i0 = rec.initial_state();
    const std::size_t j = rec.last_state();
    Vector ll(model.m);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < model.m; ++k) {
      const double prior = model.S0[k][i0];
      ll[k] = prior > 0.0 ? std::log(prior) + log_likelihood(st, model.Q[k])
                          : -std::numeric_limits<double>::infinity();
      best = std::max(best, ll[k]);
    }
    if (std::isinf(best))
      throw ImpossibleObservationError("path impossible under every regime");
    for (std::size_t k = 0; k < model.m; ++k)
      a[k][j] = std::exp(ll[k] - best);
  };

  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, CurrentOnly> ||
                      std::is_same_v<T, AliveCurrentOnly>)
          no_past(s.t);
        else if constexpr (std::is_same_v<T, InitialAndCurrent>)
          known_initial(s.i0, s.t);
        else if constexpr (std::is_same_v<T, AliveInitial>)
          known_initial(s.i0, s.t);
        else
          from_path(s.path);
      },
      sc);
  return a;
}

/// Posterior regime weights at state j; returns the prior diagonal when the
/// evidence at j vanishes (the state carries no filter mass there).
inline Vector regime_posterior_at(const MixtureModel& model,
                                  const std::vector<Vector>& ev, std::size_t j,
                                  bool* defined = nullptr) {
  Vector s(model.m);
  double denom = 0.0;
  for (std::size_t k = 0; k < model.m; ++k) denom += ev[k][j];
  if (denom <= 0.0) {
    if (defined) *defined = false;
    for (std::size_t k = 0; k < model.m; ++k) s[k] = model.S0[k][j];
    return s;
  }
  if (defined) *defined = true;
  for (std::size_t k = 0; k < model.m; ++k) s[k] = ev[k][j] / denom;
  return s;
}

inline std::size_t current_state(const Scenario& sc) {
  return std::visit(
      [](const auto& s) -> std::size_t {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, FullPath>)
          return s.path.last_state();
        else if constexpr (std::is_same_v<T, CurrentOnly> ||
                           std::is_same_v<T, InitialAndCurrent>)
          return s.j;
        else
          throw std::invalid_argument(
              "scenario does not determine the current state");
      },
      sc);
}

}  // namespace detail

/// Posterior regime probabilities s_j^{(k)}(t) given a scenario with a known
/// current state. Sums to 1 over regimes.
inline Vector switching_update(const MixtureModel& model, const Scenario& sc) {
  const std::size_t j = detail::current_state(sc);
  const auto ev = detail::evidence_vectors(model, sc);
  bool defined = false;
  Vector s = detail::regime_posterior_at(model, ev, j, &defined);
  if (!defined)
    throw ImpossibleObservationError(
        "observation impossible under every regime");
  return s;
}

/// Bayesian update of the state distribution over the full state space,
/// given past-only information.
inline Vector state_update(const MixtureModel& model, const Scenario& sc) {
  const auto ev = detail::evidence_vectors(model, sc);
  const std::size_t N = model.n + 1;
  Vector pi(N, 0.0);
  double denom = 0.0;
  for (std::size_t k = 0; k < model.m; ++k)
    for (std::size_t j = 0; j < N; ++j) {
      pi[j] += ev[k][j];
      denom += ev[k][j];
    }
  if (denom <= 0.0)
    throw ImpossibleObservationError("observation impossible under every regime");
  for (double& x : pi) x /= denom;
  return pi;
}

/// State distribution over the transient states conditioned on survival.
inline Vector state_update_alive(const MixtureModel& model,
                                 const Scenario& sc) {
  const auto ev = detail::evidence_vectors(model, sc);
  Vector pi(model.n, 0.0);
  double denom = 0.0;
  for (std::size_t k = 0; k < model.m; ++k)
    for (std::size_t j = 0; j < model.n; ++j) {
      pi[j] += ev[k][j];
      denom += ev[k][j];
    }
  if (denom <= 0.0)
    throw ImpossibleObservationError("survival impossible");
  for (double& x : pi) x /= denom;
  return pi;
}

namespace detail {

struct LimitSpectra {
  std::vector<Spectrum> sp;
  std::vector<std::size_t> tied;  // regimes sharing the maximal dominant value
};

inline LimitSpectra limit_spectra(const std::vector<Matrix>& mats,
                                  const Tolerances& tol) {
  LimitSpectra out;
  double lam_bar = -std::numeric_limits<double>::infinity();
  double scale = 0.0;
  for (const auto& m : mats) {
    Spectrum s = eigen(m, tol);
    if (!s.all_real_and_simple)
      throw UnsupportedSpectrumError(
          "limit requires real simple spectra in every regime");
    const double dom = s.eigenvalues[s.dominant_index].real();
    lam_bar = std::max(lam_bar, dom);
    for (const auto& ev : s.eigenvalues) scale = std::max(scale, std::abs(ev));
    out.sp.push_back(std::move(s));
  }
  for (std::size_t k = 0; k < mats.size(); ++k) {
    const double dom = out.sp[k].eigenvalues[out.sp[k].dominant_index].real();
    if (dom >= lam_bar - tol.eigen_gap * scale) out.tied.push_back(k);
  }
  return out;
}

/// Limit of the normalized ratios rows[k]^T e^{M_k t} e_j as t grows: the
/// spectral levels are scanned from the top, and the first level carrying
/// mass at state j decides the weights. Handles winners, cross-regime ties,
/// and levels whose projector happens to vanish at j.
inline Vector spectral_limit_weights(const std::vector<Matrix>& mats,
                                     const std::vector<Vector>& rows,
                                     std::size_t j, const Tolerances& tol) {
  struct Entry {
    std::size_t k;
    double lambda;
    double coeff;
  };
  std::vector<Entry> entries;
  double scale = 0.0;
  for (std::size_t k = 0; k < mats.size(); ++k) {
    const Spectrum s = eigen(mats[k], tol);
    if (!s.all_real_and_simple)
      throw UnsupportedSpectrumError(
          "limit requires real simple spectra in every regime");
    for (std::size_t l = 0; l < s.eigenvalues.size(); ++l) {
      const double lam = s.eigenvalues[l].real();
      scale = std::max(scale, std::abs(lam));
      const Vector w = rows[k] * lagrange_coefficient(mats[k], s, l);
      entries.push_back({k, lam, w[j]});
    }
  }
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.lambda > b.lambda; });
  const double gap = tol.eigen_gap * std::max(scale, 1.0);
  std::size_t i = 0;
  while (i < entries.size()) {
    const double level = entries[i].lambda;
    Vector out(mats.size(), 0.0);
    double total = 0.0, peak = 0.0;
    std::size_t e = i;
    for (; e < entries.size() && entries[e].lambda >= level - gap; ++e) {
      out[entries[e].k] += entries[e].coeff;
      total += entries[e].coeff;
      peak = std::max(peak, std::abs(entries[e].coeff));
    }
    if (peak > 1e-9 && std::abs(total) > 1e-9 * peak) {
      for (double& x : out) x /= total;
      return out;
    }
    i = e;
  }
  throw ImpossibleObservationError(
      "limit: no spectral mass reaches the conditioned state");
}

}  // namespace detail

/// Long-run switching probabilities lim s_j^{(k)}(t) under partial
/// information. The regime whose dominant surviving eigenvalue wins takes
/// all the mass; tied regimes share it through their spectral projectors.
inline Vector switching_limit(const MixtureModel& model, std::size_t j,
                              const Tolerances& tol = default_tolerances()) {
  if (j == model.delta()) {
    std::vector<Vector> rows;
    for (std::size_t k = 0; k < model.m; ++k)
      rows.push_back(diag_apply(model.S0[k], model.pi0));
    return detail::spectral_limit_weights(model.Q, rows, j, tol);
  }
  // conditioning on a transient current state: the dynamics seen through
  // e_j live in the phase blocks, so the comparison runs over their spectra
  const PhaseBlocks blocks = block_partition(model, tol);
  std::vector<Vector> rows;
  for (std::size_t k = 0; k < model.m; ++k) {
    Vector w(model.n);
    for (std::size_t i = 0; i < model.n; ++i)
      w[i] = model.pi0[i] * model.S0[k][i];
    rows.push_back(std::move(w));
  }
  return detail::spectral_limit_weights(blocks.B, rows, j, tol);
}

/// Quasi-stationary state distribution lim pi_j(t) over the transient states.
inline Vector state_limit(const MixtureModel& model,
                          const Tolerances& tol = default_tolerances()) {
  const PhaseBlocks blocks = block_partition(model, tol);
  const auto ls = detail::limit_spectra(blocks.B, tol);
  Vector num(model.n, 0.0);
  for (std::size_t k : ls.tied) {
    const Matrix proj =
        lagrange_coefficient(blocks.B[k], ls.sp[k], ls.sp[k].dominant_index);
    Vector w(model.n);
    for (std::size_t i = 0; i < model.n; ++i)
      w[i] = model.pi0[i] * model.S0[k][i];
    w = w * proj;
    for (std::size_t i = 0; i < model.n; ++i) num[i] += w[i];
  }
  const double denom = sum(num);
  if (denom == 0.0)
    throw ImpossibleObservationError("state limit: zero projector mass");
  for (double& x : num) x /= denom;
  return num;
}

/// Conditional transition probability matrix P(t,s) = sum_k S~^(k)(t)
/// e^{Q^(k)(s-t)}. States whose filter mass vanishes keep their prior
/// switching entries (never read by the distribution formulas).
inline Matrix transition_matrix(const MixtureModel& model, const Scenario& sc,
                                double s) {
  const double t = scenario_time(sc);
  if (s < t) throw std::invalid_argument("transition_matrix: s < t");
  const auto ev = detail::evidence_vectors(model, sc);
  const std::size_t N = model.n + 1;
  Matrix p(N, N);
  for (std::size_t k = 0; k < model.m; ++k) {
    const Matrix ek = expm(model.Q[k], s - t);
    for (std::size_t i = 0; i < N; ++i) {
      const double ski = detail::regime_posterior_at(model, ev, i)[k];
      for (std::size_t j = 0; j < N; ++j) p(i, j) += ski * ek(i, j);
    }
  }
  return p;
}

/// Weighting entering the conditional exit-time laws: the state weight w
/// (e_i or pi(t)) and the per-state regime diagonals S^(k)(t), all over the
/// transient states.
struct Weighting {
  double t = 0.0;
  Vector w;                   // length n
  std::vector<Vector> sdiag;  // m diagonals of length n
};

inline Weighting make_weighting(const MixtureModel& model, const Scenario& sc) {
  Weighting wt;
  wt.t = scenario_time(sc);
  const auto ev = detail::evidence_vectors(model, sc);
  wt.sdiag.assign(model.m, Vector(model.n, 0.0));
  for (std::size_t j = 0; j < model.n; ++j) {
    const Vector s = detail::regime_posterior_at(model, ev, j);
    for (std::size_t k = 0; k < model.m; ++k) wt.sdiag[k][j] = s[k];
  }

  const bool current_known = std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        return std::is_same_v<T, FullPath> || std::is_same_v<T, CurrentOnly> ||
               std::is_same_v<T, InitialAndCurrent>;
      },
      sc);
  if (current_known) {
    const std::size_t j = detail::current_state(sc);
    if (j >= model.n)
      throw std::invalid_argument(
          "exit-time laws require a transient current state");
    wt.w = basis_vector(model.n, j);
  } else {
    wt.w.assign(model.n, 0.0);
    double denom = 0.0;
    for (std::size_t k = 0; k < model.m; ++k)
      for (std::size_t j = 0; j < model.n; ++j) {
        wt.w[j] += ev[k][j];
        denom += ev[k][j];
      }
    if (denom <= 0.0) throw ImpossibleObservationError("survival impossible");
    for (double& x : wt.w) x /= denom;
  }
  return wt;
}

}  // namespace phasemix

#endif
