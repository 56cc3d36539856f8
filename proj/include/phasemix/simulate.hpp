#ifndef PHASEMIX_SIMULATE_HPP
#define PHASEMIX_SIMULATE_HPP

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <thread>
#include <vector>

#include "phasemix/inference.hpp"
#include "phasemix/model.hpp"

namespace phasemix {

struct SimConfig {
  std::size_t n_paths = 100000;
  std::uint64_t seed = 0;
  double horizon = 0.0;  // 0: choose 50 / max diagonal rate
  bool antithetic = false;
};

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n_used = 0;       // paths entering the estimate
  std::size_t n_attempted = 0;  // paths sampled (rejection included)
  double censored_fraction = 0.0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based per-path stream: the state is derived from (seed, path
/// index) alone, so serial and parallel runs produce identical samples.
class PathRng {
 public:
  PathRng(std::uint64_t seed, std::uint64_t path_index, bool antithetic)
      : antithetic_(antithetic && (path_index % 2 == 1)) {
    state_ = seed;
    state_ = splitmix64(state_) ^ path_index;
    splitmix64(state_);
  }

  double uniform() {
    const double u =
        (splitmix64(state_) >> 11) * 0x1.0p-53 + 0x1.0p-54;  // u in (0,1)
    return antithetic_ ? 1.0 - u : u;
  }

  double exponential(double rate) { return -std::log(uniform()) / rate; }

 private:
  std::uint64_t state_;
  bool antithetic_;
};

inline std::size_t thread_budget() {
  std::size_t n = std::thread::hardware_concurrency();
  if (n == 0) n = 1;
  if (const char* cap = std::getenv("PHASEMIX_THREADS")) {
    const long requested = std::strtol(cap, nullptr, 10);
    if (requested > 0 && static_cast<std::size_t>(requested) < n)
      n = static_cast<std::size_t>(requested);
  }
  return n;
}

}  // namespace detail

/// One sampled trajectory: the drawn regime, the transient-state path, and
/// where (if anywhere) it was absorbed before the horizon.
struct ExitSample {
  std::size_t regime = 0;
  PathRecord path;  // transient states only; horizon = absorption or censor
  bool absorbed = false;
  double absorption_time = 0.0;
};

inline double default_horizon(const MixtureModel& model) {
  double max_rate = 0.0;
  for (const auto& q : model.Q)
    for (std::size_t i = 0; i < model.n; ++i)
      max_rate = std::max(max_rate, -q(i, i));
  return max_rate > 0.0 ? 50.0 / max_rate : 1.0;
}

inline ExitSample sample_path(const MixtureModel& model, detail::PathRng& rng,
                              double horizon) {
  ExitSample out;
  // initial state from pi0, then the regime from the mixing column there
  double u = rng.uniform();
  std::size_t state = model.n - 1;
  for (std::size_t i = 0; i < model.n; ++i) {
    u -= model.pi0[i];
    if (u <= 0.0) {
      state = i;
      break;
    }
  }
  double v = rng.uniform();
  out.regime = model.m - 1;
  for (std::size_t k = 0; k < model.m; ++k) {
    v -= model.S0[k][state];
    if (v <= 0.0) {
      out.regime = k;
      break;
    }
  }

  const Matrix& q = model.Q[out.regime];
  double now = 0.0;
  out.path.events.push_back({0.0, state});
  for (;;) {
    const double rate = -q(state, state);
    if (rate <= 0.0) {
      now = horizon;
      break;
    }
    now += rng.exponential(rate);
    if (now >= horizon) {
      now = horizon;
      break;
    }
    double w = rng.uniform() * rate;
    std::size_t next = model.delta();
    for (std::size_t j = 0; j <= model.n; ++j) {
      if (j == state) continue;
      w -= q(state, j);
      if (w <= 0.0) {
        next = j;
        break;
      }
    }
    if (next == model.delta()) {
      out.absorbed = true;
      out.absorption_time = now;
      break;
    }
    state = next;
    out.path.events.push_back({now, state});
  }
  out.path.horizon = now;
  return out;
}

/// First entry times into each closed set; entries still pending at the end
/// of the path are reported as censored.
struct ExitTimes {
  Vector tau;
  std::vector<bool> censored;
};

inline ExitTimes exit_times(const ExitSample& sample,
                            const ClosedSetFamily& family) {
  ExitTimes out;
  out.tau.assign(family.p, 0.0);
  out.censored.assign(family.p, true);
  for (std::size_t k = 0; k < family.p; ++k) {
    for (const auto& e : sample.path.events)
      if (family.contains(k, e.state)) {
        out.tau[k] = e.time;
        out.censored[k] = false;
        break;
      }
    if (out.censored[k] && sample.absorbed) {
      out.tau[k] = sample.absorption_time;
      out.censored[k] = false;
    }
    if (out.censored[k]) out.tau[k] = sample.path.horizon;
  }
  return out;
}

namespace detail {

/// State occupied at time t, or the absorbing state if already absorbed.
inline std::size_t state_at(const ExitSample& s, double t,
                            std::size_t delta) {
  if (s.absorbed && s.absorption_time <= t) return delta;
  std::size_t state = s.path.events.front().state;
  for (const auto& e : s.path.events) {
    if (e.time > t) break;
    state = e.state;
  }
  return state;
}

struct Accumulator {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t used = 0;
  std::size_t attempted = 0;
  std::size_t censored = 0;

  void add(double x) {
    sum += x;
    sum_sq += x * x;
    ++used;
  }
  void merge(const Accumulator& o) {
    sum += o.sum;
    sum_sq += o.sum_sq;
    used += o.used;
    attempted += o.attempted;
    censored += o.censored;
  }
};

/// Runs per_path over every path index. Work is split into fixed blocks of
/// contiguous indices that threads claim dynamically; each block accumulates
/// in index order and blocks merge in block order, so the result is
/// bit-identical for any thread count.
template <class PerPath>
inline Accumulator run_paths(const SimConfig& cfg, PerPath per_path) {
  const std::size_t n_blocks = std::min<std::size_t>(cfg.n_paths, 256);
  const std::size_t block_len = (cfg.n_paths + n_blocks - 1) / n_blocks;
  std::vector<Accumulator> partial(n_blocks);
  std::atomic<std::size_t> next_block{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t b = next_block.fetch_add(1);
      if (b >= n_blocks) return;
      Accumulator& acc = partial[b];
      const std::size_t hi = std::min(cfg.n_paths, (b + 1) * block_len);
      for (std::size_t i = b * block_len; i < hi; ++i) {
        PathRng rng(cfg.seed, i, cfg.antithetic);
        ++acc.attempted;
        per_path(rng, acc);
      }
    }
  };
  const std::size_t n_threads = std::min(thread_budget(), n_blocks);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < n_threads; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  Accumulator total;
  for (const auto& acc : partial) total.merge(acc);
  return total;
}

/// Acceptance test of the conditioning event at time t; simulation supports
/// the scenarios that fix the current state, the initial state, or survival.
inline bool accept_scenario(const MixtureModel& model, const Scenario& sc,
                            const ExitSample& sample) {
  const std::size_t delta = model.delta();
  return std::visit(
      [&](const auto& s) -> bool {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, CurrentOnly>)
          return state_at(sample, s.t, delta) == s.j;
        else if constexpr (std::is_same_v<T, InitialAndCurrent>)
          return sample.path.initial_state() == s.i0 &&
                 state_at(sample, s.t, delta) == s.j;
        else if constexpr (std::is_same_v<T, AliveCurrentOnly>)
          return state_at(sample, s.t, delta) != delta;
        else if constexpr (std::is_same_v<T, AliveInitial>)
          return sample.path.initial_state() == s.i0 &&
                 state_at(sample, s.t, delta) != delta;
        else
          throw std::invalid_argument(
              "simulation supports state/survival conditioning only");
      },
      sc);
}

inline void check_acceptance(const Accumulator& acc) {
  if (acc.attempted >= 10000 &&
      static_cast<double>(acc.used) < 1e-4 * static_cast<double>(acc.attempted))
    throw ImpossibleObservationError(
        "conditioning event too rare for rejection sampling");
}

inline Estimate binomial_estimate(const Accumulator& acc) {
  Estimate est;
  est.n_used = acc.used;
  est.n_attempted = acc.attempted;
  if (acc.used == 0) return est;
  const double p = acc.sum / static_cast<double>(acc.used);
  est.value = p;
  est.std_error = std::sqrt(p * (1.0 - p) / static_cast<double>(acc.used));
  return est;
}

inline Estimate mean_estimate(const Accumulator& acc) {
  Estimate est;
  est.n_used = acc.used;
  est.n_attempted = acc.attempted;
  est.censored_fraction = acc.attempted > 0
                              ? static_cast<double>(acc.censored) /
                                    static_cast<double>(acc.attempted)
                              : 0.0;
  if (acc.used == 0) return est;
  const double n = static_cast<double>(acc.used);
  est.value = acc.sum / n;
  const double var = std::max(acc.sum_sq / n - est.value * est.value, 0.0);
  est.std_error = std::sqrt(var / n);
  return est;
}

}  // namespace detail

/// Empirical joint survival P{tau_1 > t_1, ..., tau_p > t_p | scenario},
/// conditioning by rejection.
inline Estimate estimate_surv(const MixtureModel& model,
                              const ClosedSetFamily& family,
                              const Scenario& sc, const Vector& times,
                              const SimConfig& cfg) {
  if (times.size() != family.p)
    throw std::invalid_argument("estimate_surv: one time per closed set");
  double horizon = cfg.horizon > 0.0 ? cfg.horizon : default_horizon(model);
  for (double ti : times) horizon = std::max(horizon, ti * 1.0625 + 1.0);
  horizon = std::max(horizon, scenario_time(sc) + 1.0);

  const auto acc = detail::run_paths(cfg, [&](detail::PathRng& rng,
                                              detail::Accumulator& a) {
    const ExitSample sample = sample_path(model, rng, horizon);
    if (!detail::accept_scenario(model, sc, sample)) return;
    const ExitTimes et = exit_times(sample, family);
    bool all_later = true;
    for (std::size_t k = 0; k < family.p; ++k)
      // a censored entry means no exit before the horizon >= t_k
      if (!et.censored[k] && et.tau[k] <= times[k]) all_later = false;
    a.add(all_later ? 1.0 : 0.0);
  });
  detail::check_acceptance(acc);
  return detail::binomial_estimate(acc);
}

/// Empirical n-th moment of the absorption time (censored paths excluded).
inline Estimate estimate_moment(const MixtureModel& model, unsigned n,
                                const SimConfig& cfg) {
  const double horizon =
      cfg.horizon > 0.0 ? cfg.horizon : default_horizon(model);
  const auto acc = detail::run_paths(
      cfg, [&](detail::PathRng& rng, detail::Accumulator& a) {
        const ExitSample sample = sample_path(model, rng, horizon);
        if (!sample.absorbed) {
          ++a.censored;
          return;
        }
        a.add(std::pow(sample.absorption_time, static_cast<double>(n)));
      });
  return detail::mean_estimate(acc);
}

/// Empirical cross moment E[tau_1 tau_2] (censored paths excluded).
inline Estimate estimate_cross_moment(const MixtureModel& model,
                                      const ClosedSetFamily& family,
                                      const SimConfig& cfg) {
  if (family.p != 2)
    throw std::invalid_argument("estimate_cross_moment: two closed sets");
  const double horizon =
      cfg.horizon > 0.0 ? cfg.horizon : default_horizon(model);
  const auto acc = detail::run_paths(
      cfg, [&](detail::PathRng& rng, detail::Accumulator& a) {
        const ExitSample sample = sample_path(model, rng, horizon);
        const ExitTimes et = exit_times(sample, family);
        if (et.censored[0] || et.censored[1]) {
          ++a.censored;
          return;
        }
        a.add(et.tau[0] * et.tau[1]);
      });
  return detail::mean_estimate(acc);
}

/// Empirical mass of simultaneous exits P{tau_1 = tau_2}; exact ties arise
/// from shared jumps, so double equality is the right test.
inline Estimate estimate_diag_mass(const MixtureModel& model,
                                   const ClosedSetFamily& family,
                                   const SimConfig& cfg) {
  if (family.p != 2)
    throw std::invalid_argument("estimate_diag_mass: two closed sets");
  const double horizon =
      cfg.horizon > 0.0 ? cfg.horizon : default_horizon(model);
  const auto acc = detail::run_paths(
      cfg, [&](detail::PathRng& rng, detail::Accumulator& a) {
        const ExitSample sample = sample_path(model, rng, horizon);
        const ExitTimes et = exit_times(sample, family);
        if (et.censored[0] || et.censored[1]) {
          ++a.censored;
          return;
        }
        a.add(et.tau[0] == et.tau[1] ? 1.0 : 0.0);
      });
  return detail::binomial_estimate(acc);
}

}  // namespace phasemix

#endif
