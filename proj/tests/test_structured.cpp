#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include <phasemix/distributions.hpp>
#include <phasemix/examples.hpp>
#include <phasemix/structured.hpp>

#include "oracles.hpp"

using namespace phasemix;

TEST_CASE("structured bivariate density agrees with the generic formula") {
  const auto mf = example_birth_death();
  for (const Scenario& sc :
       {Scenario{AliveCurrentOnly{0.0}}, Scenario{CurrentOnly{0, 0.5}},
        Scenario{CurrentOnly{2, 1.0}}}) {
    const auto c = make_context(mf.model, sc);
    const auto sb = structured_blocks(c.blocks, mf.family);
    const double t = scenario_time(sc);
    for (int i = 0; i < 20; ++i)
      for (int j = 0; j < 20; ++j) {
        const double t1 = t + 0.4 * i;
        const double t2 = t + 0.4 * j;
        const auto generic = dens_biv(c.blocks, mf.family, c.wt, t1, t2);
        const auto fast = structured_dens_biv(sb, c.wt, t1, t2);
        CHECK(generic.region == fast.region);
        CHECK(std::fabs(generic.value - fast.value) < 1e-9);
      }
  }
}

TEST_CASE("structured density agrees on random block models") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 5; ++trial) {
    const auto rm = oracles::random_family_model(rng, 3, 2, 2, 2);
    REQUIRE(validate(rm.model, &rm.family).ok());
    const auto c = make_context(rm.model, AliveCurrentOnly{0.0});
    const auto sb = structured_blocks(c.blocks, rm.family);
    for (double t1 : {0.3, 1.1, 2.0})
      for (double t2 : {0.3, 0.8, 2.6}) {
        const auto generic = dens_biv(c.blocks, rm.family, c.wt, t1, t2);
        const auto fast = structured_dens_biv(sb, c.wt, t1, t2);
        CHECK(std::fabs(generic.value - fast.value) < 1e-9);
      }
  }
}

TEST_CASE("singular part vanishes exactly when the deficits do") {
  // no exits straight from the common complement: zero diagonal density
  BirthDeathParams p;
  p.delta3 = 0.0;
  p.gamma1 = 1.5;  // keep state 3 leaving through the exit sets only
  const auto mf = example_birth_death(p);
  const auto c = make_context(mf.model, AliveCurrentOnly{0.0});
  const auto sb = structured_blocks(c.blocks, mf.family);
  for (double u : {0.5, 1.5, 4.0})
    CHECK(std::fabs(structured_dens_biv(sb, c.wt, u, u).value) < 1e-14);
  const auto cond = singular_condition(mf.model, mf.family);
  CHECK(cond[0]);
  CHECK(cond[1]);
}

TEST_CASE("absolutely continuous parts vanish without overlap transitions") {
  // the common complement cannot reach either exclusive block, so no path
  // produces two distinct exit times
  BirthDeathParams p;
  p.gamma1 = p.gamma2 = 0.0;
  p.delta3 = 2.0;
  const auto mf = example_birth_death(p);
  const auto c = make_context(mf.model, AliveCurrentOnly{0.0});
  const auto sb = structured_blocks(c.blocks, mf.family);
  for (double t1 : {0.5, 2.0})
    for (double t2 : {1.0, 3.0}) {
      if (t1 == t2) continue;
      CHECK(std::fabs(structured_dens_biv(sb, c.wt, t1, t2).value) < 1e-14);
    }
}

TEST_CASE("marginal densities match a collapsed-chain univariate law") {
  const auto mf = example_birth_death();
  const Scenario sc = CurrentOnly{0, 0.0};
  const auto c = make_context(mf.model, sc);
  const auto sb = structured_blocks(c.blocks, mf.family);

  for (int which : {1, 2}) {
    // restriction of the chain to (common complement, other exit block):
    // the first exit to set `which` is the absorption time of that chain
    const std::size_t keep_lo = which == 1 ? sb.n1 + sb.n2 : sb.n1;
    const std::size_t keep_len = which == 1 ? sb.n3 : sb.n2;
    const std::size_t dim = sb.n1 + keep_len;
    MixtureModel collapsed;
    collapsed.n = dim;
    collapsed.m = 2;
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < sb.n1; ++i) keep.push_back(i);
    for (std::size_t i = 0; i < keep_len; ++i) keep.push_back(keep_lo + i);
    for (std::size_t k = 0; k < 2; ++k) {
      Matrix q(dim + 1, dim + 1);
      for (std::size_t i = 0; i < dim; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
          q(i, j) = c.blocks.B[k](keep[i], keep[j]);
          if (j != i) row += q(i, j);
        }
        q(i, dim) = -q(i, i) - row;
      }
      collapsed.Q.push_back(std::move(q));
      Vector s(dim + 1, 0.0);
      for (std::size_t i = 0; i < dim; ++i) s[i] = mf.model.S0[k][keep[i]];
      s[dim] = mf.model.S0[k][5];
      collapsed.S0.push_back(std::move(s));
    }
    collapsed.pi0.assign(dim + 1, 0.0);
    collapsed.pi0[0] = 1.0;
    REQUIRE(validate(collapsed, nullptr).ok());

    for (double s : {0.4, 1.2, 3.0, 6.5}) {
      const double fast = structured_marginal(sb, c.wt, which, s);
      const double slow =
          dens_uni(collapsed, CurrentOnly{0, 0.0}, s).value;
      CHECK(std::fabs(fast - slow) < 1e-9);
    }
  }
}

TEST_CASE("marginals integrate to the continuous mass") {
  const auto mf = example_birth_death();
  const auto c = make_context(mf.model, AliveCurrentOnly{0.0});
  const auto sb = structured_blocks(c.blocks, mf.family);
  for (int which : {1, 2}) {
    const double mass = oracles::quad(
        [&](double s) { return structured_marginal(sb, c.wt, which, s); }, 0.0,
        60.0, 1e-10);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-7));
  }
}

TEST_CASE("asymmetric exit rates separate the two marginals") {
  BirthDeathParams p;
  p.psi = 2.0;
  SUBCASE("symmetric rates give identical marginals") {
    p.delta2 = 1.0;
    const auto mf = example_birth_death(p);
    const auto c = make_context(mf.model, AliveCurrentOnly{0.0});
    const auto sb = structured_blocks(c.blocks, mf.family);
    for (double s = 0.0; s < 8.0; s += 0.25)
      CHECK(std::fabs(structured_marginal(sb, c.wt, 1, s) -
                      structured_marginal(sb, c.wt, 2, s)) < 1e-12);
  }
  SUBCASE("a faster second exit changes the shape") {
    p.delta2 = 5.0;
    const auto mf = example_birth_death(p);
    const auto c = make_context(mf.model, AliveCurrentOnly{0.0});
    const auto sb = structured_blocks(c.blocks, mf.family);
    double gap = 0.0;
    for (double s = 0.0; s < 8.0; s += 0.25)
      gap = std::max(gap, std::fabs(structured_marginal(sb, c.wt, 1, s) -
                                    structured_marginal(sb, c.wt, 2, s)));
    CHECK(gap > 0.01);
  }
}
