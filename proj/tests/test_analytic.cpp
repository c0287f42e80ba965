#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nlsg/analytic.hpp"
#include "nlsg/errors.hpp"
#include "nlsg/function.hpp"
#include "nlsg/graph.hpp"
#include "nlsg/solver.hpp"

using namespace nlsg;
using namespace nlsg::analytic;

TEST_CASE("p = 4 soliton constants in closed form") {
  auto sp = soliton_params(4.0);
  CHECK(sp.gamma == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(sp.alpha == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(sp.beta == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(sp.lambda1 == doctest::Approx(1.0 / 16).epsilon(1e-13));
  CHECK(sp.theta == doctest::Approx(1.0 / 96).epsilon(1e-13));
  // amplitude: a^2 = 2 lambda at p = 4
  CHECK(sp.amp1 == doctest::Approx(std::sqrt(2.0) / 4).epsilon(1e-13));
  CHECK(sp.width1 == doctest::Approx(0.25).epsilon(1e-13));
}

TEST_CASE("soliton profile is even, decaying, and hits its closed-form peak") {
  auto sp = soliton_params(3.5);
  double mu = 1.7;
  CHECK(soliton_value(sp, mu, 0.3) == doctest::Approx(soliton_value(sp, mu, -0.3)));
  CHECK(soliton_value(sp, mu, 0.0) ==
        doctest::Approx(std::pow(mu, sp.alpha) * sp.amp1).epsilon(1e-13));
  double prev = soliton_value(sp, mu, 0.0);
  for (double x : {0.5, 1.0, 2.0, 5.0, 20.0, 100.0}) {
    double v = soliton_value(sp, mu, x);
    CHECK(v < prev);
    prev = v;
  }
  CHECK(soliton_value(sp, mu, 5000.0) == 0.0);  // cosh guard, no overflow
}

TEST_CASE("sampled soliton carries the right mass, energy and multiplier") {
  auto sp = soliton_params(4.0);
  for (double mu : {0.7, 1.0, 1.6}) {
    // window scaled to the decay rate so the clamped far ends are numerically flat
    double L = 12.0 / std::sqrt(soliton_multiplier(4.0, mu));
    GraphPtr line = make_line(L, 60);
    GraphFunction phi = sample(
        line, [&](int e, double x) { return soliton_value(sp, mu, e == 0 ? x : -x); });
    CHECK(mass(phi) == doctest::Approx(mu).epsilon(1e-6));
    CHECK(energy(phi, 4.0) == doctest::Approx(-std::pow(mu, 3) / 96).epsilon(3e-5));
    CHECK(lagrange_multiplier(phi, 4.0) ==
          doctest::Approx(soliton_multiplier(4.0, mu)).epsilon(1e-4));
  }
}

TEST_CASE("line and half-line levels, p subcritical") {
  auto l1 = level_R(4.0, 1.0);
  REQUIRE(l1.finite);
  CHECK(l1.value == doctest::Approx(-1.0 / 96).epsilon(1e-13));

  // half-line level is half of the doubled-mass line level
  for (double mu : {0.5, 1.0, 2.3}) {
    auto lp = level_Rplus(4.0, mu);
    auto lr = level_R(4.0, 2 * mu);
    REQUIRE(lp.finite);
    CHECK(lp.value == doctest::Approx(lr.value / 2).epsilon(1e-14));
  }
  CHECK(level_Rplus(4.0, 1.0).value == doctest::Approx(-1.0 / 24).epsilon(1e-13));

  // scaling law in the mass
  auto sp = soliton_params(3.1);
  for (double mu : {0.4, 2.0}) {
    double want = std::pow(mu, 2 * sp.beta + 1) * level_R(3.1, 1.0).value;
    CHECK(level_R(3.1, mu).value == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("theta by quadrature matches the Gamma-function route") {
  for (double p : {2.7, 3.0, 4.0, 5.0, 5.6}) {
    auto sp = soliton_params(p);
    CHECK(theta_by_quadrature(p) == doctest::Approx(sp.theta).epsilon(1e-9));
  }
}

TEST_CASE("derivative identity holds in closed form") {
  // eps(mu) = -theta mu^(2 beta + 1) and lambda(mu) = lambda1 mu^(2 beta)
  // make eps' = -lambda/2 equivalent to theta (2 beta + 1) = lambda1 / 2
  for (double p : {2.5, 3.0, 4.0, 5.0, 5.7}) {
    auto sp = soliton_params(p);
    CHECK(sp.theta * (2 * sp.beta + 1) ==
          doctest::Approx(sp.lambda1 / 2).epsilon(1e-10));
  }
}

TEST_CASE("critical mass facts at p = 6") {
  CHECK(critical_mass_R() == doctest::Approx(std::sqrt(3.0) * M_PI / 2).epsilon(1e-14));
  CHECK(critical_mass_Rplus() == doctest::Approx(critical_mass_R() / 2).epsilon(1e-14));
  double muR = critical_mass_R();

  auto below = level_R(6.0, 0.9 * muR);
  CHECK(below.finite);
  CHECK(below.value == 0.0);
  auto above = level_R(6.0, 1.1 * muR);
  CHECK(!above.finite);

  auto hbelow = level_Rplus(6.0, 0.45 * muR);
  CHECK(hbelow.finite);
  CHECK(hbelow.value == 0.0);
  CHECK(!level_Rplus(6.0, 0.55 * muR).finite);

  CHECK_THROWS_AS(soliton_params(6.0), invalid_parameter);
  CHECK_THROWS_AS(soliton_params(2.0), invalid_parameter);
}

TEST_CASE("N-preimage lower bound values") {
  CHECK(ncontr_bound(4.0, 1.0, 2) == doctest::Approx(-1.0 / 96).epsilon(1e-13));
  CHECK(ncontr_bound(4.0, 1.0, 3) == doctest::Approx(-(4.0 / 9) / 96).epsilon(1e-13));
  CHECK(ncontr_bound(4.0, 1.0, 4) == doctest::Approx(-1.0 / 384).epsilon(1e-13));
  // scaling in mu
  CHECK(ncontr_bound(4.0, 2.0, 3) == doctest::Approx(8 * ncontr_bound(4.0, 1.0, 3)));
  // p = 6 below the critical mass degenerates to zero
  CHECK(ncontr_bound(6.0, 0.5 * critical_mass_R(), 3) == 0.0);
  CHECK_THROWS_AS(ncontr_bound(6.0, 2 * critical_mass_R(), 3), unsupported_input);
  CHECK_THROWS_AS(ncontr_bound(4.0, 1.0, 1), invalid_parameter);
}

TEST_CASE("gn ratio peaks at the soliton") {
  auto sp = soliton_params(4.0);
  auto soliton_on_own_window = [&](double mu) {
    double L = 12.0 / std::sqrt(soliton_multiplier(4.0, mu));
    GraphPtr line = make_line(L, 50);
    return sample(line,
                  [&](int e, double x) { return soliton_value(sp, mu, e == 0 ? x : -x); });
  };
  GraphFunction phi = soliton_on_own_window(1.0);
  double best = gn_ratio(phi, 4.0);
  // mass-scaled solitons share the ratio (scale invariance)
  GraphFunction phi2 = soliton_on_own_window(1.9);
  CHECK(gn_ratio(phi2, 4.0) == doctest::Approx(best).epsilon(1e-4));
  // a gaussian does strictly worse
  GraphPtr line = make_line(30.0, 50);
  GraphFunction gauss = sample(line, [&](int e, double x) {
    double y = e == 0 ? x : -x;
    return std::exp(-y * y);
  });
  CHECK(gn_ratio(gauss, 4.0) < best);
  // truly flat needs a compact graph: half-line far ends are clamped to zero
  GraphPtr seg = parse_graph_json(
      R"({"vertices":[0,1],"edges":[{"kind":"bounded","length":3.0,"ends":[0,1]}]})", 5, 40);
  GraphFunction flat(seg);
  for (double& v : flat.dofs()) v = 1.0;
  CHECK_THROWS_AS(gn_ratio(flat, 4.0), invalid_parameter);
}

TEST_CASE("minneg candidate meets its guarantee on a short-core star") {
  GraphPtr g = make_star(2, 0.05, 40.0, 60);
  auto mc = minneg_candidate(g, 4.0, 1.0);
  // closed-form delta: N theta 2^(2b) mu^(2b+1) / (c^2 mu^(2a-1) L + N)^(2b+1)
  double c = mc.c;
  CHECK(c == doctest::Approx(std::sqrt(2.0) / 2).epsilon(1e-12));
  double denom = std::pow(c * c * 0.05 + 2.0, 3.0);
  double delta_want = 2.0 * (1.0 / 96) * 4.0 / denom;
  CHECK(mc.delta == doctest::Approx(delta_want).epsilon(1e-10));
  CHECK(mass(mc.v) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(energy(mc.v, 4.0) <= -mc.delta + 1e-6);
}

TEST_CASE("minneg candidate is sharp when the compact core vanishes") {
  GraphPtr g = parse_graph_json(
      R"({"vertices":[0],"edges":[{"kind":"halfline","ends":[0]},{"kind":"halfline","ends":[0]},{"kind":"halfline","ends":[0]}]})",
      40.0, 80);
  auto mc = minneg_candidate(g, 4.0, 1.0);
  CHECK(mc.delta == doctest::Approx(-ncontr_bound(4.0, 1.0, 3)).epsilon(1e-12));
  CHECK(energy(mc.v, 4.0) == doctest::Approx(-mc.delta).epsilon(1e-4));
}
