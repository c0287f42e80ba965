#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nlsg/analytic.hpp"
#include "nlsg/errors.hpp"
#include "nlsg/experiments.hpp"
#include "nlsg/function.hpp"
#include "nlsg/graph.hpp"
#include "nlsg/solver.hpp"

using namespace nlsg;

namespace {

SolverConfig coarse_config() {
  SolverConfig cfg;
  cfg.p = 4.0;
  cfg.points_per_unit = 25;
  cfg.truncation = 60.0;
  cfg.adapt_truncation = false;
  cfg.multistart = 3;
  return cfg;
}

}  // namespace

TEST_CASE("mass sweep records the derivative identity") {
  GraphPtr g = make_tadpole(1.0, 60.0, 25);
  SolverConfig cfg = coarse_config();
  auto recs = sweep_mu(g, cfg, {0.8, 1.0, 1.2});
  REQUIRE(recs.size() == 3);
  for (const auto& r : recs) {
    CHECK(r.converged);
    CHECK(r.n_clusters == 1);
    CHECK(r.energy < 0);
  }
  CHECK(recs[0].multiplier < recs[1].multiplier);
  CHECK(recs[1].multiplier < recs[2].multiplier);
  CHECK(!recs[0].has_derivative);
  CHECK(!recs[2].has_derivative);
  REQUIRE(recs[1].has_derivative);
  // central difference on a 0.2-wide grid; the identity itself is tested to
  // production tolerance in the acceptance suite
  CHECK(recs[1].deriv_residual <= 5e-3 * (1 + std::abs(recs[1].multiplier)));
}

TEST_CASE("sweep rejects bad grids") {
  GraphPtr g = make_tadpole(1.0, 30.0, 20);
  SolverConfig cfg = coarse_config();
  CHECK_THROWS_AS(sweep_mu(g, cfg, {}), invalid_parameter);
  CHECK_THROWS_AS(sweep_mu(g, cfg, {1.0, 1.0}), invalid_parameter);
  CHECK_THROWS_AS(sweep_mu(g, cfg, {1.0, 0.9}), invalid_parameter);
}

TEST_CASE("uniqueness probe finds one cluster on the two-leg star") {
  GraphPtr g = make_star(2, 1.0, 60.0, 30);
  SolverConfig cfg = coarse_config();
  cfg.points_per_unit = 30;
  cfg.multistart = 8;
  auto rep = uniqueness_probe(g, cfg, 1.0);
  CHECK(rep.n_runs == 8);
  CHECK(!rep.inconclusive);
  CHECK(rep.n_converged >= 4);
  CHECK(rep.n_in_window >= 1);
  CHECK((int)rep.labels.size() == rep.n_in_window);
  CHECK((int)rep.member_start.size() == rep.n_in_window);
  CHECK(rep.n_clusters == 1);
  CHECK(rep.max_intra < rep.threshold);
  CHECK(rep.threshold == doctest::Approx(1e-3));
  REQUIRE((int)rep.cluster_energy.size() == 1);
  CHECK(rep.cluster_energy[0] < -1.0 / 96);
}

TEST_CASE("canonicalization folds the graph symmetries") {
  GraphPtr g = make_star(2, 1.0, 20.0, 25);
  auto sp = analytic::soliton_params(4.0);
  // same bump placed on the interior of either half-line
  GraphFunction u1(g), u2(g);
  const Edge& hl = g->edge(1);
  for (int i = 1; i + 1 < hl.n; ++i) {
    double val = analytic::soliton_value(sp, 1.0, g->x(1, i) - 5);
    u1.dof(g->dof(1, i)) = val;
    u2.dof(g->dof(2, i)) = val;
  }
  CHECK(h1_distance(u1, u2) > 1e-2);
  CHECK(h1_distance(canonical_for_symmetry(u1), canonical_for_symmetry(u2)) < 1e-13);

  // loop reflection on the tadpole
  GraphPtr t = make_tadpole(1.0, 10.0, 25);
  GraphFunction v1(t), v2(t);
  const Edge& loop = t->edge(0);
  for (int i = 1; i + 1 < loop.n; ++i) {
    double x = t->x(0, i);
    double val = 1.0 + std::sin(M_PI * x) * (x < 1.0 ? 0.3 : 0.1);
    v1.dof(t->dof(0, i)) = val;
    v2.dof(t->dof(0, loop.n - 1 - i)) = val;
  }
  CHECK(h1_distance(v1, v2) > 1e-3);
  CHECK(h1_distance(canonical_for_symmetry(v1), canonical_for_symmetry(v2)) < 1e-13);
}

TEST_CASE("threshold mass is zero for the two-leg star") {
  SolverConfig cfg = coarse_config();
  CHECK(threshold_mass(2, 1.0, cfg) == 0.0);
  CHECK_THROWS_AS(threshold_mass(1, 1.0, cfg), invalid_parameter);
  CHECK_THROWS_AS(threshold_mass(3, 0.0, cfg), invalid_parameter);
}

TEST_CASE("threshold length brackets the level crossing") {
  SolverConfig cfg = coarse_config();
  cfg.points_per_unit = 20;
  auto tl = threshold_length(3, cfg, 1.0);
  CHECK(tl.t_star > 0);
  CHECK(std::abs(tl.gap_at_star) < 5e-5);
  CHECK(tl.w.converged);
  // at the threshold the star level sits on the line level
  CHECK(tl.w.energy == doctest::Approx(-1.0 / 96).epsilon(2e-2));
}

TEST_CASE("constrained branch energies on the loop-and-terminal family") {
  SolverConfig cfg = coarse_config();
  cfg.points_per_unit = 20;
  cfg.truncation = 40.0;
  auto fm = f_maps(6.0, 4.0, 0.3, 2, cfg, 1.0);
  CHECK(fm.on_terminal.converged);
  CHECK(fm.on_loop.converged);
  CHECK(fm.F_t == doctest::Approx(fm.on_terminal.energy));
  CHECK(fm.F_s == doctest::Approx(fm.on_loop.energy));
  // the long loop beats the short terminal edge decisively here
  CHECK(fm.F_s < fm.F_t - 1e-4);
  // loop-pinned state attains its sup on the loop
  const GroundStateResult& r = fm.on_loop;
  double sup_loop = 0;
  for (int i = 0; i < r.u.graph().edge(1).n; ++i)
    sup_loop = std::max(sup_loop, std::abs(r.u.value(1, i)));
  CHECK(sup_loop >= r.u.max_abs() * (1 - 1e-6));
}

TEST_CASE("nonuniqueness run validates its configuration") {
  NonuniqConfig ncfg;
  ncfg.solver = coarse_config();
  CHECK_THROWS_AS(nonuniqueness_run(1.0, 1, ncfg), invalid_parameter);
  NonuniqConfig empty = ncfg;
  empty.r_schedule.clear();
  CHECK_THROWS_AS(nonuniqueness_run(1.0, 2, empty), invalid_parameter);
  NonuniqConfig p6 = ncfg;
  p6.solver.p = 6.0;
  CHECK_THROWS_AS(nonuniqueness_run(2 * analytic::critical_mass_R(), 2, p6), unsupported_input);
}

TEST_CASE("miranda search rejects degenerate parameters") {
  SolverConfig cfg = coarse_config();
  CHECK_THROWS_AS(miranda_find(0.0, 2, 1.0, 1e-3, cfg), invalid_parameter);
  CHECK_THROWS_AS(miranda_find(10.0, 1, 1.0, 1e-3, cfg), invalid_parameter);
  CHECK_THROWS_AS(miranda_find(10.0, 2, 1.0, -1.0, cfg), invalid_parameter);
}
