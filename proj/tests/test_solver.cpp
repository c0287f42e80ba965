#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "nlsg/analytic.hpp"
#include "nlsg/errors.hpp"
#include "nlsg/function.hpp"
#include "nlsg/graph.hpp"
#include "nlsg/solver.hpp"

using namespace nlsg;

namespace {

GraphFunction smooth_noise(GraphPtr g, std::mt19937_64& rng) {
  GraphFunction u(g);
  std::uniform_real_distribution<double> uni(0.05, 1.0);
  for (double& v : u.dofs()) v = uni(rng);
  for (int pass = 0; pass < 6; ++pass) {
    GraphFunction w = u;
    for (int e = 0; e < g->n_edges(); ++e)
      for (int i = 1; i + 1 < g->edge(e).n; ++i)
        w.dof(g->dof(e, i)) =
            (u.value(e, i - 1) + 2 * u.value(e, i) + u.value(e, i + 1)) / 4;
    u = w;
  }
  return u;
}

GraphFunction line_soliton(GraphPtr line, double p, double mu) {
  auto sp = analytic::soliton_params(p);
  return sample(line,
                [&](int e, double x) { return analytic::soliton_value(sp, mu, e == 0 ? x : -x); });
}

}  // namespace

TEST_CASE("gradient matches finite differences of the energy") {
  GraphPtr g = make_tadpole(1.0, 5.0, 30);
  std::mt19937_64 rng(21);
  for (int k = 0; k < 5; ++k) {
    GraphFunction u = smooth_noise(g, rng);
    project_mass(u, 2.0);
    GraphFunction v = smooth_noise(g, rng);
    GraphFunction gr = gradient(u, 4.0);
    double lin = inner_mass(gr, v);
    double h = 1e-5;
    GraphFunction up = u, um = u;
    for (int d = 0; d < g->n_dofs(); ++d) {
      up.dof(d) += h * v.dof(d);
      um.dof(d) -= h * v.dof(d);
    }
    double fd = (energy(up, 4.0) - energy(um, 4.0)) / (2 * h);
    CHECK(fd == doctest::Approx(lin).epsilon(1e-6));
  }
}

TEST_CASE("gradient of a constant is the pointwise nonlinearity") {
  GraphPtr g = parse_graph_json(
      R"({"vertices":[0,1],"edges":[{"kind":"bounded","ends":[0,1],"length":3}]})", 10, 50);
  double c = 0.7;
  GraphFunction u(g);
  for (double& v : u.dofs()) v = c;
  GraphFunction gr = gradient(u, 4.0);
  for (double v : gr.dofs()) CHECK(v == doctest::Approx(-c * c * c).epsilon(1e-12));
}

TEST_CASE("sampled soliton is numerically stationary") {
  // wide window: the clamped far ends put a spike of size u(L)/h^2 into the
  // mass-represented gradient, so u(L) must be at rounding scale
  GraphPtr line = make_line(80.0, 100);
  GraphFunction phi = line_soliton(line, 4.0, 1.0);
  double lam = analytic::soliton_multiplier(4.0, 1.0);
  GraphFunction r = gradient(phi, 4.0);
  for (int d = 0; d < line->n_dofs(); ++d) r.dof(d) += lam * phi.dof(d);
  CHECK(std::sqrt(inner_mass(r, r)) < 1e-3);
}

TEST_CASE("mass projection is exact and preserves direction") {
  GraphPtr g = make_star(3, 1.0, 6.0, 25);
  std::mt19937_64 rng(22);
  GraphFunction u = smooth_noise(g, rng);
  GraphFunction v = u;
  project_mass(v, 1.7);
  CHECK(mass(v) == doctest::Approx(1.7).epsilon(1e-12));
  double ratio = v.dof(0) / u.dof(0);
  for (int d = 0; d < g->n_dofs(); ++d)
    CHECK(v.dof(d) == doctest::Approx(ratio * u.dof(d)).epsilon(1e-12));
  GraphFunction zero(g);
  CHECK_THROWS_AS(project_mass(zero, 1.0), invalid_parameter);
}

TEST_CASE("line minimization recovers the soliton") {
  // window 40: the truncated minimizer differs from the soliton at the
  // e^{-sqrt(lambda) L} scale, which must sit below the pointwise bars
  GraphPtr line = make_line(40.0, 40);
  SolverConfig cfg;
  cfg.p = 4.0;
  cfg.points_per_unit = 40;
  cfg.adapt_truncation = false;
  // start 0 is the centered broken-soliton candidate, so the minimizer stays
  // centered at the junction and can be compared pointwise
  auto r = minimize_single(line, cfg, 1.0, ConstraintSpec::mass_only(),
                           make_start(line, cfg, 1.0, ConstraintSpec::mass_only(), 0));
  REQUIRE(r.converged);
  CHECK(std::abs(r.energy + 1.0 / 96) < 1e-5);
  CHECK(r.multiplier == doctest::Approx(1.0 / 16).epsilon(2e-3));
  CHECK(r.grad_norm <= cfg.tol_g);

  // reported multiplier is the variational one of the final iterate
  double lam = (lp_norm_p(r.u, 4.0) - dirichlet(r.u)) / mass(r.u);
  CHECK(std::abs(lam - r.multiplier) < 1e-9);

  // profile tracks the sampled soliton
  GraphFunction phi = line_soliton(line, 4.0, 1.0);
  double d2 = 0;
  for (int d = 0; d < line->n_dofs(); ++d)
    d2 += line->weight(d) * std::pow(r.u.dof(d) - phi.dof(d), 2);
  CHECK(std::sqrt(d2) < 2e-3);
  CHECK(std::abs(r.u.max_abs() - std::sqrt(2.0) / 4) < 1e-4);
}

TEST_CASE("half-line minimization meets the half-soliton level") {
  GraphPtr hl = make_halfline(40.0, 50);
  SolverConfig cfg;
  cfg.p = 4.0;
  cfg.points_per_unit = 50;
  cfg.adapt_truncation = false;
  auto r = minimize(hl, cfg, 1.0, ConstraintSpec::mass_only());
  REQUIRE(r.converged);
  CHECK(std::abs(r.energy + 1.0 / 24) < 1e-5);
  CHECK(r.multiplier == doctest::Approx(0.25).epsilon(1e-3));
  // decreasing from the vertex
  const Edge& ed = hl->edge(0);
  for (int i = 1; i + 1 < ed.n; ++i) CHECK(r.u.value(0, i) <= r.u.value(0, i - 1) + 1e-9);
}

TEST_CASE("tadpole ground state beats the line level and passes shape checks") {
  GraphPtr g = make_tadpole(1.0, 60.0, 40);
  SolverConfig cfg;
  cfg.p = 4.0;
  cfg.points_per_unit = 40;
  cfg.multistart = 3;
  auto r = minimize(g, cfg, 1.0, ConstraintSpec::mass_only());
  REQUIRE(r.converged);
  CHECK(r.energy < -1.0 / 96 - 1e-4);
  auto rep = shape_check(r, 4.0, 1.0);
  for (const auto& c : rep.checks) {
    INFO(c.name, " magnitude ", c.magnitude, " tol ", c.tol);
    CHECK(c.pass);
  }
  CHECK(rep.all_pass());

  // diagnostics at unit-test resolution; the acceptance suite pins the
  // production tolerances at full density
  CHECK(r.diag.kirchhoff_residual < 1e-4);
  CHECK(r.diag.el_residual < 1e-3);
  CHECK(r.diag.halfline_mech_max < 2e-4);
  for (const auto& pe : r.diag.per_edge) CHECK(pe.mech_var < 2e-4);
}

TEST_CASE("energy trace is monotone under the accepted steps") {
  GraphPtr g = make_tadpole(1.0, 8.0, 25);
  SolverConfig cfg;
  cfg.p = 4.0;
  cfg.points_per_unit = 25;
  cfg.adapt_truncation = false;
  std::vector<double> trace;
  cfg.energy_trace = &trace;
  auto r = minimize_single(g, cfg, 1.0, ConstraintSpec::mass_only(),
                           make_start(g, cfg, 1.0, ConstraintSpec::mass_only(), 1));
  REQUIRE(r.converged);
  REQUIRE(trace.size() > 3);
  for (size_t i = 1; i < trace.size(); ++i)
    CHECK(trace[i] <= trace[i - 1] + 1e-12 * (1 + std::abs(trace[i - 1])));
}

TEST_CASE("warm restart from a converged state stays converged") {
  GraphPtr g = make_tadpole(1.0, 8.0, 25);
  SolverConfig cfg;
  cfg.p = 4.0;
  cfg.points_per_unit = 25;
  cfg.adapt_truncation = false;
  auto r1 = minimize_single(g, cfg, 1.0, ConstraintSpec::mass_only(),
                            make_start(g, cfg, 1.0, ConstraintSpec::mass_only(), 1));
  REQUIRE(r1.converged);
  auto r2 = minimize_single(g, cfg, 1.0, ConstraintSpec::mass_only(), r1.u);
  CHECK(r2.converged);
  CHECK(r2.iterations < 60);
  CHECK(r2.energy == doctest::Approx(r1.energy).epsilon(1e-10));
}

TEST_CASE("multistart is deterministic for a fixed seed") {
  GraphPtr g = make_star(2, 1.0, 8.0, 20);
  SolverConfig cfg;
  cfg.p = 4.0;
  cfg.points_per_unit = 20;
  GraphFunction a = make_start(g, cfg, 1.0, ConstraintSpec::mass_only(), 5);
  GraphFunction b = make_start(g, cfg, 1.0, ConstraintSpec::mass_only(), 5);
  GraphFunction c = make_start(g, cfg, 1.0, ConstraintSpec::mass_only(), 6);
  double dab = 0, dac = 0;
  for (int d = 0; d < g->n_dofs(); ++d) {
    dab = std::max(dab, std::abs(a.dof(d) - b.dof(d)));
    dac = std::max(dac, std::abs(a.dof(d) - c.dof(d)));
  }
  CHECK(dab == 0.0);
  CHECK(dac > 1e-6);
  CHECK(mass(a) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("doubly-constrained solve pins the sup to the designated edge") {
  // short terminal vs long loop keeps the two branch energies far apart
  GraphPtr g = make_gamma(6.0, 4.0, 0.3, 2, 25.0, 30);
  SolverConfig cfg;
  cfg.p = 4.0;
  cfg.points_per_unit = 30;
  cfg.multistart = 3;
  cfg.adapt_truncation = false;

  auto on_term = minimize(g, cfg, 1.0, ConstraintSpec::max_on(0));
  REQUIRE(on_term.converged);
  CHECK(on_term.feasibility_gap <= cfg.feas_tol * on_term.u.max_abs() + 1e-14);
  double sup_term = 0, sup_all = on_term.u.max_abs();
  for (int i = 0; i < g->edge(0).n; ++i)
    sup_term = std::max(sup_term, std::abs(on_term.u.value(0, i)));
  CHECK(sup_term >= sup_all * (1 - 1e-6));

  auto on_loop = minimize(g, cfg, 1.0, ConstraintSpec::max_on(1));
  REQUIRE(on_loop.converged);
  double sup_loop = 0;
  for (int i = 0; i < g->edge(1).n; ++i)
    sup_loop = std::max(sup_loop, std::abs(on_loop.u.value(1, i)));
  CHECK(sup_loop >= on_loop.u.max_abs() * (1 - 1e-6));

  // the two constrained problems land on different branches
  CHECK(std::abs(on_term.energy - on_loop.energy) > 1e-6);
}

TEST_CASE("adaptive truncation widens short windows") {
  // the tadpole multiplier at mass 2 is about 0.53, so the tail clears the
  // 1e-8 boundary check near 24 units; starting from 6 forces two doublings
  GraphPtr g = make_tadpole(1.0, 6.0, 30);
  SolverConfig cfg;
  cfg.p = 4.0;
  cfg.points_per_unit = 30;
  auto r = minimize_single(g, cfg, 2.0, ConstraintSpec::mass_only(),
                           make_start(g, cfg, 2.0, ConstraintSpec::mass_only(), 1));
  CHECK(r.doublings == 2);
  CHECK(r.window_ok);
  CHECK(r.u.graph().edge(1).length == doctest::Approx(24.0));
}

TEST_CASE("invalid inputs are rejected up front") {
  GraphPtr g = make_tadpole(1.0, 10.0, 20);
  SolverConfig cfg;
  cfg.p = 4.0;
  cfg.points_per_unit = 20;
  CHECK_THROWS_AS(minimize(g, cfg, -1.0, ConstraintSpec::mass_only()), invalid_parameter);
  CHECK_THROWS_AS(minimize(g, cfg, 1.0, ConstraintSpec::max_on(7)), invalid_parameter);
  SolverConfig bad = cfg;
  bad.p = 2.0;
  CHECK_THROWS_AS(minimize(g, bad, 1.0, ConstraintSpec::mass_only()), invalid_parameter);
  SolverConfig p6 = cfg;
  p6.p = 6.0;
  double muR = analytic::critical_mass_R();
  CHECK_THROWS_AS(minimize(g, p6, 1.1 * muR, ConstraintSpec::mass_only()), unsupported_input);
}

TEST_CASE("p = 6 subcritical tadpole runs and stays negative") {
  GraphPtr g = make_tadpole(1.0, 60.0, 20);
  SolverConfig cfg;
  cfg.p = 6.0;
  cfg.points_per_unit = 20;
  cfg.adapt_truncation = false;
  cfg.multistart = 2;
  double mu = 0.8 * analytic::critical_mass_R();
  auto r = minimize(g, cfg, mu, ConstraintSpec::mass_only());
  REQUIRE(r.converged);
  CHECK(r.energy < 0.0);
}
