#include "nlsg/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "nlsg/analytic.hpp"
#include "nlsg/errors.hpp"
#include "nlsg/function.hpp"
#include "nlsg/graph.hpp"
#include "nlsg/rearrange.hpp"
#include "nlsg/solver.hpp"

namespace nlsg {

namespace {

std::string num(double x) {
  std::ostringstream os;
  os.precision(4);
  os << x;
  return os.str();
}

CheckResult check(const std::string& name, bool pass, double worst, double tol) {
  return {name, pass, "worst " + num(worst) + " vs tol " + num(tol)};
}

GraphFunction random_function(GraphPtr g, std::mt19937_64& rng, int smooth = 6) {
  GraphFunction u(g);
  std::uniform_real_distribution<double> uni(0.05, 1.0);
  for (double& v : u.dofs()) v = uni(rng);
  for (int pass = 0; pass < smooth; ++pass) {
    GraphFunction w = u;
    for (int e = 0; e < g->n_edges(); ++e) {
      const Edge& ed = g->edge(e);
      for (int i = 1; i + 1 < ed.n; ++i) {
        int d = g->dof(e, i);
        w.dof(d) = (u.value(e, i - 1) + 2 * u.value(e, i) + u.value(e, i + 1)) / 4;
      }
    }
    u = w;
  }
  return u;
}

rearrange::PiecewiseLinear to_pl(const std::vector<double>& x, const std::vector<double>& v) {
  rearrange::PiecewiseLinear pl;
  for (size_t i = 0; i + 1 < x.size(); ++i)
    if (x[i + 1] > x[i]) pl.cells.push_back({v[i], v[i + 1], x[i + 1] - x[i]});
  return pl;
}

double pl_value_at(const rearrange::PiecewiseLinear& pl, double x) {
  double acc = 0;
  for (const auto& c : pl.cells) {
    if (x <= acc + c.h) {
      double t = (x - acc) / c.h;
      return c.va + t * (c.vb - c.va);
    }
    acc += c.h;
  }
  return pl.cells.back().vb;
}

}  // namespace

std::vector<CheckResult> verify_rearrange(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<CheckResult> out;
  const double p = 4;

  GraphPtr tad = make_tadpole(1.0, 4.0, 25);
  GraphPtr star = make_star(3, 1.5, 4.0, 25);

  double worst_equi = 0, worst_mass = 0, worst_lp = 0, worst_ps = 0, worst_sym = 0;
  for (int k = 0; k < 100; ++k) {
    GraphPtr g = (k % 2 == 0) ? tad : star;
    GraphFunction u = random_function(g, rng);
    auto pl = rearrange::cells_of(u);
    auto r = rearrange::decreasing_rearrangement(pl, p);
    auto rpl = to_pl(r.x, r.v);
    double vmax = pl.max_value(), len = pl.total_length();
    for (int j = 1; j <= 20; ++j) {
      double t = vmax * j / 21.0;
      double d = std::abs(rearrange::distribution(pl, t) - rearrange::distribution(rpl, t));
      worst_equi = std::max(worst_equi, d / len);
    }
    worst_mass = std::max(worst_mass, std::abs(r.mass - r.src_mass) / (1 + r.src_mass));
    worst_lp = std::max(worst_lp, std::abs(r.lp - r.src_lp) / (1 + r.src_lp));
    worst_ps = std::max(worst_ps, (r.kinetic - r.src_kinetic) / (1 + r.src_kinetic));

    // the loop sees every interior level at least twice, so the symmetric
    // rearrangement may not raise the kinetic term; on a segment a monotone
    // profile hits each level once and the bound genuinely fails, so only
    // the tadpole iterations exercise it
    if (g == tad) {
      auto loop = rearrange::cells_of_edge(u, 0);
      auto sym = rearrange::symmetric_rearrangement(loop, p);
      worst_sym = std::max(worst_sym, (sym.kinetic - sym.src_kinetic) / (1 + sym.src_kinetic));
      worst_mass = std::max(worst_mass, std::abs(sym.mass - sym.src_mass) / (1 + sym.src_mass));
      worst_lp = std::max(worst_lp, std::abs(sym.lp - sym.src_lp) / (1 + sym.src_lp));
    }
  }
  out.push_back(check("equimeasurability", worst_equi <= 1e-8, worst_equi, 1e-8));
  out.push_back(check("rearrangement_mass_lp", std::max(worst_mass, worst_lp) <= 1e-8,
                      std::max(worst_mass, worst_lp), 1e-8));
  out.push_back(check("polya_szego_decreasing", worst_ps <= 1e-10, worst_ps, 1e-10));
  out.push_back(check("polya_szego_symmetric_on_loop", worst_sym <= 1e-10, worst_sym, 1e-10));

  {
    auto sp = analytic::soliton_params(p);
    GraphPtr line = make_line(10, 40);
    GraphFunction bump = sample(line, [&](int e, double x) {
      double c = e == 0 ? x - 3 : -x - 3;  // centered off the junction
      return analytic::soliton_value(sp, 1.0, c);
    });
    int npre = rearrange::preimage_count(bump, {0.3 * bump.max_abs(), 0.6 * bump.max_abs()});
    out.push_back({"preimage_soliton", npre == 2, "count " + std::to_string(npre)});
  }

  double w1 = 0, w2 = 0, w3 = 0, w4 = 0;
  for (int k = 0; k < 100; ++k) {
    GraphFunction u = random_function(tad, rng);
    auto loop = rearrange::cells_of_edge(u, 0);
    double s = loop.total_length();
    std::uniform_real_distribution<double> uni(0.05, 0.95);
    double pt = uni(rng) * s;
    auto t = rearrange::loop_to_halfline(loop, pt, p);
    double tau = pl_value_at(loop, pt);
    double d = t.delta;
    w1 = std::max(w1, std::abs(t.v.front() - tau) / (1 + tau));
    w2 = std::max(w2, std::abs(t.mass - (t.loop_mass + d * d / 2)) / (1 + t.loop_mass));
    w3 = std::max(w3, (t.kinetic - (t.loop_kinetic + d * d / 2)) / (1 + t.loop_kinetic));
    w4 = std::max(w4, std::abs(t.lp - (t.loop_lp + std::pow(d, p) / p)) / (1 + t.loop_lp));
  }
  out.push_back(check("transplant_i_boundary_value", w1 <= 1e-8, w1, 1e-8));
  out.push_back(check("transplant_ii_mass", w2 <= 1e-8, w2, 1e-8));
  out.push_back(check("transplant_iii_kinetic_bound", w3 <= 1e-8, w3, 1e-8));
  out.push_back(check("transplant_iv_lp", w4 <= 1e-8, w4, 1e-8));

  {
    // constant loop: every identity in closed form
    double c = 0.7, s = 2.0;
    rearrange::PiecewiseLinear loop;
    loop.cells.push_back({c, c, s});
    auto t = rearrange::loop_to_halfline(loop, 0.4, p);
    double e1 = std::abs(t.mass - (c * c * s + c * c / 2));
    double e2 = std::abs(t.lp - (std::pow(c, p) * s + std::pow(c, p) / p));
    double e3 = t.kinetic - c * c / 2;
    double e4 = std::abs(t.v.front() - c);
    double worst = std::max({e1, e2, e3, e4});
    out.push_back(check("transplant_constant_loop", worst <= 1e-10, worst, 1e-10));
  }
  {
    // min zero on the loop kills the tail entirely
    rearrange::PiecewiseLinear loop;
    loop.cells.push_back({0.0, 1.0, 1.0});
    loop.cells.push_back({1.0, 0.0, 1.0});
    auto t = rearrange::loop_to_halfline(loop, 0.5, p);
    double worst = std::max({std::abs(t.delta), std::abs(t.mass - t.loop_mass),
                             std::abs(t.lp - t.loop_lp)});
    out.push_back(check("transplant_zero_min", worst <= 1e-12, worst, 1e-12));
  }
  return out;
}

std::vector<CheckResult> verify_analytic() {
  std::vector<CheckResult> out;
  using namespace analytic;

  {
    double e = std::abs(soliton_params(4).theta - 1.0 / 96);
    out.push_back(check("theta4_closed_form", e <= 1e-12, e, 1e-12));
  }
  {
    double worst = 0;
    for (double p : {2.6, 3.0, 4.0, 5.2}) {
      auto sp = soliton_params(p);
      worst = std::max(worst, std::abs(theta_by_quadrature(p) - sp.theta) / sp.theta);
    }
    out.push_back(check("theta_quadrature_agrees", worst <= 1e-9, worst, 1e-9));
  }
  {
    double worst = 0;
    for (double mu : {0.5, 1.0, 2.0})
      worst = std::max(worst, std::abs(soliton_multiplier(4, mu) - mu * mu / 16));
    out.push_back(check("multiplier4_closed_form", worst <= 1e-12, worst, 1e-12));
  }
  {
    double worst = 0;
    for (double p : {2.5, 3.2, 4.0, 5.5}) {
      auto sp = soliton_params(p);
      for (double mu : {0.3, 2.7}) {
        double want = std::pow(mu, 2 * sp.beta + 1) * level_R(p, 1).value;
        worst = std::max(worst, std::abs(level_R(p, mu).value - want) / std::abs(want));
      }
    }
    out.push_back(check("level_scaling", worst <= 1e-10, worst, 1e-10));
  }
  {
    // d/dmu of -theta mu^{2b+1} must equal -lambda/2, i.e. theta (2b+1) = lambda1/2
    double worst = 0;
    for (double p : {2.5, 3.0, 4.0, 5.0, 5.7}) {
      auto sp = soliton_params(p);
      worst = std::max(worst,
                       std::abs(sp.theta * (2 * sp.beta + 1) - sp.lambda1 / 2) / sp.lambda1);
    }
    out.push_back(check("derivative_identity_closed_form", worst <= 1e-6, worst, 1e-6));
  }
  {
    double worst = 0;
    for (double p : {3.0, 4.0, 5.0})
      for (double mu : {0.4, 1.0, 1.9}) {
        double a = level_Rplus(p, mu).value, b = level_R(p, 2 * mu).value / 2;
        worst = std::max(worst, std::abs(a - b) / std::abs(b));
      }
    worst = std::max(worst,
                     std::abs(critical_mass_Rplus() - critical_mass_R() / 2));
    out.push_back(check("half_line_relation", worst <= 1e-14, worst, 1e-14));
  }
  {
    double e = std::abs(critical_mass_R() - std::sqrt(3.0) * M_PI / 2);
    out.push_back(check("critical_mass_p6", e <= 1e-12, e, 1e-12));
  }
  {
    double muR = critical_mass_R();
    auto a = level_R(6, 0.9 * muR);
    auto b = level_R(6, 1.1 * muR);
    auto c = level_Rplus(6, 0.45 * muR);
    auto d = level_Rplus(6, 0.55 * muR);
    bool pass = a.finite && a.value == 0 && !b.finite && c.finite && c.value == 0 && !d.finite;
    out.push_back({"p6_level_dichotomy", pass, "zero below critical mass, unbounded above"});
  }
  {
    auto sp = soliton_params(4);
    GraphPtr line = make_line(30, 50);
    GraphFunction phi =
        sample(line, [&](int e, double x) { return soliton_value(sp, 1.0, e == 0 ? x : -x); });
    double best = gn_ratio(phi, 4);
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> amp(0.3, 2.0), wid(0.3, 3.0), off(-5.0, 5.0);
    double other = 0;
    for (int k = 0; k < 100; ++k) {
      double a = amp(rng), w = wid(rng), c = off(rng);
      GraphFunction v = sample(line, [&](int e, double x) {
        double y = (e == 0 ? x : -x) - c;
        return a * std::exp(-y * y / (w * w));
      });
      other = std::max(other, gn_ratio(v, 4));
    }
    double margin = other - best;
    out.push_back(check("gn_sharpness", margin <= 1e-6, margin, 1e-6));
  }
  {
    double e1 = std::abs(ncontr_bound(4, 1, 2) + 1.0 / 96);
    double e2 = std::abs(ncontr_bound(4, 1, 4) + 1.0 / 384);
    double e3 = std::abs(ncontr_bound(6, 0.5 * critical_mass_R(), 3));
    double worst = std::max({e1, e2, e3});
    out.push_back(check("ncontr_values", worst <= 1e-12, worst, 1e-12));
  }
  {
    // two half-lines only: the candidate is exactly the broken soliton and
    // its energy sits on the bound
    GraphPtr g = parse_graph_json(
        R"({"vertices":[0],"edges":[{"kind":"halfline","ends":[0]},{"kind":"halfline","ends":[0]}]})",
        40, 100);
    auto mc = minneg_candidate(g, 4, 1.0);
    double E = energy(mc.v, 4);
    double e1 = std::abs(E + mc.delta);
    double e2 = std::abs(mc.delta - 1.0 / 96);
    double worst = std::max(e1, e2);
    out.push_back(check("minneg_sharp_at_L0", worst <= 1e-6, worst, 1e-6));
  }
  {
    GraphPtr g = make_star(2, 0.05, 40, 60);
    auto mc = minneg_candidate(g, 4, 1.0);
    double E = energy(mc.v, 4);
    out.push_back(check("minneg_upper_bound", E <= -mc.delta + 1e-6, E + mc.delta, 1e-6));
  }
  return out;
}

std::vector<CheckResult> verify_solver(std::uint64_t seed) {
  std::vector<CheckResult> out;
  std::mt19937_64 rng(seed);
  const double p = 4;

  {
    GraphPtr g = make_tadpole(1.0, 5.0, 30);
    double worst = 0;
    for (int k = 0; k < 5; ++k) {
      GraphFunction u = random_function(g, rng);
      project_mass(u, 2.0);
      GraphFunction v = random_function(g, rng, 2);
      GraphFunction gr = gradient(u, p);
      double lin = inner_mass(gr, v);
      double h = 1e-5;
      GraphFunction up = u, um = u;
      for (int d = 0; d < g->n_dofs(); ++d) {
        up.dof(d) += h * v.dof(d);
        um.dof(d) -= h * v.dof(d);
      }
      double fd = (energy(up, p) - energy(um, p)) / (2 * h);
      worst = std::max(worst, std::abs(fd - lin) / (1 + std::abs(lin)));
    }
    out.push_back(check("directional_derivative", worst <= 1e-6, worst, 1e-6));
  }
  {
    GraphPtr g = parse_graph_json(
        R"({"vertices":[0,1],"edges":[{"kind":"bounded","ends":[0,1],"length":3}]})", 10, 50);
    double c = 0.7;
    GraphFunction u(g);
    for (double& w : u.dofs()) w = c;
    GraphFunction gr = gradient(u, p);
    double worst = 0;
    for (double w : gr.dofs()) worst = std::max(worst, std::abs(w + c * c * c));
    out.push_back(check("constant_gradient", worst <= 1e-12, worst, 1e-12));
  }
  {
    auto sp = analytic::soliton_params(p);
    // wide window: the clamped far ends put a spike of size u(L)/h^2 into the
    // mass-represented gradient, so u(L) must be at rounding scale
    GraphPtr line = make_line(80, 100);
    GraphFunction phi = sample(
        line, [&](int e, double x) { return analytic::soliton_value(sp, 1.0, e == 0 ? x : -x); });
    double lam = analytic::soliton_multiplier(p, 1.0);
    GraphFunction r = gradient(phi, p);
    for (int d = 0; d < line->n_dofs(); ++d) r.dof(d) += lam * phi.dof(d);
    double rn = std::sqrt(inner_mass(r, r));
    out.push_back(check("soliton_stationarity", rn <= 1e-3, rn, 1e-3));
  }
  {
    GraphPtr g = make_star(3, 1.0, 6.0, 25);
    GraphFunction u = random_function(g, rng);
    project_mass(u, 1.7);
    double e = std::abs(mass(u) - 1.7) / 1.7;
    out.push_back(check("mass_projection", e <= 1e-12, e, 1e-12));
  }
  GroundStateResult line_res;
  {
    GraphPtr line = make_line(15, 40);
    SolverConfig cfg;
    cfg.p = p;
    cfg.points_per_unit = 40;
    cfg.adapt_truncation = false;
    line_res = minimize_single(line, cfg, 1.0, ConstraintSpec::mass_only(),
                               make_start(line, cfg, 1.0, ConstraintSpec::mass_only(), 1));
    double e = std::abs(line_res.energy + 1.0 / 96);
    bool pass = line_res.converged && e <= 1e-5;
    out.push_back(check("line_ground_state_level", pass, e, 1e-5));
    double lam_err = std::abs(line_res.multiplier - 1.0 / 16);
    out.push_back(check("line_ground_state_multiplier", lam_err <= 1e-4, lam_err, 1e-4));
  }
  {
    const GraphFunction& u = line_res.u;
    double lam = (lp_norm_p(u, p) - dirichlet(u)) / mass(u);
    double e = std::abs(lam - line_res.multiplier) / (1 + std::abs(lam));
    out.push_back(check("lambda_consistency", e <= 1e-9, e, 1e-9));
  }
  {
    GraphPtr g = make_tadpole(1.0, 8.0, 30);
    SolverConfig cfg;
    cfg.p = p;
    cfg.points_per_unit = 30;
    cfg.adapt_truncation = false;
    std::vector<double> trace;
    cfg.energy_trace = &trace;
    auto r = minimize_single(g, cfg, 1.0, ConstraintSpec::mass_only(),
                             make_start(g, cfg, 1.0, ConstraintSpec::mass_only(), 1));
    double worst = 0;
    for (size_t i = 1; i < trace.size(); ++i)
      worst = std::max(worst, trace[i] - trace[i - 1]);
    bool pass = r.converged && !trace.empty() && worst <= 1e-12 * (1 + std::abs(trace.front()));
    out.push_back(check("descent_monotone", pass, worst, 1e-12));
  }
  return out;
}

std::vector<CheckResult> verify_suite(const std::string& name) {
  if (name == "rearrange") return verify_rearrange();
  if (name == "analytic") return verify_analytic();
  if (name == "solver") return verify_solver();
  if (name == "all") {
    auto a = verify_rearrange();
    auto b = verify_analytic();
    auto c = verify_solver();
    a.insert(a.end(), b.begin(), b.end());
    a.insert(a.end(), c.begin(), c.end());
    return a;
  }
  throw invalid_parameter("unknown verify suite '" + name + "' (rearrange, analytic, solver, all)");
}

}  // namespace nlsg
