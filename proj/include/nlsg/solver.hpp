#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nlsg/function.hpp"
#include "nlsg/graph.hpp"

namespace nlsg {

struct SolverConfig {
  double p = 4.0;
  double points_per_unit = 100.0;
  double truncation = 0.0;   // 0 -> max(20/sqrt(lambda_est), 20), lambda_est from the soliton
  double tol_g = 1e-8;       // tangential gradient, mass-weighted L2
  double tol_drift = 1e-9;   // multiplier drift over drift_window accepted steps
  int drift_window = 50;
  int max_iters = 60000;
  int multistart = 4;
  std::uint64_t seed = 1234567;
  // quadratic penalty continuation for the max-location constraint
  double kappa0 = 1.0;
  double kappa_factor = 10.0;
  int kappa_stages = 4;
  int kappa_extra_stages = 4;  // extra stages if the gap is still infeasible
  double feas_tol = 1e-8;      // relative to ||u||_inf
  // half-line window management
  bool adapt_truncation = true;
  int max_doublings = 2;
  double window_tol = 1e-8;  // boundary value threshold relative to ||u||_inf
  double blowup_threshold = 1e6;  // abort when ||u'||_2 exceeds this (p = 6)
  // test hook: penalized energy of every accepted iterate (single solve only)
  std::vector<double>* energy_trace = nullptr;
};

struct ConstraintSpec {
  enum class Kind { MassOnly, MassAndMaxOn };
  Kind kind = Kind::MassOnly;
  int edge = -1;
  static ConstraintSpec mass_only() { return {}; }
  static ConstraintSpec max_on(int e) { return {Kind::MassAndMaxOn, e}; }
};

struct EdgeDiagnostics {
  double mech_mean = 0;  // mean over the edge of (u')^2/2 + u^p/p - lambda u^2/2
  double mech_var = 0;   // max - min of the same quantity along the edge
};

struct Diagnostics {
  double kirchhoff_residual = 0;  // max over vertices of |sum of outgoing derivatives|
  double el_residual = 0;         // max interior residual of u'' + u^{p-1} - lambda u
  std::vector<EdgeDiagnostics> per_edge;
  double halfline_mech_max = 0;   // max |mech_mean| over half-line edges
};

struct GroundStateResult {
  GraphFunction u;
  double energy = 0;
  double multiplier = 0;
  double grad_norm = 0;
  double feasibility_gap = 0;  // clamped: max(0, sup off the edge - sup on it)
  Diagnostics diag;
  int iterations = 0;
  int doublings = 0;
  bool converged = false;
  bool window_ok = true;  // half-line boundary values below window_tol * ||u||_inf
  int start_index = -1;
};

// Discrete energy: half the Dirichlet form of the interpolant minus the
// trapezoid p-term.  gradient() is its exact differential in the
// mass-weighted (trapezoid) inner product, so descent, the multiplier and the
// directional-derivative identity are all statements about one functional.
double energy(const GraphFunction& u, double p);
GraphFunction gradient(const GraphFunction& u, double p);
double lagrange_multiplier(const GraphFunction& u, double p);
void project_mass(GraphFunction& u, double mu);  // errors on u == 0

double default_truncation(double p, double mu);

// Initializer menu: 0 = explicit half-soliton competitor, 1..E = soliton bump
// on one edge (the designated edge first for constrained runs; half-line
// bumps sit mid-window so escaping states have a representative), rest =
// seeded smoothed noise.
GraphFunction make_start(GraphPtr g, const SolverConfig& cfg, double mu,
                         ConstraintSpec cons, int k);

GroundStateResult minimize_single(GraphPtr g, const SolverConfig& cfg, double mu,
                                  ConstraintSpec cons, GraphFunction init);

// Multistart driver; picks the lowest converged energy (ties to the lowest
// start index).  If nothing converged the best run is returned flagged.
GroundStateResult minimize(GraphPtr g, const SolverConfig& cfg, double mu,
                           ConstraintSpec cons = ConstraintSpec::mass_only());

Diagnostics diagnostics(const GraphFunction& u, double p, double lambda);

struct ShapeCheck {
  std::string name;
  bool pass = true;
  double magnitude = 0;
  double tol = 0;
};
struct ShapeReport {
  std::vector<ShapeCheck> checks;
  bool all_pass() const;
};

// Qualitative profile checks per graph family: monotone terminal edge and
// identical decreasing half-line traces on stars, loop symmetry and
// monotonicity on tadpoles, max located on loop/terminal edges on the
// loop-and-terminal family when the energy is strictly below the line level.
ShapeReport shape_check(const GroundStateResult& r, double p, double mu);

}  // namespace nlsg
