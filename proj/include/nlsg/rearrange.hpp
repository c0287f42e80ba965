#pragma once

#include <vector>

#include "nlsg/function.hpp"

namespace nlsg::rearrange {

// Rearrangements are computed exactly at the level of the piecewise-linear
// interpolant: the distribution function of a piecewise-linear u is piecewise
// affine in the level t with breakpoints at node values, so its generalized
// inverse (the decreasing rearrangement) is again piecewise linear with
// breakpoints we can write down.  All audit integrals below use closed-form
// integration of powers of linear segments, which is what makes the
// equimeasurability identities hold to rounding rather than to quadrature
// error.

struct PiecewiseLinear {
  struct Cell {
    double va = 0, vb = 0, h = 0;
  };
  std::vector<Cell> cells;

  double total_length() const;
  double integral_pow(double q) const;  // int |u|^q, exact per segment
  double mass() const { return integral_pow(2); }
  double dirichlet() const;             // sum (vb-va)^2/h
  double max_value() const;
  double min_value() const;
};

PiecewiseLinear cells_of(const GraphFunction& u);
PiecewiseLinear cells_of_edge(const GraphFunction& u, int e);

// rho(t) = |{u > t}| (strict super-level measure)
double distribution(const PiecewiseLinear& u, double t);

// Exact rearrangement as a breakpoint list (x ascending, v the values).
// Decreasing: domain [0, |G|], nonincreasing.  Symmetric: domain
// [-|G|/2, |G|/2], even, nonincreasing in |x|.
struct Rearranged {
  std::vector<double> x, v;
  double mass = 0, lp = 0, kinetic = 0;              // of the rearrangement
  double src_mass = 0, src_lp = 0, src_kinetic = 0;  // of the source
  double p = 0;
};

Rearranged decreasing_rearrangement(const PiecewiseLinear& u, double p);
Rearranged symmetric_rearrangement(const PiecewiseLinear& u, double p);

// Minimum over the supplied levels of the number of transversal crossings of
// {u = tau}.  Levels within 1e-12 * scale of a node value are skipped (they
// would count plateau touches ambiguously); at least one level must survive.
int preimage_count(const GraphFunction& u, const std::vector<double>& levels);

// Loop-to-half-line transplant: given u >= 0 on a self-loop of length s and a
// marked point with value tau = u(p_point), build psi on [0, infinity):
//   [0, l]  symmetric rearrangement of u on {u >= tau}, ends at tau,
//   [l, s]  decreasing rearrangement of the rest, tau down to delta = min u,
//   (s, s+tail] the tail delta e^{s-x}, truncated at tail length 20.
// Then psi(0) = tau, int psi^2 = int_loop u^2 + delta^2/2 (tail exact),
// int psi^p = int_loop u^p + delta^p/p, and
// int psi'^2 <= int_loop u'^2 + delta^2/2.
struct Transplant {
  std::vector<double> x, v;  // piecewise-linear part on [0, s]
  double delta = 0, s = 0, tail_len = 20.0;
  double mass = 0, lp = 0, kinetic = 0;                 // including the tail
  double loop_mass = 0, loop_lp = 0, loop_kinetic = 0;  // source integrals
  double tau = 0, ell = 0;
  double p = 0;
};

Transplant loop_to_halfline(const PiecewiseLinear& loop, double p_point, double p);

}  // namespace nlsg::rearrange
