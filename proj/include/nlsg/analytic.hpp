#pragma once

#include "nlsg/function.hpp"
#include "nlsg/graph.hpp"

namespace nlsg::analytic {

// Closed-form data of the line solitons for 2 < p < 6.
//
// With gamma = 2/(p-2), the profile a * sech(b x)^gamma solves
// u'' + u^{p-1} = lambda u when lambda = gamma^2 b^2 and
// a^{p-2} = (gamma+1) lambda / gamma.  Mass scales like lambda^{gamma - 1/2},
// which fixes the unit-mass member; general masses follow from
// phi_mu(x) = mu^alpha phi_1(mu^beta x) with alpha = 2/(6-p),
// beta = (p-2)/(6-p).
struct SolitonParams {
  double p = 0, alpha = 0, beta = 0, gamma = 0;
  double lambda1 = 0;  // multiplier of the unit-mass soliton
  double amp1 = 0;     // phi_1(0)
  double width1 = 0;   // b at unit mass: phi_1(x) = amp1 * sech(width1 x)^gamma
  double theta = 0;    // -E(phi_1) > 0, so inf over the line is -theta mu^{2beta+1}
};

SolitonParams soliton_params(double p);  // pre: 2 < p < 6

double soliton_value(const SolitonParams& sp, double mu, double x);

// Multiplier of the mass-mu soliton: lambda1 * mu^{2 beta}.
double soliton_multiplier(double p, double mu);

// Ground-state level; -infinity is a tagged sentinel, never an IEEE infinity.
struct Level {
  bool finite = true;
  double value = 0.0;
};

Level level_R(double p, double mu);       // inf over the line
Level level_Rplus(double p, double mu);   // inf over the half-line

double critical_mass_R();      // sqrt(3) pi / 2, the p = 6 threshold on the line
double critical_mass_Rplus();  // half of it

// theta recomputed by direct quadrature of the profile (independent of the
// Gamma-function route used in tests).
double theta_by_quadrature(double p);

// ||u||_p^p / (||u||_2^{p/2+1} ||u'||_2^{p/2-1}); errors on zero derivative.
double gn_ratio(const GraphFunction& u, double p);

// Energy lower bound for states with at least N >= 2 preimages a.e.:
// -theta_p (2/N)^{2 beta} mu^{2 beta + 1}.  For p = 6 and mu <= critical the
// bound degenerates to 0.
double ncontr_bound(double p, double mu, int N);

// Explicit competitor: half-soliton of mass m on each of the N half-lines and
// the matching constant on the compact core of total length L, where m solves
// c^2 m^{2 alpha} L + N m = mu and c is the half-soliton maximum constant
// (the mass-m half-soliton has maximum c m^alpha).  Guarantees
// E(v) <= -delta with
// delta = N theta_p 2^{2 beta} mu^{2 beta + 1} / (c^2 mu^{2 alpha - 1} L + N)^{2 beta + 1},
// sharp at L = 0 where delta equals -ncontr_bound.
struct MinnegCandidate {
  GraphFunction v;
  double delta = 0;
  double m = 0;
  double c = 0;
};

MinnegCandidate minneg_candidate(GraphPtr g, double p, double mu);

}  // namespace nlsg::analytic
