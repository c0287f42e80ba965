#include "nlsg/analytic.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "nlsg/errors.hpp"

namespace nlsg::analytic {

namespace {

constexpr double kPi = 3.14159265358979323846;

// int_R sech(y)^q dy = sqrt(pi) Gamma(q/2) / Gamma((q+1)/2)
double sech_integral(double q) {
  return std::sqrt(kPi) * std::exp(std::lgamma(q / 2) - std::lgamma((q + 1) / 2));
}

SolitonParams compute_params(double p) {
  SolitonParams sp;
  sp.p = p;
  sp.alpha = 2 / (6 - p);
  sp.beta = (p - 2) / (6 - p);
  sp.gamma = 2 / (p - 2);
  const double g = sp.gamma;
  // mass of the lambda-family member: g ((g+1)/g)^g I_{2g} lambda^{g-1/2}
  double mass_coeff = g * std::pow((g + 1) / g, g) * sech_integral(2 * g);
  sp.lambda1 = std::pow(mass_coeff, -1.0 / (g - 0.5));
  sp.width1 = std::sqrt(sp.lambda1) / g;
  sp.amp1 = std::pow((g + 1) * sp.lambda1 / g, 1.0 / (p - 2));
  sp.theta = theta_by_quadrature(p);
  return sp;
}

const SolitonParams& cached_params(double p) {
  if (!(p > 2 && p < 6)) throw invalid_parameter("soliton data requires 2 < p < 6");
  static std::map<double, SolitonParams> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(p);
  if (it == cache.end()) it = cache.emplace(p, compute_params(p)).first;
  return it->second;
}

}  // namespace

SolitonParams soliton_params(double p) { return cached_params(p); }

double soliton_value(const SolitonParams& sp, double mu, double x) {
  double y = std::pow(mu, sp.beta) * x;
  // sech^gamma with a guard against overflow of cosh for large windows
  double t = std::abs(sp.width1 * y);
  double sech = t > 350 ? 0.0 : 1.0 / std::cosh(sp.width1 * y);
  return std::pow(mu, sp.alpha) * sp.amp1 * std::pow(sech, sp.gamma);
}

double soliton_multiplier(double p, double mu) {
  if (!(mu > 0)) throw invalid_parameter("soliton_multiplier: mass must be positive");
  const SolitonParams& sp = cached_params(p);
  return sp.lambda1 * std::pow(mu, 2 * sp.beta);
}

double theta_by_quadrature(double p) {
  if (!(p > 2 && p < 6)) throw invalid_parameter("theta requires 2 < p < 6");
  double gamma = 2 / (p - 2);
  double mass_coeff = gamma * std::pow((gamma + 1) / gamma, gamma) * sech_integral(2 * gamma);
  double lambda1 = std::pow(mass_coeff, -1.0 / (gamma - 0.5));
  double b = std::sqrt(lambda1) / gamma;
  double a = std::pow((gamma + 1) * lambda1 / gamma, 1.0 / (p - 2));

  // composite Simpson on [0, X], doubled; decay rate of phi is sqrt(lambda1)
  double X = 60 / std::sqrt(lambda1);
  const int n = 1 << 19;  // intervals, even
  double h = X / n;
  auto f = [&](double x) {
    double c = std::cosh(b * x);
    double sechg = std::pow(1.0 / c, gamma);
    double phi = a * sechg;
    double dphi = -a * gamma * b * sechg * std::tanh(b * x);
    return 0.5 * dphi * dphi - std::pow(phi, p) / p;
  };
  double s = f(0) + f(X);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(i * h);
  double E = 2 * (s * h / 3);  // both half-lines
  return -E;
}

Level level_R(double p, double mu) {
  if (!(mu > 0)) throw invalid_parameter("level_R: mass must be positive");
  if (p == 6.0) {
    if (mu <= critical_mass_R()) return {true, 0.0};
    return {false, 0.0};
  }
  const SolitonParams& sp = cached_params(p);
  return {true, -sp.theta * std::pow(mu, 2 * sp.beta + 1)};
}

Level level_Rplus(double p, double mu) {
  if (!(mu > 0)) throw invalid_parameter("level_Rplus: mass must be positive");
  if (p == 6.0) {
    if (mu <= critical_mass_Rplus()) return {true, 0.0};
    return {false, 0.0};
  }
  // half of the line level of the doubled mass (even reflection)
  Level l = level_R(p, 2 * mu);
  return {true, l.value / 2};
}

double critical_mass_R() { return std::sqrt(3.0) * kPi / 2; }
double critical_mass_Rplus() { return critical_mass_R() / 2; }

double gn_ratio(const GraphFunction& u, double p) {
  double m = mass(u);
  double k = kinetic(u);
  if (!(m > 0) || !(k > 0)) throw invalid_parameter("gn_ratio: needs nonzero mass and derivative");
  double num = lp_norm_p(u, p);
  return num / (std::pow(std::sqrt(m), p / 2 + 1) * std::pow(std::sqrt(k), p / 2 - 1));
}

double ncontr_bound(double p, double mu, int N) {
  if (N < 2) throw invalid_parameter("ncontr_bound: N >= 2");
  if (!(mu > 0)) throw invalid_parameter("ncontr_bound: mass must be positive");
  if (p == 6.0) {
    if (mu <= critical_mass_R()) return 0.0;
    throw unsupported_input("ncontr_bound: p = 6 requires mass at most critical");
  }
  const SolitonParams& sp = cached_params(p);
  return -sp.theta * std::pow(2.0 / N, 2 * sp.beta) * std::pow(mu, 2 * sp.beta + 1);
}

MinnegCandidate minneg_candidate(GraphPtr g, double p, double mu) {
  if (!(mu > 0)) throw invalid_parameter("minneg_candidate: mass must be positive");
  const SolitonParams& sp = cached_params(p);
  GraphClass gc = g->classify();
  int N = gc.n_halflines;
  if (N < 1) throw invalid_parameter("minneg_candidate: graph needs a half-line");
  double L = gc.total_compact_length;

  // the mass-m half-soliton is the doubled-mass soliton restricted to [0,inf),
  // so its maximum is c m^alpha with c = 2^alpha amp1
  double c = std::pow(2.0, sp.alpha) * sp.amp1;

  // solve c^2 m^{2 alpha} L + N m = mu for m in (0, mu/N]; lhs is increasing
  double lo = 0, hi = mu / N;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    double f = c * c * std::pow(mid, 2 * sp.alpha) * L + N * mid - mu;
    (f < 0 ? lo : hi) = mid;
  }
  double m = 0.5 * (lo + hi);

  double core = c * std::pow(m, sp.alpha);
  MinnegCandidate out;
  out.m = m;
  out.c = c;
  out.delta = N * sp.theta * std::pow(2.0, 2 * sp.beta) * std::pow(mu, 2 * sp.beta + 1) /
              std::pow(c * c * std::pow(mu, 2 * sp.alpha - 1) * L + N, 2 * sp.beta + 1);
  out.v = sample(g, [&](int e, double x) {
    if (g->edge(e).kind == EdgeKind::HalfLine) return soliton_value(sp, 2 * m, x);
    return core;
  });
  return out;
}

}  // namespace nlsg::analytic
