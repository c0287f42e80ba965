#pragma once

#include <string>
#include <vector>

#include "nlsg/graph.hpp"
#include "nlsg/solver.hpp"

namespace nlsg {

// One row of a mass sweep.  eps_prime / deriv_residual are filled on interior
// grid points whose neighbors also converged; deriv_residual is
// |central-difference eps' + multiplier / 2|.
struct SweepRecord {
  double mu = 0;
  double energy = 0;
  double multiplier = 0;
  double grad_norm = 0;
  double kirchhoff = 0;
  double el_residual = 0;
  int n_clusters = 0;
  int iterations = 0;
  bool converged = false;
  bool has_derivative = false;
  double eps_prime = 0;
  double deriv_residual = 0;
};

std::vector<SweepRecord> sweep_mu(GraphPtr g, const SolverConfig& cfg,
                                  const std::vector<double>& mu_grid);

// Multistart uniqueness probe: cfg.multistart independent runs, clustered by
// symmetry-reduced H1 distance (half-line traces sorted per anchor vertex,
// self-loops quotiented by reflection) with single-linkage threshold
// 1e-3 sqrt(mu).  Inconclusive when fewer than half the runs converge.
// Only converged runs within 2e-4 (1 + |E_best|) of the best energy enter
// the clustering: strictly higher local minima (e.g. states escaped onto a
// half-line window) are counted separately, while genuinely distinct ground
// states at the same level stay inside the window.
struct UniquenessReport {
  int n_runs = 0;
  int n_converged = 0;
  int n_in_window = 0;
  int n_clusters = 0;
  bool inconclusive = false;
  double threshold = 0;
  double value_window = 0;
  double max_intra = 0;  // largest intra-cluster distance
  double min_inter = 0;  // smallest inter-cluster distance (0 if one cluster)
  std::vector<int> labels;        // cluster id per in-window run
  std::vector<int> member_start;  // start index per in-window run
  std::vector<int> rep_start;     // representative start index per cluster
  std::vector<double> cluster_energy;   // representative energies
  std::vector<double> cluster_multiplier;
};

UniquenessReport uniqueness_probe(GraphPtr g, const SolverConfig& cfg, double mu);

// Symmetry canonicalization used by the clustering metric (exposed for tests).
GraphFunction canonical_for_symmetry(const GraphFunction& u);

// Threshold mass of the N-half-line star with terminal edge t: the mass where
// the level detaches from the line level.  N = 2 returns 0.
double threshold_mass(int N, double t, const SolverConfig& cfg);

// Threshold terminal length for the star with M half-lines at fixed mass:
// bisection on the level gap to the line level; w is the localized state at
// t_star, computed with the sup constrained to the terminal edge.
struct ThresholdLength {
  double t_star = 0;
  double gap_at_star = 0;  // level(t_star) - level_R
  GroundStateResult w;
};

ThresholdLength threshold_length(int M, const SolverConfig& cfg, double mu);

// Doubly-constrained values on the loop-and-terminal graph: sup on the
// terminal edge (F_t) and sup on the loop (F_s).
struct FMaps {
  double F_t = 0, F_s = 0;
  GroundStateResult on_terminal, on_loop;
};

FMaps f_maps(double r, double s, double t, int N, const SolverConfig& cfg, double mu);

struct MirandaRect {
  double s1 = 0, s2 = 0, t1 = 0, t2 = 0;
  bool valid() const { return s1 > 0 && s2 > s1 && t1 > 0 && t2 > t1; }
};

// Certificate: the chain of rectangles whose side sign conditions
// (F1 > 0 bottom / F1 < 0 top / F2 < 0 left / F2 > 0 right, three samples per
// side or midline) were verified during the refinement.
struct MirandaCertificate {
  std::vector<MirandaRect> chain;
  int f_evals = 0;
  bool value_exit = false;  // stopped on |F - target| rather than on diameter
  bool clean_signs = true;  // no mixed-sign midline was encountered
};

struct MirandaResult {
  double s_bar = 0, t_bar = 0;
  double F_t = 0, F_s = 0;
  double target = 0;  // level_R - eps
  GroundStateResult u;  // sup on terminal at (s_bar, t_bar)
  GroundStateResult v;  // sup on loop
  MirandaCertificate cert;
};

// Locates (s, t) with F_t = F_s = level_R - eps on the graph with given r, N.
// A non-positive rectangle asks for the built-in heuristic; failure to
// exhibit the sign pattern after auto-expansion throws numerical_failure.
MirandaResult miranda_find(double r, int N, double mu, double eps, const SolverConfig& cfg,
                           MirandaRect init = {}, double tol_F = 1e-4);

struct NonuniqAttempt {
  double r = 0, eps = 0;
  bool miranda_ok = false;
  bool success = false;
  double s_bar = 0, t_bar = 0;
  double F_t = 0, F_s = 0;
  double lambda_u = 0, lambda_v = 0;
  std::string failure;
};

struct NonuniqReport {
  bool success = false;
  double p = 0, mu = 0;
  int N = 0;
  double r = 0, eps = 0;        // the successful schedule point
  double s_bar = 0, t_bar = 0;
  double level_R = 0, target = 0;
  double F_t = 0, F_s = 0;
  double lambda_u = 0, lambda_v = 0;
  double lambda_w = 0, lambda_soliton = 0;
  double t_star = 0;            // threshold length of the (N+1)-star
  GroundStateResult u, v;
  MirandaCertificate cert;
  std::vector<NonuniqAttempt> attempts;
  std::string message;
};

struct NonuniqConfig {
  SolverConfig solver;
  std::vector<double> r_schedule = {10, 15, 25, 40};
  std::vector<double> eps_fractions = {0.1, 0.05, 0.02};  // of |level_R|
  double tol_F = 1e-4;
  double tol_lambda = 1e-4;
  double asym_rel = 0.05;  // relative tolerance of the multiplier targets
};

// Full two-ground-state pipeline: walk the (r, eps) schedule, run
// miranda_find, solve both constrained problems, and accept when the
// energies agree, the multipliers split by more than 20 tol_lambda, and both
// multipliers match their asymptotic targets within asym_rel.
NonuniqReport nonuniqueness_run(double mu, int N, const NonuniqConfig& ncfg);

}  // namespace nlsg
