#pragma once

#include <functional>
#include <vector>

#include "nlsg/graph.hpp"

namespace nlsg {

// Real-valued function on a metric graph, one value per DOF.  Values at the
// clamped far ends of half-lines are identically zero and carry no DOF.
class GraphFunction {
 public:
  GraphFunction() = default;
  explicit GraphFunction(GraphPtr g) : g_(std::move(g)), v_(g_->n_dofs(), 0.0) {}

  const MetricGraph& graph() const { return *g_; }
  GraphPtr graph_ptr() const { return g_; }

  double value(int e, int i) const {
    int d = g_->dof(e, i);
    return d < 0 ? 0.0 : v_[d];
  }
  double& dof(int d) { return v_[d]; }
  double dof(int d) const { return v_[d]; }
  std::vector<double>& dofs() { return v_; }
  const std::vector<double>& dofs() const { return v_; }

  double max_abs() const;
  double max_value() const;
  double min_value() const;

 private:
  GraphPtr g_;
  std::vector<double> v_;
};

// Sample f(e, x) at every grid node; shared vertices take the value of the
// last edge visiting them, so f must be single-valued at vertices.
GraphFunction sample(GraphPtr g, const std::function<double(int, double)>& f);

// Transfer u onto another discretization of the same topology (used when
// half-line windows are enlarged): linear interpolation in x per edge, zero
// beyond the source window.
GraphFunction resample(const GraphFunction& u, GraphPtr g2);

// Composite-trapezoid integrals over the whole graph.
double mass(const GraphFunction& u);                  // int u^2
double lp_norm_p(const GraphFunction& u, double p);   // int |u|^p
double integral(const GraphFunction& u);              // int u

// int |u'|^2 with second-order differences (central inside, one-sided at the
// edge endpoints) and trapezoid quadrature.  Measurement companion of
// dirichlet(); the two agree to O(h^2) on smooth profiles.
double kinetic(const GraphFunction& u);

// int |u'|^2 of the piecewise-linear interpolant: sum (u_{i+1}-u_i)^2 / h.
// This is the form the solver's discrete energy is built from.
double dirichlet(const GraphFunction& u);

double inner_mass(const GraphFunction& u, const GraphFunction& v);

// H1 distance of two functions sharing one discretization.
double h1_distance(const GraphFunction& u, const GraphFunction& v);

}  // namespace nlsg
