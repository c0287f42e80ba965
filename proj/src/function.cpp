#include "nlsg/function.hpp"

#include <algorithm>
#include <cmath>

#include "nlsg/errors.hpp"

namespace nlsg {

double GraphFunction::max_abs() const {
  double m = 0;
  for (double v : v_) m = std::max(m, std::abs(v));
  return m;
}

double GraphFunction::max_value() const {
  double m = v_.empty() ? 0.0 : v_[0];
  for (double v : v_) m = std::max(m, v);
  return m;
}

double GraphFunction::min_value() const {
  double m = v_.empty() ? 0.0 : v_[0];
  for (double v : v_) m = std::min(m, v);
  // clamped half-line ends hold an implicit zero
  for (const Edge& ed : g_->edges())
    if (ed.kind == EdgeKind::HalfLine) m = std::min(m, 0.0);
  return m;
}

GraphFunction sample(GraphPtr g, const std::function<double(int, double)>& f) {
  GraphFunction u(g);
  for (int e = 0; e < g->n_edges(); ++e) {
    const Edge& ed = g->edge(e);
    for (int i = 0; i < ed.n; ++i) {
      int d = g->dof(e, i);
      if (d >= 0) u.dof(d) = f(e, g->x(e, i));
    }
  }
  return u;
}

GraphFunction resample(const GraphFunction& u, GraphPtr g2) {
  const MetricGraph& g1 = u.graph();
  if (g1.n_edges() != g2->n_edges())
    throw invalid_parameter("resample: graphs have different edge counts");
  GraphFunction out(g2);
  for (int e = 0; e < g2->n_edges(); ++e) {
    const Edge& src = g1.edge(e);
    const Edge& dst = g2->edge(e);
    for (int i = 0; i < dst.n; ++i) {
      int d = g2->dof(e, i);
      if (d < 0) continue;
      double x = g2->x(e, i);
      double val = 0.0;
      if (x <= src.length) {
        double s = x / src.h;
        int j = std::min((int)s, src.n - 2);
        double frac = s - j;
        val = (1 - frac) * u.value(e, j) + frac * u.value(e, j + 1);
      }
      out.dof(d) = val;
    }
  }
  return out;
}

namespace {

template <class F>
double trapz_sum(const GraphFunction& u, F&& f) {
  const MetricGraph& g = u.graph();
  double total = 0;
  for (int e = 0; e < g.n_edges(); ++e) {
    const Edge& ed = g.edge(e);
    double s = 0.5 * (f(u.value(e, 0)) + f(u.value(e, ed.n - 1)));
    for (int i = 1; i < ed.n - 1; ++i) s += f(u.value(e, i));
    total += s * ed.h;
  }
  return total;
}

}  // namespace

double mass(const GraphFunction& u) {
  return trapz_sum(u, [](double v) { return v * v; });
}

double lp_norm_p(const GraphFunction& u, double p) {
  if (p == 4.0) return trapz_sum(u, [](double v) { return (v * v) * (v * v); });
  if (p == 6.0) return trapz_sum(u, [](double v) { return (v * v) * (v * v) * (v * v); });
  return trapz_sum(u, [p](double v) { return std::pow(std::abs(v), p); });
}

double integral(const GraphFunction& u) {
  return trapz_sum(u, [](double v) { return v; });
}

double kinetic(const GraphFunction& u) {
  const MetricGraph& g = u.graph();
  double total = 0;
  for (int e = 0; e < g.n_edges(); ++e) {
    const Edge& ed = g.edge(e);
    const int n = ed.n;
    auto val = [&](int i) { return u.value(e, i); };
    auto sq = [](double d) { return d * d; };
    double s = 0;
    if (n == 2) {
      double d0 = (val(1) - val(0)) / ed.h;
      s = 0.5 * (sq(d0) + sq(d0));
    } else {
      double dl = (-3 * val(0) + 4 * val(1) - val(2)) / (2 * ed.h);
      double dr = (3 * val(n - 1) - 4 * val(n - 2) + val(n - 3)) / (2 * ed.h);
      s = 0.5 * (sq(dl) + sq(dr));
      for (int i = 1; i < n - 1; ++i) s += sq((val(i + 1) - val(i - 1)) / (2 * ed.h));
    }
    total += s * ed.h;
  }
  return total;
}

double dirichlet(const GraphFunction& u) {
  const MetricGraph& g = u.graph();
  double total = 0;
  for (int e = 0; e < g.n_edges(); ++e) {
    const Edge& ed = g.edge(e);
    double s = 0;
    for (int i = 0; i < ed.n - 1; ++i) {
      double d = u.value(e, i + 1) - u.value(e, i);
      s += d * d;
    }
    total += s / ed.h;
  }
  return total;
}

double inner_mass(const GraphFunction& u, const GraphFunction& v) {
  const auto& w = u.graph().weights();
  double s = 0;
  for (size_t i = 0; i < w.size(); ++i) s += w[i] * u.dof((int)i) * v.dof((int)i);
  return s;
}

double h1_distance(const GraphFunction& u, const GraphFunction& v) {
  const MetricGraph& g = u.graph();
  if (&g != &v.graph()) throw invalid_parameter("h1_distance: functions on different graphs");
  const auto& w = g.weights();
  double l2 = 0;
  for (size_t i = 0; i < w.size(); ++i) {
    double d = u.dof((int)i) - v.dof((int)i);
    l2 += w[i] * d * d;
  }
  double kin = 0;
  for (int e = 0; e < g.n_edges(); ++e) {
    const Edge& ed = g.edge(e);
    for (int i = 0; i < ed.n - 1; ++i) {
      double d = (u.value(e, i + 1) - v.value(e, i + 1)) - (u.value(e, i) - v.value(e, i));
      kin += d * d / ed.h;
    }
  }
  return std::sqrt(l2 + kin);
}

}  // namespace nlsg
