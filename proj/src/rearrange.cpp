#include "nlsg/rearrange.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "nlsg/errors.hpp"

namespace nlsg::rearrange {

namespace {

// exact int |v|^q over one linear segment a -> b of length h
double segment_pow(double a, double b, double h, double q) {
  if (h <= 0) return 0;
  if (a > b) std::swap(a, b);
  if (a < 0 && b > 0) {
    // split at the zero crossing
    double xa = h * (-a) / (b - a);
    return segment_pow(a, 0, xa, q) + segment_pow(0, b, h - xa, q);
  }
  double lo = std::abs(a), hi = std::abs(b);
  if (lo > hi) std::swap(lo, hi);
  if (hi <= 0) return 0;
  if (hi - lo <= 1e-9 * hi) {
    // near-flat segment: Simpson is exact to rounding here
    double m = 0.5 * (lo + hi);
    return h / 6 * (std::pow(lo, q) + 4 * std::pow(m, q) + std::pow(hi, q));
  }
  return h * (std::pow(hi, q + 1) - std::pow(lo, q + 1)) / ((q + 1) * (hi - lo));
}

struct Breakpoints {
  std::vector<double> x, v;
};

// Exact decreasing rearrangement of a piecewise-linear function, as the
// generalized inverse of rho(t) = |{u > t}|.  rho is affine between node
// values, so a descending sweep over the distinct values with incremental
// slope bookkeeping yields every breakpoint of the inverse.  Plateaus in u
// show up as jumps of rho and come back as flat pieces of the rearrangement.
Breakpoints decreasing_breakpoints(const PiecewiseLinear& u) {
  struct Sloped {
    double lo, hi, q;  // q = h / (hi - lo)
  };
  std::vector<Sloped> sloped;
  std::map<double, double, std::greater<double>> plateaus;  // value -> total h
  for (const auto& c : u.cells) {
    if (c.h <= 0) continue;
    double lo = std::min(c.va, c.vb), hi = std::max(c.va, c.vb);
    if (hi > lo)
      sloped.push_back({lo, hi, c.h / (hi - lo)});
    else
      plateaus[lo] += c.h;
  }

  std::vector<double> vals;
  vals.reserve(2 * sloped.size() + plateaus.size());
  for (const auto& s : sloped) {
    vals.push_back(s.lo);
    vals.push_back(s.hi);
  }
  for (const auto& [v, h] : plateaus) vals.push_back(v);
  std::sort(vals.begin(), vals.end(), std::greater<double>());
  vals.erase(std::unique(vals.begin(), vals.end()), vals.end());

  std::vector<Sloped> by_hi = sloped, by_lo = sloped;
  std::sort(by_hi.begin(), by_hi.end(), [](auto& a, auto& b) { return a.hi > b.hi; });
  std::sort(by_lo.begin(), by_lo.end(), [](auto& a, auto& b) { return a.lo > b.lo; });

  Breakpoints bp;
  double C = 0, S1 = 0, S2 = 0;  // rho(t) = C + S1 - S2 t on the current band
  size_t ih = 0, il = 0;
  for (double v : vals) {
    while (ih < by_hi.size() && by_hi[ih].hi >= v) {
      S1 += by_hi[ih].q * by_hi[ih].hi;
      S2 += by_hi[ih].q;
      ++ih;
    }
    double rho = C + S1 - S2 * v;
    if (rho < 0) rho = 0;
    bp.x.push_back(rho);
    bp.v.push_back(v);
    auto pit = plateaus.find(v);
    double jump = pit == plateaus.end() ? 0.0 : pit->second;
    if (jump > 0) {
      bp.x.push_back(rho + jump);
      bp.v.push_back(v);
      C += jump;
    }
    while (il < by_lo.size() && by_lo[il].lo >= v) {
      S1 -= by_lo[il].q * by_lo[il].hi;
      S2 -= by_lo[il].q;
      C += by_lo[il].q * (by_lo[il].hi - by_lo[il].lo);
      ++il;
    }
  }
  return bp;
}

double breakpoints_pow(const Breakpoints& bp, double q) {
  double s = 0;
  for (size_t j = 0; j + 1 < bp.x.size(); ++j)
    s += segment_pow(bp.v[j], bp.v[j + 1], bp.x[j + 1] - bp.x[j], q);
  return s;
}

double breakpoints_dirichlet(const Breakpoints& bp) {
  double s = 0;
  for (size_t j = 0; j + 1 < bp.x.size(); ++j) {
    double dx = bp.x[j + 1] - bp.x[j];
    double dv = bp.v[j + 1] - bp.v[j];
    if (dx > 0) s += dv * dv / dx;
    // dx == 0 with dv != 0 cannot occur for continuous inputs
  }
  return s;
}

}  // namespace

double PiecewiseLinear::total_length() const {
  double s = 0;
  for (const auto& c : cells) s += c.h;
  return s;
}

double PiecewiseLinear::integral_pow(double q) const {
  double s = 0;
  for (const auto& c : cells) s += segment_pow(c.va, c.vb, c.h, q);
  return s;
}

double PiecewiseLinear::dirichlet() const {
  double s = 0;
  for (const auto& c : cells) {
    double d = c.vb - c.va;
    if (c.h > 0) s += d * d / c.h;
  }
  return s;
}

double PiecewiseLinear::max_value() const {
  double m = cells.empty() ? 0.0 : cells[0].va;
  for (const auto& c : cells) m = std::max({m, c.va, c.vb});
  return m;
}

double PiecewiseLinear::min_value() const {
  double m = cells.empty() ? 0.0 : cells[0].va;
  for (const auto& c : cells) m = std::min({m, c.va, c.vb});
  return m;
}

PiecewiseLinear cells_of(const GraphFunction& u) {
  PiecewiseLinear out;
  const MetricGraph& g = u.graph();
  for (int e = 0; e < g.n_edges(); ++e) {
    const Edge& ed = g.edge(e);
    for (int i = 0; i < ed.n - 1; ++i)
      out.cells.push_back({u.value(e, i), u.value(e, i + 1), ed.h});
  }
  return out;
}

PiecewiseLinear cells_of_edge(const GraphFunction& u, int e) {
  PiecewiseLinear out;
  const Edge& ed = u.graph().edge(e);
  for (int i = 0; i < ed.n - 1; ++i)
    out.cells.push_back({u.value(e, i), u.value(e, i + 1), ed.h});
  return out;
}

double distribution(const PiecewiseLinear& u, double t) {
  double s = 0;
  for (const auto& c : u.cells) {
    double lo = std::min(c.va, c.vb), hi = std::max(c.va, c.vb);
    if (t < lo)
      s += c.h;
    else if (t < hi)
      s += c.h * (hi - t) / (hi - lo);
  }
  return s;
}

Rearranged decreasing_rearrangement(const PiecewiseLinear& u, double p) {
  if (u.min_value() < 0) throw invalid_parameter("rearrangement needs u >= 0");
  Breakpoints bp = decreasing_breakpoints(u);
  Rearranged out;
  out.x = std::move(bp.x);
  out.v = std::move(bp.v);
  Breakpoints view{out.x, out.v};
  out.p = p;
  out.mass = breakpoints_pow(view, 2);
  out.lp = breakpoints_pow(view, p);
  out.kinetic = breakpoints_dirichlet(view);
  out.src_mass = u.mass();
  out.src_lp = u.integral_pow(p);
  out.src_kinetic = u.dirichlet();
  return out;
}

Rearranged symmetric_rearrangement(const PiecewiseLinear& u, double p) {
  if (u.min_value() < 0) throw invalid_parameter("rearrangement needs u >= 0");
  Breakpoints dec = decreasing_breakpoints(u);
  Breakpoints bp;
  size_t n = dec.x.size();
  bp.x.reserve(2 * n);
  bp.v.reserve(2 * n);
  for (size_t j = n; j-- > 0;) {
    bp.x.push_back(-dec.x[j] / 2);
    bp.v.push_back(dec.v[j]);
  }
  for (size_t j = 1; j < n; ++j) {  // skip the duplicated center point
    bp.x.push_back(dec.x[j] / 2);
    bp.v.push_back(dec.v[j]);
  }
  Rearranged out;
  out.x = std::move(bp.x);
  out.v = std::move(bp.v);
  Breakpoints view{out.x, out.v};
  out.p = p;
  out.mass = breakpoints_pow(view, 2);
  out.lp = breakpoints_pow(view, p);
  out.kinetic = breakpoints_dirichlet(view);
  out.src_mass = u.mass();
  out.src_lp = u.integral_pow(p);
  out.src_kinetic = u.dirichlet();
  return out;
}

int preimage_count(const GraphFunction& u, const std::vector<double>& levels) {
  if (levels.empty()) throw invalid_parameter("preimage_count: no levels");
  PiecewiseLinear cells = cells_of(u);
  double scale = std::max(1.0, u.max_abs());

  std::vector<double> nodevals;
  nodevals.reserve(2 * cells.cells.size());
  for (const auto& c : cells.cells) {
    nodevals.push_back(c.va);
    nodevals.push_back(c.vb);
  }
  std::sort(nodevals.begin(), nodevals.end());

  int best = -1;
  for (double tau : levels) {
    auto it = std::lower_bound(nodevals.begin(), nodevals.end(), tau);
    bool near = false;
    if (it != nodevals.end() && std::abs(*it - tau) <= 1e-12 * scale) near = true;
    if (it != nodevals.begin() && std::abs(*(it - 1) - tau) <= 1e-12 * scale) near = true;
    if (near) continue;  // plateau-adjacent level, not transversal
    int count = 0;
    for (const auto& c : cells.cells)
      if ((c.va - tau) * (c.vb - tau) < 0) ++count;
    if (best < 0 || count < best) best = count;
  }
  if (best < 0) throw invalid_parameter("preimage_count: every level was plateau-adjacent");
  return best;
}

Transplant loop_to_halfline(const PiecewiseLinear& loop, double p_point, double p) {
  if (loop.cells.empty()) throw invalid_parameter("loop_to_halfline: empty loop");
  if (loop.min_value() < 0) throw invalid_parameter("loop_to_halfline: needs u >= 0");
  double s = loop.total_length();
  if (!(p_point >= 0 && p_point <= s))
    throw invalid_parameter("loop_to_halfline: marked point outside the loop");

  // value at the marked point
  double tau = loop.cells.back().vb;
  {
    double acc = 0;
    for (const auto& c : loop.cells) {
      if (p_point <= acc + c.h || &c == &loop.cells.back()) {
        double f = c.h > 0 ? std::clamp((p_point - acc) / c.h, 0.0, 1.0) : 0.0;
        tau = c.va + f * (c.vb - c.va);
        break;
      }
      acc += c.h;
    }
  }

  // split the loop at the level tau
  PiecewiseLinear above, below;
  for (const auto& c : loop.cells) {
    double lo = std::min(c.va, c.vb), hi = std::max(c.va, c.vb);
    if (lo >= tau) {
      above.cells.push_back(c);
    } else if (hi <= tau) {
      below.cells.push_back(c);
    } else {
      double xc = c.h * (tau - c.va) / (c.vb - c.va);
      if (c.va > tau) {
        above.cells.push_back({c.va, tau, xc});
        below.cells.push_back({tau, c.vb, c.h - xc});
      } else {
        below.cells.push_back({c.va, tau, xc});
        above.cells.push_back({tau, c.vb, c.h - xc});
      }
    }
  }

  Transplant out;
  out.p = p;
  out.s = s;
  out.tau = tau;
  out.delta = loop.min_value();
  out.loop_mass = loop.mass();
  out.loop_lp = loop.integral_pow(p);
  out.loop_kinetic = loop.dirichlet();

  double ell = above.total_length();
  out.ell = ell;

  // symmetric rearrangement of the super-level part, shifted onto [0, ell]
  if (!above.cells.empty() && ell > 0) {
    Breakpoints dec = decreasing_breakpoints(above);
    size_t n = dec.x.size();
    for (size_t j = n; j-- > 0;) {
      out.x.push_back((ell - dec.x[j]) / 2);
      out.v.push_back(dec.v[j]);
    }
    for (size_t j = 1; j < n; ++j) {
      out.x.push_back((ell + dec.x[j]) / 2);
      out.v.push_back(dec.v[j]);
    }
  } else {
    out.x.push_back(0);
    out.v.push_back(tau);
  }

  // decreasing rearrangement of the rest on [ell, s]
  if (!below.cells.empty() && below.total_length() > 0) {
    Breakpoints dec = decreasing_breakpoints(below);
    for (size_t j = 0; j < dec.x.size(); ++j) {
      if (j == 0 && !out.x.empty() && dec.v[j] == out.v.back()) continue;
      out.x.push_back(ell + dec.x[j]);
      out.v.push_back(dec.v[j]);
    }
  }

  Breakpoints view{out.x, out.v};
  double T = out.tail_len, d = out.delta;
  double tail2 = d * d / 2 * (1 - std::exp(-2 * T));
  out.mass = breakpoints_pow(view, 2) + tail2;
  out.lp = breakpoints_pow(view, p) + std::pow(d, p) / p * (1 - std::exp(-p * T));
  out.kinetic = breakpoints_dirichlet(view) + tail2;
  return out;
}

}  // namespace nlsg::rearrange
