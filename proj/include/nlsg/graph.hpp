#pragma once

#include <memory>
#include <string>
#include <vector>

namespace nlsg {

// A metric graph: finitely many vertices, each edge either a bounded segment
// [0, length] joining two (possibly equal) vertices, or a half-line [0, inf)
// attached at a single vertex.  Half-lines are represented on a truncated
// window [0, length] whose far endpoint is clamped to zero; `length` then
// plays the role of the numerical truncation.
//
// Each edge carries its own uniform grid.  A function on the graph owns one
// degree of freedom per vertex plus one per interior grid node, so values at
// a shared vertex agree across incident edges by construction (Kirchhoff
// coupling comes out of the discrete energy, it is never imposed separately).

enum class EdgeKind { Bounded, HalfLine };

enum class Family { Custom, Line, HalfLine, Star, Tadpole, Gamma };

struct Edge {
  EdgeKind kind = EdgeKind::Bounded;
  int a = -1;               // vertex at x = 0
  int b = -1;               // vertex at x = length (Bounded only, may equal a)
  double length = 0.0;      // metric length; truncation window for half-lines
  std::string role;         // "terminal", "loop", "radial", "halfline", ""

  // grid data, filled when the graph is finalized
  int n = 0;                // grid points including both endpoints
  double h = 0.0;
  int interior0 = -1;       // DOF index of grid node 1
};

struct GraphClass {
  int n_halflines = 0;
  bool has_terminal_edge = false;  // bounded edge with a degree-1 endpoint
  bool type_a = false;             // exactly one half-line and no terminal edge
  double total_compact_length = 0.0;
};

class MetricGraph {
 public:
  MetricGraph(int n_vertices, std::vector<Edge> edges, double points_per_unit);

  int n_vertices() const { return n_vertices_; }
  int n_edges() const { return static_cast<int>(edges_.size()); }
  const Edge& edge(int e) const { return edges_[e]; }
  const std::vector<Edge>& edges() const { return edges_; }
  int n_dofs() const { return n_dofs_; }
  double points_per_unit() const { return ppu_; }

  // DOF index of grid node i on edge e, or -1 for the clamped far end of a
  // half-line.
  int dof(int e, int i) const {
    const Edge& ed = edges_[e];
    if (i == 0) return ed.a;
    if (i == ed.n - 1) return ed.kind == EdgeKind::HalfLine ? -1 : ed.b;
    return ed.interior0 + i - 1;
  }

  double x(int e, int i) const { return edges_[e].h * i; }

  // trapezoid weight accumulated over all grid nodes mapped to this DOF
  double weight(int d) const { return w_[d]; }
  const std::vector<double>& weights() const { return w_; }

  int degree(int v) const { return degree_[v]; }  // self-loops count twice

  double total_compact_length() const;
  GraphClass classify() const;

  Family family = Family::Custom;
  std::vector<double> family_params;  // builder parameters, for reports
  std::string name;

 private:
  int n_vertices_ = 0;
  std::vector<Edge> edges_;
  double ppu_ = 0.0;
  int n_dofs_ = 0;
  std::vector<double> w_;
  std::vector<int> degree_;
};

using GraphPtr = std::shared_ptr<const MetricGraph>;

// Standard families.  `trunc` is the half-line truncation window.
GraphPtr make_line(double half_extent, double ppu);
GraphPtr make_halfline(double extent, double ppu);
GraphPtr make_star(int N, double t, double trunc, double ppu);
// Tadpole with loop parameter s: the self-loop edge has metric length 2s.
GraphPtr make_tadpole(double s, double trunc, double ppu);
// N half-lines and a terminal edge of length t at vertex v, an edge of length
// r from v to w, and a self-loop of metric length s at w.
GraphPtr make_gamma(double r, double s, double t, int N, double trunc, double ppu);

// Copy of g with every half-line truncation multiplied by `factor`.
GraphPtr with_scaled_truncation(const MetricGraph& g, double factor);

// CLI shorthand: "line[:H]", "halfline[:H]", "star:N,t", "tadpole:s",
// "gamma:r,s,t,N".  `trunc` supplies the half-line window.
GraphPtr build_standard(const std::string& spec, double trunc, double ppu);

// JSON graph files: {"name": str, "vertices": [0,1,...], "edges":
// [{"kind": "bounded"|"halfline", "length": l, "ends": [a,b] or [a]}, ...]}.
// Half-line edges may omit "length"; `default_trunc` is used then.
GraphPtr load_graph_json(const std::string& path, double default_trunc, double ppu);
GraphPtr parse_graph_json(const std::string& text, double default_trunc, double ppu);
std::string graph_to_json(const MetricGraph& g);

}  // namespace nlsg
