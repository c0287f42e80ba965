#include "nlsg/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "nlsg/errors.hpp"

namespace nlsg {

namespace {

// Grid points for an edge of given length.  Loops get an even interval count
// so the loop midpoint falls on a node (symmetry diagnostics rely on it).
int grid_points(const Edge& ed, double ppu) {
  int intervals = std::max(2, (int)std::lround(ed.length * ppu));
  bool loop = ed.kind == EdgeKind::Bounded && ed.a == ed.b;
  if (loop) {
    intervals = std::max(4, intervals);
    if (intervals % 2 != 0) ++intervals;
  }
  return intervals + 1;
}

}  // namespace

MetricGraph::MetricGraph(int n_vertices, std::vector<Edge> edges, double points_per_unit)
    : n_vertices_(n_vertices), edges_(std::move(edges)), ppu_(points_per_unit) {
  if (n_vertices_ <= 0) throw invalid_parameter("graph needs at least one vertex");
  if (edges_.empty()) throw invalid_parameter("graph needs at least one edge");
  if (!(ppu_ > 0)) throw invalid_parameter("points_per_unit must be positive");

  degree_.assign(n_vertices_, 0);
  int next = n_vertices_;
  for (Edge& ed : edges_) {
    if (!(ed.length > 0) || !std::isfinite(ed.length))
      throw invalid_parameter("edge length must be positive and finite");
    if (ed.a < 0 || ed.a >= n_vertices_) throw invalid_parameter("edge endpoint out of range");
    if (ed.kind == EdgeKind::Bounded) {
      if (ed.b < 0 || ed.b >= n_vertices_) throw invalid_parameter("edge endpoint out of range");
      degree_[ed.a]++;
      degree_[ed.b]++;
    } else {
      ed.b = -1;
      degree_[ed.a]++;
    }
    ed.n = grid_points(ed, ppu_);
    ed.h = ed.length / (ed.n - 1);
    ed.interior0 = next;
    next += ed.n - 2;
  }
  n_dofs_ = next;

  // connectivity check (vertices joined by edges; isolated vertices rejected)
  std::vector<int> comp(n_vertices_, -1);
  std::vector<int> stack{edges_[0].a};
  comp[edges_[0].a] = 0;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (const Edge& ed : edges_) {
      int o = -1;
      if (ed.a == v && ed.b >= 0) o = ed.b;
      if (ed.b == v) o = ed.a;
      if (ed.a == v && ed.kind == EdgeKind::HalfLine) continue;
      if (o >= 0 && comp[o] < 0) {
        comp[o] = 0;
        stack.push_back(o);
      }
    }
  }
  for (int v = 0; v < n_vertices_; ++v) {
    if (degree_[v] == 0) throw invalid_parameter("isolated vertex");
    if (comp[v] < 0) throw invalid_parameter("graph is not connected");
  }

  w_.assign(n_dofs_, 0.0);
  for (int e = 0; e < n_edges(); ++e) {
    const Edge& ed = edges_[e];
    for (int i = 0; i < ed.n; ++i) {
      int d = dof(e, i);
      if (d < 0) continue;
      w_[d] += (i == 0 || i == ed.n - 1) ? ed.h / 2 : ed.h;
    }
  }
}

double MetricGraph::total_compact_length() const {
  double L = 0;
  for (const Edge& ed : edges_)
    if (ed.kind == EdgeKind::Bounded) L += ed.length;
  return L;
}

GraphClass MetricGraph::classify() const {
  GraphClass c;
  c.total_compact_length = total_compact_length();
  for (const Edge& ed : edges_) {
    if (ed.kind == EdgeKind::HalfLine) {
      c.n_halflines++;
    } else if (ed.a != ed.b && (degree_[ed.a] == 1 || degree_[ed.b] == 1)) {
      c.has_terminal_edge = true;
    }
  }
  c.type_a = (c.n_halflines == 1) && !c.has_terminal_edge;
  return c;
}

GraphPtr make_line(double half_extent, double ppu) {
  if (!(half_extent > 0)) throw invalid_parameter("line: half extent must be positive");
  std::vector<Edge> es(2);
  for (Edge& ed : es) {
    ed.kind = EdgeKind::HalfLine;
    ed.a = 0;
    ed.length = half_extent;
    ed.role = "halfline";
  }
  auto g = std::make_shared<MetricGraph>(1, es, ppu);
  g->family = Family::Line;
  g->family_params = {half_extent};
  g->name = "line";
  return g;
}

GraphPtr make_halfline(double extent, double ppu) {
  if (!(extent > 0)) throw invalid_parameter("halfline: extent must be positive");
  Edge ed;
  ed.kind = EdgeKind::HalfLine;
  ed.a = 0;
  ed.length = extent;
  ed.role = "halfline";
  auto g = std::make_shared<MetricGraph>(1, std::vector<Edge>{ed}, ppu);
  g->family = Family::HalfLine;
  g->family_params = {extent};
  g->name = "halfline";
  return g;
}

GraphPtr make_star(int N, double t, double trunc, double ppu) {
  if (N < 2) throw invalid_parameter("star: need N >= 2 half-lines");
  if (!(t > 0)) throw invalid_parameter("star: terminal edge length must be positive");
  std::vector<Edge> es;
  Edge term;
  term.a = 0;
  term.b = 1;
  term.length = t;
  term.role = "terminal";
  es.push_back(term);
  for (int k = 0; k < N; ++k) {
    Edge hl;
    hl.kind = EdgeKind::HalfLine;
    hl.a = 0;
    hl.length = trunc;
    hl.role = "halfline";
    es.push_back(hl);
  }
  auto g = std::make_shared<MetricGraph>(2, es, ppu);
  g->family = Family::Star;
  g->family_params = {(double)N, t};
  g->name = "star";
  return g;
}

GraphPtr make_tadpole(double s, double trunc, double ppu) {
  if (!(s > 0)) throw invalid_parameter("tadpole: loop parameter must be positive");
  Edge loop;
  loop.a = 0;
  loop.b = 0;
  loop.length = 2 * s;  // loop parameter s means metric length 2s
  loop.role = "loop";
  Edge hl;
  hl.kind = EdgeKind::HalfLine;
  hl.a = 0;
  hl.length = trunc;
  hl.role = "halfline";
  auto g = std::make_shared<MetricGraph>(1, std::vector<Edge>{loop, hl}, ppu);
  g->family = Family::Tadpole;
  g->family_params = {s};
  g->name = "tadpole";
  return g;
}

GraphPtr make_gamma(double r, double s, double t, int N, double trunc, double ppu) {
  if (N < 2) throw invalid_parameter("gamma: need N >= 2 half-lines");
  if (!(r > 0) || !(s > 0) || !(t > 0)) throw invalid_parameter("gamma: edge lengths must be positive");
  // vertices: 0 = v (junction), 1 = w (loop base), 2 = terminal tip
  std::vector<Edge> es;
  Edge term;
  term.a = 0;
  term.b = 2;
  term.length = t;
  term.role = "terminal";
  es.push_back(term);
  Edge loop;
  loop.a = 1;
  loop.b = 1;
  loop.length = s;  // the self-loop has metric length s in this family
  loop.role = "loop";
  es.push_back(loop);
  Edge rad;
  rad.a = 0;
  rad.b = 1;
  rad.length = r;
  rad.role = "radial";
  es.push_back(rad);
  for (int k = 0; k < N; ++k) {
    Edge hl;
    hl.kind = EdgeKind::HalfLine;
    hl.a = 0;
    hl.length = trunc;
    hl.role = "halfline";
    es.push_back(hl);
  }
  auto g = std::make_shared<MetricGraph>(3, es, ppu);
  g->family = Family::Gamma;
  g->family_params = {r, s, t, (double)N};
  g->name = "gamma";
  return g;
}

GraphPtr with_scaled_truncation(const MetricGraph& g, double factor) {
  std::vector<Edge> es;
  es.reserve(g.n_edges());
  for (const Edge& ed : g.edges()) {
    Edge c = ed;
    c.n = 0;
    c.h = 0;
    c.interior0 = -1;
    if (c.kind == EdgeKind::HalfLine) c.length *= factor;
    es.push_back(c);
  }
  auto out = std::make_shared<MetricGraph>(g.n_vertices(), es, g.points_per_unit());
  out->family = g.family;
  out->family_params = g.family_params;
  out->name = g.name;
  return out;
}

GraphPtr build_standard(const std::string& spec, double trunc, double ppu) {
  std::string kind = spec;
  std::vector<double> par;
  auto colon = spec.find(':');
  if (colon != std::string::npos) {
    kind = spec.substr(0, colon);
    std::stringstream ss(spec.substr(colon + 1));
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        par.push_back(std::stod(tok));
      } catch (...) {
        throw invalid_parameter("bad graph parameter '" + tok + "' in '" + spec + "'");
      }
    }
  }
  if (kind == "line") return make_line(par.empty() ? trunc : par[0] / 2, ppu);
  if (kind == "halfline") return make_halfline(par.empty() ? trunc : par[0], ppu);
  if (kind == "star") {
    if (par.size() != 2) throw invalid_parameter("star: expected star:N,t");
    return make_star((int)std::lround(par[0]), par[1], trunc, ppu);
  }
  if (kind == "tadpole") {
    if (par.size() != 1) throw invalid_parameter("tadpole: expected tadpole:s");
    return make_tadpole(par[0], trunc, ppu);
  }
  if (kind == "gamma") {
    if (par.size() != 4) throw invalid_parameter("gamma: expected gamma:r,s,t,N");
    return make_gamma(par[0], par[1], par[2], (int)std::lround(par[3]), trunc, ppu);
  }
  throw invalid_parameter("unknown graph '" + spec + "'");
}

GraphPtr parse_graph_json(const std::string& text, double default_trunc, double ppu) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw invalid_parameter(std::string("graph json: ") + e.what());
  }
  if (!j.contains("vertices") || !j.contains("edges"))
    throw invalid_parameter("graph json: need 'vertices' and 'edges'");
  int nv = (int)j["vertices"].size();
  std::vector<Edge> es;
  for (const auto& je : j["edges"]) {
    Edge ed;
    std::string kind = je.value("kind", "bounded");
    if (kind == "bounded")
      ed.kind = EdgeKind::Bounded;
    else if (kind == "halfline")
      ed.kind = EdgeKind::HalfLine;
    else
      throw invalid_parameter("graph json: edge kind must be 'bounded' or 'halfline'");
    if (!je.contains("ends") || !je["ends"].is_array())
      throw invalid_parameter("graph json: edge needs 'ends'");
    auto ends = je["ends"];
    if (ed.kind == EdgeKind::Bounded) {
      if (ends.size() != 2) throw invalid_parameter("graph json: bounded edge needs two ends");
      ed.a = ends[0].get<int>();
      ed.b = ends[1].get<int>();
      if (!je.contains("length")) throw invalid_parameter("graph json: bounded edge needs 'length'");
      ed.length = je["length"].get<double>();
    } else {
      if (ends.size() < 1) throw invalid_parameter("graph json: halfline edge needs one end");
      ed.a = ends[0].get<int>();
      ed.length = je.value("length", default_trunc);
      ed.role = "halfline";
    }
    if (je.contains("role")) ed.role = je["role"].get<std::string>();
    es.push_back(ed);
  }
  auto g = std::make_shared<MetricGraph>(nv, es, ppu);
  g->name = j.value("name", "custom");
  return g;
}

GraphPtr load_graph_json(const std::string& path, double default_trunc, double ppu) {
  std::ifstream in(path);
  if (!in) throw invalid_parameter("cannot open graph file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_graph_json(ss.str(), default_trunc, ppu);
}

std::string graph_to_json(const MetricGraph& g) {
  nlohmann::json j;
  j["name"] = g.name;
  std::vector<int> verts(g.n_vertices());
  for (int v = 0; v < g.n_vertices(); ++v) verts[v] = v;
  j["vertices"] = verts;
  nlohmann::json es = nlohmann::json::array();
  for (const Edge& ed : g.edges()) {
    nlohmann::json je;
    je["kind"] = ed.kind == EdgeKind::Bounded ? "bounded" : "halfline";
    je["length"] = ed.length;
    if (ed.kind == EdgeKind::Bounded)
      je["ends"] = {ed.a, ed.b};
    else
      je["ends"] = {ed.a};
    if (!ed.role.empty()) je["role"] = ed.role;
    es.push_back(je);
  }
  j["edges"] = es;
  return j.dump(2);
}

}  // namespace nlsg
