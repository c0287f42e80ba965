#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nlsg/analytic.hpp"
#include "nlsg/errors.hpp"
#include "nlsg/experiments.hpp"
#include "nlsg/graph.hpp"
#include "nlsg/io.hpp"
#include "nlsg/solver.hpp"
#include "nlsg/verify.hpp"

namespace {

using namespace nlsg;

struct Opts {
  std::string graph;
  std::string out;
  std::string grid;
  std::string suite = "all";
  double mass = 1.0;
  double p = 4.0;
  double density = 100.0;
  double trunc = 0.0;
  int starts = 4;
  int max_on = -1;
  int N = 2;
  std::uint64_t seed = 1234567ull;
  bool no_adapt = false;
};

SolverConfig make_config(const Opts& o) {
  SolverConfig cfg;
  cfg.p = o.p;
  cfg.points_per_unit = o.density;
  cfg.truncation = o.trunc;
  cfg.multistart = o.starts;
  cfg.seed = o.seed;
  cfg.adapt_truncation = !o.no_adapt;
  return cfg;
}

bool looks_like_file(const std::string& s) {
  if (s.size() > 5 && s.compare(s.size() - 5, 5, ".json") == 0) return true;
  std::ifstream in(s);
  return in.good();
}

GraphPtr resolve_graph(const Opts& o, const SolverConfig& cfg, double mu) {
  double T = cfg.truncation > 0 ? cfg.truncation : default_truncation(cfg.p, mu);
  if (looks_like_file(o.graph)) return load_graph_json(o.graph, T, cfg.points_per_unit);
  return build_standard(o.graph, T, cfg.points_per_unit);
}

std::vector<double> parse_grid(const std::string& s) {
  double a = 0, b = 0, h = 0;
  if (std::sscanf(s.c_str(), "%lf:%lf:%lf", &a, &b, &h) != 3)
    throw invalid_parameter("mass grid must be a:b:h, got '" + s + "'");
  if (!(h > 0) || b < a) throw invalid_parameter("mass grid needs h > 0 and b >= a");
  std::vector<double> g;
  for (int i = 0;; ++i) {
    double mu = a + i * h;
    if (mu > b + 1e-9 * h) break;
    g.push_back(mu);
  }
  return g;
}

io::RunManifest start_manifest(const Opts& o, const std::string& sub, const SolverConfig& cfg,
                               int argc, char** argv) {
  io::RunManifest m;
  for (int i = 0; i < argc; ++i) {
    if (i) m.command += ' ';
    m.command += argv[i];
  }
  m.subcommand = sub;
  m.graph_desc = o.graph;
  m.config = cfg;
  m.mass = o.mass;
  m.timestamp = io::iso_timestamp_utc();
  return m;
}

void emit(const Opts& o, io::RunManifest& m, const std::string& stem, const std::string& payload) {
  if (o.out.empty()) return;
  std::string path = o.out + stem;
  io::write_file(path, payload);
  m.outputs.push_back(path);
}

void finish_manifest(const Opts& o, io::RunManifest& m) {
  if (o.out.empty()) return;
  io::write_file(o.out + ".manifest.json", io::json_manifest(m));
}

int run_solve(const Opts& o, int argc, char** argv) {
  SolverConfig cfg = make_config(o);
  GraphPtr g = resolve_graph(o, cfg, o.mass);
  ConstraintSpec cons =
      o.max_on >= 0 ? ConstraintSpec::max_on(o.max_on) : ConstraintSpec::mass_only();
  GroundStateResult r = minimize(g, cfg, o.mass, cons);
  std::cout << io::json_result(r, o.graph);
  io::RunManifest m = start_manifest(o, "solve", cfg, argc, argv);
  m.graph_json = graph_to_json(*g);
  m.cons = cons;
  emit(o, m, ".json", io::json_result(r, o.graph));
  emit(o, m, ".csv", io::csv_solution(r.u));
  finish_manifest(o, m);
  if (!r.converged) {
    nlohmann::json d;
    d["error"] = "numerical_failure";
    d["message"] = "best start did not converge";
    d["grad_norm"] = r.grad_norm;
    d["iterations"] = r.iterations;
    std::cerr << d.dump() << "\n";
    return 1;
  }
  return 0;
}

int run_sweep(const Opts& o, int argc, char** argv) {
  SolverConfig cfg = make_config(o);
  std::vector<double> grid = parse_grid(o.grid);
  GraphPtr g = resolve_graph(o, cfg, grid.front());
  auto recs = sweep_mu(g, cfg, grid);
  std::string csv = io::csv_sweep(recs);
  std::cout << csv;
  io::RunManifest m = start_manifest(o, "sweep", cfg, argc, argv);
  m.graph_json = graph_to_json(*g);
  m.mass_grid = grid;
  emit(o, m, ".csv", csv);
  finish_manifest(o, m);
  int bad = 0;
  for (const auto& r : recs)
    if (!r.converged) ++bad;
  if (bad) {
    nlohmann::json d;
    d["error"] = "numerical_failure";
    d["message"] = std::to_string(bad) + " of " + std::to_string(recs.size()) +
                   " sweep points did not converge";
    std::cerr << d.dump() << "\n";
    return 1;
  }
  return 0;
}

int run_uniq(const Opts& o, int argc, char** argv) {
  SolverConfig cfg = make_config(o);
  GraphPtr g = resolve_graph(o, cfg, o.mass);
  UniquenessReport rep = uniqueness_probe(g, cfg, o.mass);
  std::cout << io::json_uniq(rep);
  io::RunManifest m = start_manifest(o, "uniq", cfg, argc, argv);
  m.graph_json = graph_to_json(*g);
  emit(o, m, ".json", io::json_uniq(rep));
  emit(o, m, ".csv", io::csv_uniq(rep));
  finish_manifest(o, m);
  if (rep.inconclusive) {
    nlohmann::json d;
    d["error"] = "numerical_failure";
    d["message"] = "fewer than half of the starts converged";
    d["n_converged"] = rep.n_converged;
    d["n_runs"] = rep.n_runs;
    std::cerr << d.dump() << "\n";
    return 1;
  }
  return 0;
}

int run_nonuniq(const Opts& o, int argc, char** argv) {
  NonuniqConfig ncfg;
  ncfg.solver = make_config(o);
  NonuniqReport rep = nonuniqueness_run(o.mass, o.N, ncfg);
  std::cout << io::json_nonuniq(rep);
  io::RunManifest m = start_manifest(o, "nonuniq", ncfg.solver, argc, argv);
  m.graph_desc = "gamma family, N = " + std::to_string(o.N);
  m.n_target = o.N;
  emit(o, m, ".json", io::json_nonuniq(rep));
  emit(o, m, ".attempts.csv", io::csv_nonuniq_attempts(rep));
  if (rep.success) {
    emit(o, m, ".u.csv", io::csv_solution(rep.u.u));
    emit(o, m, ".v.csv", io::csv_solution(rep.v.u));
  }
  finish_manifest(o, m);
  if (!rep.success) {
    nlohmann::json d;
    d["error"] = "numerical_failure";
    d["message"] = rep.message;
    std::cerr << d.dump() << "\n";
    return 1;
  }
  return 0;
}

int run_verify(const Opts& o) {
  auto checks = verify_suite(o.suite);
  bool all = true;
  for (const auto& c : checks) {
    std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << ": " << c.detail << "\n";
    all = all && c.pass;
  }
  std::cout << (all ? "all checks passed" : "some checks FAILED") << "\n";
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mass-constrained NLS ground states on metric graphs"};
  app.require_subcommand(1);
  Opts o;

  auto add_common = [&](CLI::App* c, bool needs_graph) {
    if (needs_graph)
      c->add_option("--graph", o.graph,
                    "graph shorthand (line:L, halfline:L, star:N,t, tadpole:s, gamma:r,s,t,N) "
                    "or a JSON file")
          ->required();
    c->add_option("--p", o.p, "nonlinearity exponent, 2 < p <= 6");
    c->add_option("--density", o.density, "grid points per unit length");
    c->add_option("--trunc", o.trunc, "half-line truncation window (0 = automatic)");
    c->add_option("--starts", o.starts, "number of multistart initial data");
    c->add_option("--seed", o.seed, "random seed for noise starts");
    c->add_option("--out", o.out, "output file prefix (writes payloads plus a manifest)");
    c->add_flag("--no-adapt", o.no_adapt, "disable adaptive truncation doubling");
  };

  CLI::App* solve = app.add_subcommand("solve", "compute one ground state");
  add_common(solve, true);
  solve->add_option("--mass", o.mass, "constraint mass")->required();
  solve->add_option("--max-on", o.max_on, "restrict to states attaining their sup on this edge");

  CLI::App* sweep = app.add_subcommand("sweep", "ground states over a mass grid");
  add_common(sweep, true);
  sweep->add_option("--mass-grid", o.grid, "grid a:b:h")->required();

  CLI::App* uniq = app.add_subcommand("uniq", "multistart uniqueness probe");
  add_common(uniq, true);
  uniq->add_option("--mass", o.mass, "constraint mass")->required();

  CLI::App* nonuniq = app.add_subcommand("nonuniq", "search for a non-unique ground state pair");
  add_common(nonuniq, false);
  nonuniq->add_option("--mass", o.mass, "constraint mass")->required();
  nonuniq->add_option("--N", o.N, "number of half-lines at the junction");

  CLI::App* verify = app.add_subcommand("verify", "run a property suite");
  verify->add_option("suite", o.suite, "rearrange, analytic, solver, or all");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (solve->parsed()) return run_solve(o, argc, argv);
    if (sweep->parsed()) return run_sweep(o, argc, argv);
    if (uniq->parsed()) return run_uniq(o, argc, argv);
    if (nonuniq->parsed()) return run_nonuniq(o, argc, argv);
    if (verify->parsed()) return run_verify(o);
  } catch (const invalid_parameter& e) {
    std::cerr << R"({"error":"usage","message":")" << e.what() << "\"}\n";
    return 2;
  } catch (const unsupported_input& e) {
    std::cerr << R"({"error":"unsupported_input","message":")" << e.what() << "\"}\n";
    return 2;
  } catch (const numerical_failure& e) {
    std::cerr << R"({"error":"numerical_failure","message":")" << e.what() << "\"}\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << R"({"error":"internal","message":")" << e.what() << "\"}\n";
    return 1;
  }
  return 2;
}
