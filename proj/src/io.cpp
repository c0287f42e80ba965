#include "nlsg/io.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "nlsg/errors.hpp"

namespace nlsg::io {

using nlohmann::json;

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

namespace {

std::string header(const std::string& kind) {
  return std::string("# ") + tool_name + " csv " + csv_version + " " + kind + "\n";
}

json config_json(const SolverConfig& c) {
  json j;
  j["p"] = c.p;
  j["points_per_unit"] = c.points_per_unit;
  j["truncation"] = c.truncation;
  j["tol_g"] = c.tol_g;
  j["tol_drift"] = c.tol_drift;
  j["drift_window"] = c.drift_window;
  j["max_iters"] = c.max_iters;
  j["multistart"] = c.multistart;
  j["seed"] = c.seed;
  j["kappa0"] = c.kappa0;
  j["kappa_factor"] = c.kappa_factor;
  j["kappa_stages"] = c.kappa_stages;
  j["kappa_extra_stages"] = c.kappa_extra_stages;
  j["feas_tol"] = c.feas_tol;
  j["adapt_truncation"] = c.adapt_truncation;
  j["max_doublings"] = c.max_doublings;
  j["window_tol"] = c.window_tol;
  j["blowup_threshold"] = c.blowup_threshold;
  return j;
}

json result_body(const GroundStateResult& r) {
  json j;
  j["energy"] = r.energy;
  j["multiplier"] = r.multiplier;
  j["grad_norm"] = r.grad_norm;
  j["feasibility_gap"] = r.feasibility_gap;
  j["iterations"] = r.iterations;
  j["doublings"] = r.doublings;
  j["converged"] = r.converged;
  j["window_ok"] = r.window_ok;
  j["start_index"] = r.start_index;
  j["mass"] = mass(r.u);
  j["sup"] = r.u.max_abs();
  json res;
  res["kirchhoff"] = r.diag.kirchhoff_residual;
  res["el_residual"] = r.diag.el_residual;
  res["halfline_mech_max"] = r.diag.halfline_mech_max;
  j["residuals"] = res;
  json pe = json::array();
  for (const auto& e : r.diag.per_edge) pe.push_back({{"mean", e.mech_mean}, {"var", e.mech_var}});
  j["per_edge_mech"] = pe;
  return j;
}

}  // namespace

std::string csv_solution(const GraphFunction& u) {
  const MetricGraph& g = u.graph();
  std::string s = header("solution");
  s += "edge,x,u\n";
  for (int e = 0; e < g.n_edges(); ++e) {
    const Edge& ed = g.edge(e);
    double h = ed.length / (ed.n - 1);
    for (int i = 0; i < ed.n; ++i)
      s += std::to_string(e) + "," + fmt(i * h) + "," + fmt(u.value(e, i)) + "\n";
  }
  return s;
}

std::string csv_sweep(const std::vector<SweepRecord>& recs) {
  std::string s = header("sweep");
  s += "mu,energy,multiplier,grad_norm,kirchhoff,el_residual,n_clusters,iterations,converged,"
       "eps_prime,deriv_residual\n";
  for (const auto& r : recs) {
    s += fmt(r.mu) + "," + fmt(r.energy) + "," + fmt(r.multiplier) + "," + fmt(r.grad_norm) +
         "," + fmt(r.kirchhoff) + "," + fmt(r.el_residual) + "," + std::to_string(r.n_clusters) +
         "," + std::to_string(r.iterations) + "," + (r.converged ? "1" : "0") + ",";
    if (r.has_derivative) s += fmt(r.eps_prime) + "," + fmt(r.deriv_residual);
    else s += ",";
    s += "\n";
  }
  return s;
}

std::string csv_uniq(const UniquenessReport& rep) {
  std::string s = header("uniq");
  s += "cluster,size,energy,multiplier,rep_start\n";
  for (int c = 0; c < rep.n_clusters; ++c) {
    int size = 0;
    for (int l : rep.labels)
      if (l == c) ++size;
    s += std::to_string(c) + "," + std::to_string(size) + "," + fmt(rep.cluster_energy[c]) +
         "," + fmt(rep.cluster_multiplier[c]) + "," + std::to_string(rep.rep_start[c]) + "\n";
  }
  return s;
}

std::string csv_nonuniq_attempts(const NonuniqReport& rep) {
  std::string s = header("nonuniq");
  s += "attempt,r,eps,miranda_ok,success,s_bar,t_bar,F_t,F_s,lambda_u,lambda_v\n";
  for (size_t i = 0; i < rep.attempts.size(); ++i) {
    const auto& a = rep.attempts[i];
    s += std::to_string(i) + "," + fmt(a.r) + "," + fmt(a.eps) + "," +
         (a.miranda_ok ? "1" : "0") + "," + (a.success ? "1" : "0") + ",";
    if (a.miranda_ok)
      s += fmt(a.s_bar) + "," + fmt(a.t_bar) + "," + fmt(a.F_t) + "," + fmt(a.F_s) + "," +
           fmt(a.lambda_u) + "," + fmt(a.lambda_v);
    else
      s += ",,,,,";
    s += "\n";
  }
  return s;
}

bool check_csv_header(const std::string& text, const std::string& kind) {
  std::string want = header(kind);
  return text.size() >= want.size() && text.compare(0, want.size(), want) == 0;
}

std::string json_result(const GroundStateResult& r, const std::string& graph_desc) {
  json j = result_body(r);
  j["kind"] = "result";
  j["version"] = tool_version;
  j["graph"] = graph_desc;
  return j.dump(2) + "\n";
}

std::string json_uniq(const UniquenessReport& rep) {
  json j;
  j["kind"] = "uniq";
  j["version"] = tool_version;
  j["n_runs"] = rep.n_runs;
  j["n_converged"] = rep.n_converged;
  j["n_in_window"] = rep.n_in_window;
  j["n_clusters"] = rep.n_clusters;
  j["inconclusive"] = rep.inconclusive;
  j["threshold"] = rep.threshold;
  j["value_window"] = rep.value_window;
  j["max_intra"] = rep.max_intra;
  j["min_inter"] = rep.min_inter;
  json cl = json::array();
  for (int c = 0; c < rep.n_clusters; ++c) {
    int size = 0;
    for (int l : rep.labels)
      if (l == c) ++size;
    cl.push_back({{"label", c},
                  {"size", size},
                  {"energy", rep.cluster_energy[c]},
                  {"multiplier", rep.cluster_multiplier[c]},
                  {"rep_start", rep.rep_start[c]}});
  }
  j["clusters"] = cl;
  json mem = json::array();
  for (size_t i = 0; i < rep.labels.size(); ++i)
    mem.push_back({{"start", rep.member_start[i]}, {"label", rep.labels[i]}});
  j["members"] = mem;
  return j.dump(2) + "\n";
}

std::string json_nonuniq(const NonuniqReport& rep) {
  json j;
  j["kind"] = "nonuniq";
  j["version"] = tool_version;
  j["success"] = rep.success;
  j["message"] = rep.message;
  j["p"] = rep.p;
  j["mu"] = rep.mu;
  j["N"] = rep.N;
  j["r"] = rep.r;
  j["eps"] = rep.eps;
  j["s_bar"] = rep.s_bar;
  j["t_bar"] = rep.t_bar;
  j["level_R"] = rep.level_R;
  j["target"] = rep.target;
  j["F_t"] = rep.F_t;
  j["F_s"] = rep.F_s;
  j["lambda_u"] = rep.lambda_u;
  j["lambda_v"] = rep.lambda_v;
  j["lambda_w"] = rep.lambda_w;
  j["lambda_soliton"] = rep.lambda_soliton;
  j["t_star"] = rep.t_star;
  json cert;
  cert["f_evals"] = rep.cert.f_evals;
  cert["value_exit"] = rep.cert.value_exit;
  cert["clean_signs"] = rep.cert.clean_signs;
  json chain = json::array();
  for (const auto& r : rep.cert.chain) chain.push_back({r.s1, r.s2, r.t1, r.t2});
  cert["chain"] = chain;
  j["certificate"] = cert;
  json at = json::array();
  for (const auto& a : rep.attempts)
    at.push_back({{"r", a.r},
                  {"eps", a.eps},
                  {"miranda_ok", a.miranda_ok},
                  {"success", a.success},
                  {"s_bar", a.s_bar},
                  {"t_bar", a.t_bar},
                  {"F_t", a.F_t},
                  {"F_s", a.F_s},
                  {"lambda_u", a.lambda_u},
                  {"lambda_v", a.lambda_v},
                  {"failure", a.failure}});
  j["attempts"] = at;
  // failed runs carry empty states; emit null rather than touching them
  j["u"] = rep.u.u.dofs().empty() ? json() : result_body(rep.u);
  j["v"] = rep.v.u.dofs().empty() ? json() : result_body(rep.v);
  return j.dump(2) + "\n";
}

std::string json_manifest(const RunManifest& m) {
  json j;
  j["kind"] = "manifest";
  j["version"] = tool_version;
  j["command"] = m.command;
  j["subcommand"] = m.subcommand;
  j["timestamp"] = m.timestamp;
  json g;
  g["desc"] = m.graph_desc;
  if (!m.graph_json.empty()) g["resolved"] = json::parse(m.graph_json);
  j["graph"] = g;
  j["config"] = config_json(m.config);
  j["seed"] = m.config.seed;
  j["mass"] = m.mass;
  if (!m.mass_grid.empty()) j["mass_grid"] = m.mass_grid;
  json cons;
  cons["kind"] = m.cons.kind == ConstraintSpec::Kind::MassOnly ? "mass_only" : "max_on";
  cons["edge"] = m.cons.edge;
  j["constraint"] = cons;
  if (m.n_target > 0) j["N"] = m.n_target;
  j["outputs"] = m.outputs;
  return j.dump(2) + "\n";
}

namespace {

bool fail(std::string* why, const std::string& msg) {
  if (why) *why = msg;
  return false;
}

bool has(const json& j, const char* key, json::value_t t, std::string* why) {
  if (!j.contains(key)) return fail(why, std::string("missing key '") + key + "'");
  const json& v = j[key];
  bool ok = v.type() == t ||
            (t == json::value_t::number_float && v.is_number()) ||
            (t == json::value_t::number_integer && v.is_number_integer()) ||
            (t == json::value_t::number_unsigned && v.is_number_integer());
  if (!ok) return fail(why, std::string("key '") + key + "' has wrong type");
  return true;
}

}  // namespace

bool validate_json(const std::string& text, const std::string& kind, std::string* why) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    return fail(why, std::string("parse error: ") + e.what());
  }
  if (!j.is_object()) return fail(why, "top level is not an object");
  if (!has(j, "kind", json::value_t::string, why)) return false;
  if (j["kind"] != kind) return fail(why, "kind is '" + j["kind"].get<std::string>() + "'");
  if (!has(j, "version", json::value_t::string, why)) return false;
  auto num = json::value_t::number_float;
  auto integer = json::value_t::number_integer;
  auto boolean = json::value_t::boolean;
  if (kind == "result") {
    for (const char* k : {"energy", "multiplier", "grad_norm", "mass", "sup"})
      if (!has(j, k, num, why)) return false;
    if (!has(j, "iterations", integer, why)) return false;
    if (!has(j, "converged", boolean, why)) return false;
    if (!j.contains("residuals") || !j["residuals"].is_object())
      return fail(why, "missing residuals object");
    for (const char* k : {"kirchhoff", "el_residual", "halfline_mech_max"})
      if (!has(j["residuals"], k, num, why)) return false;
  } else if (kind == "uniq") {
    for (const char* k : {"n_runs", "n_converged", "n_in_window", "n_clusters"})
      if (!has(j, k, integer, why)) return false;
    for (const char* k : {"threshold", "value_window", "max_intra", "min_inter"})
      if (!has(j, k, num, why)) return false;
    if (!has(j, "inconclusive", boolean, why)) return false;
    if (!j.contains("clusters") || !j["clusters"].is_array())
      return fail(why, "missing clusters array");
  } else if (kind == "nonuniq") {
    if (!has(j, "success", boolean, why)) return false;
    for (const char* k : {"mu", "r", "eps", "s_bar", "t_bar", "F_t", "F_s", "lambda_u",
                          "lambda_v", "target", "level_R"})
      if (!has(j, k, num, why)) return false;
    if (!j.contains("certificate") || !j["certificate"].is_object())
      return fail(why, "missing certificate object");
    if (!j.contains("attempts") || !j["attempts"].is_array())
      return fail(why, "missing attempts array");
  } else if (kind == "manifest") {
    for (const char* k : {"command", "subcommand", "timestamp"})
      if (!has(j, k, json::value_t::string, why)) return false;
    if (!j.contains("graph") || !j["graph"].is_object()) return fail(why, "missing graph object");
    if (!j.contains("config") || !j["config"].is_object())
      return fail(why, "missing config object");
    if (!j.contains("outputs") || !j["outputs"].is_array())
      return fail(why, "missing outputs array");
  } else {
    return fail(why, "unknown kind '" + kind + "'");
  }
  return true;
}

std::string iso_timestamp_utc() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw invalid_parameter("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw invalid_parameter("write failed for '" + path + "'");
}

}  // namespace nlsg::io
