#pragma once

#include <string>
#include <vector>

#include "nlsg/experiments.hpp"
#include "nlsg/solver.hpp"

namespace nlsg::io {

inline constexpr const char* tool_name = "nlsg";
inline constexpr const char* tool_version = "1.0.0";
inline constexpr const char* csv_version = "v1";

// 12 significant digits, the precision all CSV payloads are pinned to.
std::string fmt(double x);

// CSV payloads. First line is "# nlsg csv v1 <kind>", second the column
// names; all numbers go through fmt so repeated runs are byte-identical.
std::string csv_solution(const GraphFunction& u);
std::string csv_sweep(const std::vector<SweepRecord>& recs);
std::string csv_uniq(const UniquenessReport& rep);
std::string csv_nonuniq_attempts(const NonuniqReport& rep);

// True when the first line is a well-formed versioned header of that kind.
bool check_csv_header(const std::string& text, const std::string& kind);

// JSON payloads. Keys are emitted sorted, so output is deterministic.
std::string json_result(const GroundStateResult& r, const std::string& graph_desc);
std::string json_uniq(const UniquenessReport& rep);
std::string json_nonuniq(const NonuniqReport& rep);

struct RunManifest {
  std::string command;    // full command line as typed
  std::string subcommand;
  std::string graph_desc; // shorthand or file path
  std::string graph_json; // resolved graph, embedded for reproducibility
  SolverConfig config;
  ConstraintSpec cons = ConstraintSpec::mass_only();
  double mass = 0;
  std::vector<double> mass_grid;
  int n_target = 0;       // nonuniq half-line count
  std::string timestamp;  // informational, excluded from determinism checks
  std::vector<std::string> outputs;
};

std::string json_manifest(const RunManifest& m);

// Structural validation mirroring the schema documents under docs/schema.
// Checks the kind tag, required keys and value types, not full JSON Schema.
bool validate_json(const std::string& text, const std::string& kind, std::string* why = nullptr);

std::string iso_timestamp_utc();
void write_file(const std::string& path, const std::string& content);

}  // namespace nlsg::io
