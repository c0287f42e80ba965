#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace nlsg {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Property suites behind the verify subcommand.  Each check samples or
// evaluates a structural identity and reports the worst deviation seen.
std::vector<CheckResult> verify_rearrange(std::uint64_t seed = 20240901ull);
std::vector<CheckResult> verify_analytic();
std::vector<CheckResult> verify_solver(std::uint64_t seed = 20240902ull);

// name in {rearrange, analytic, solver, all}
std::vector<CheckResult> verify_suite(const std::string& name);

}  // namespace nlsg
