#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ptspec/ode.hpp"

namespace ptspec {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct VerifyOptions {
  std::string suite = "quick";  // quick: the eleven acceptance criteria; full: plus sweep invariants
  std::uint64_t seed = 20240917;
  std::string out_dir = ".";    // sweep CSV / JSON artifacts
  IntegratorConfig integ;
  std::vector<int> only;        // restrict to these criterion ids (empty: all)
  std::function<void(const CriterionResult&)> on_result;  // called as each criterion finishes
};

std::vector<CriterionResult> run_acceptance(const VerifyOptions& opt);

}  // namespace ptspec
