#include <cstdlib>
#include <iostream>

#include "ptspec/verify.hpp"

// One line per acceptance criterion; exit status 1 if any fails.
int main(int argc, char** argv) {
  ptspec::VerifyOptions opt;
  opt.out_dir = argc > 1 ? argv[1] : "acceptance_artifacts";
  if (const char* only = std::getenv("PTSPEC_ONLY")) opt.only.push_back(std::atoi(only));
  opt.on_result = [](const ptspec::CriterionResult& r) {
    std::cout << "acceptance " << r.id << ": " << (r.pass ? "PASS" : "FAIL") << " - " << r.name << " ("
              << static_cast<long>(r.seconds + 0.5) << " s) " << r.detail << std::endl;
  };
  bool all = true;
  for (const auto& r : ptspec::run_acceptance(opt)) all = all && r.pass;
  return all ? 0 : 1;
}
