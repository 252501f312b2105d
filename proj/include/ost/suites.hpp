#ifndef OST_SUITES_HPP
#define OST_SUITES_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace ost {

struct SuiteReport {
  std::string suite;
  int cases = 0;
  int failures = 0;
  std::string counterexample;  // first, shrunk when possible
};

std::vector<std::string> suite_names();

// Runs one of: synth, subject-reduction, error-freeness, congruence,
// roundtrip. Deterministic in (name, n, seed, max_depth).
SuiteReport run_suite(const std::string& name, int n, uint64_t seed, int max_depth);

}  // namespace ost

#endif
