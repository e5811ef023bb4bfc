#pragma once

// Randomized property checks shared by the unit tests and the acceptance
// runner. Each check builds one random instance from `seed` and returns an
// empty string on success, or a description of the first violation.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace oscid::testing {

std::string conjugate_closure(std::uint64_t seed);
std::string hankel_structure(std::uint64_t seed);
std::string screening_brute_force(std::uint64_t seed);
std::string level_additivity(std::uint64_t seed);
std::string continuous_round_trip(std::uint64_t seed);
std::string ic_gauge_invariance(std::uint64_t seed);
std::string output_byte_stability(std::uint64_t seed);

struct PropertySuite {
  std::string name;
  std::function<std::string(std::uint64_t)> check;
};

const std::vector<PropertySuite>& property_suites();

struct SuiteOutcome {
  int cases = 0;
  int failures = 0;
  std::string first_failure;
};

SuiteOutcome run_suite(const PropertySuite& suite, int cases, std::uint64_t base_seed = 1);

}  // namespace oscid::testing
