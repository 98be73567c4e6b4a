#pragma once

// Exact invariant suites over randomly generated finite instances. Each
// suite counts violations of a deterministic identity; all are pure
// functions of the seed.

#include <cstdint>
#include <string>
#include <vector>

#include "arw/core.hpp"

namespace arw {

struct Instance {
  Configuration sigma;  // window = v plus a one-site halo
  Interval v;
  double lambda = 1.0;
  std::uint64_t source_seed = 0;
};

/// |V| uniform in [1, max_len], up to 3 particles per site (mean 1.5), lone
/// particles asleep with probability 1/2, lambda from {0.5, 1, 2}.
std::vector<Instance> generate_instances(std::uint64_t seed, std::size_t count, std::int64_t max_len = 50);

struct SuiteResult {
  std::string name;
  std::size_t instances = 0;
  std::size_t violations = 0;
  std::size_t capped = 0;
  std::string first_failure;

  bool passed() const { return violations == 0 && capped == 0; }
};

/// All four policies agree on (odometer, final, visited).
SuiteResult check_abelian(const std::vector<Instance>& instances, std::uint64_t cap);
/// Waking the visited set first leaves the odometer unchanged.
SuiteResult check_preemptive(const std::vector<Instance>& instances, std::uint64_t cap);
/// U1 within U2 implies odometer(wake U1) <= odometer(wake U2).
SuiteResult check_monotonicity(const std::vector<Instance>& instances, std::uint64_t seed, std::uint64_t cap);
/// V1 within V2 within V3 implies non-decreasing stabilizing odometers.
SuiteResult check_window_growth(std::uint64_t seed, std::size_t count, std::uint64_t cap);
/// Averages lemma on the three reference sequences at n = 1e5.
SuiteResult check_cesaro();

}  // namespace arw
