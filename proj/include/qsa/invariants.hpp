#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace qsa {

struct CheckResult {
  std::string name;
  bool pass;
  std::string detail;
};

/// GHZ_n from the schedule equals (|0..0> + |1..1>)/sqrt(2) within 1e-12
/// and uses ceil(lg n) CNOT layers, for n = 1..max_n.
CheckResult check_ghz_amplitudes(std::size_t max_n);

/// Explicit oracle on an output qubit in |-> equals the phase oracle up to
/// global phase, for every key of every length 1..max_m.
CheckResult check_oracle_reduction(std::size_t max_m);

/// m + 1 GHZ_n tuples equal m tuples tensored with one more, amplitude for
/// amplitude, for n <= max_n and m <= max_m.
CheckResult check_tensor_identity(std::size_t max_n, std::size_t max_m);

/// Exact dense outcome distribution equals the analytic factorized one for
/// n players and every secret of length 1..max_m.
CheckResult check_engine_equivalence(std::size_t n, std::size_t max_m);

/// The whole suite with the default sizes.
std::vector<CheckResult> run_invariant_suite();

}  // namespace qsa
