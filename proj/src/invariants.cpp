#include "qsa/invariants.hpp"

#include <cmath>
#include <numbers>

#include "qsa/protocol.hpp"
#include "qsa/qstate.hpp"

namespace qsa {

namespace {

std::size_t ceil_lg(std::size_t n) {
  std::size_t layers = 0;
  while ((std::size_t{1} << layers) < n) {
    ++layers;
  }
  return layers;
}

QuantumState minus_state() {
  QuantumState q(1, 1);
  q.apply_hadamard(0);
  return q;
}

}  // namespace

CheckResult check_ghz_amplitudes(std::size_t max_n) {
  const double amp = 1.0 / std::numbers::sqrt2;
  for (std::size_t n = 1; n <= max_n; ++n) {
    if (ghz_schedule(n).cnot_layer_count() != ceil_lg(n)) {
      return {"ghz_amplitudes", false, "n=" + std::to_string(n) + ": wrong CNOT layer count"};
    }
    auto state = prepare_ghz(n);
    const std::uint64_t top = state.dimension() - 1;
    for (std::uint64_t i = 0; i < state.dimension(); ++i) {
      const double want = (i == 0 || i == top) ? amp : 0.0;
      if (std::abs(state.amplitude(i) - Amplitude(want, 0.0)) > 1e-12) {
        return {"ghz_amplitudes", false,
                "n=" + std::to_string(n) + ": amplitude " + std::to_string(i) + " off"};
      }
    }
  }
  return {"ghz_amplitudes", true, "n=1.." + std::to_string(max_n)};
}

CheckResult check_oracle_reduction(std::size_t max_m) {
  std::size_t cases = 0;
  for (std::size_t m = 1; m <= max_m; ++m) {
    QuantumState reg(m);
    for (std::size_t q = 0; q < m; ++q) {
      reg.apply_hadamard(q);
    }
    std::vector<std::size_t> qubits(m);
    for (std::size_t q = 0; q < m; ++q) {
      qubits[q] = q;
    }
    for (std::uint64_t k = 0; k < (std::uint64_t{1} << m); ++k) {
      const auto key = BitString::from_uint(k, m);
      auto explicit_path = QuantumState::tensor(minus_state(), reg);
      explicit_path.apply_oracle_explicit(key, qubits, m);
      auto phase_only = reg;
      phase_only.apply_phase_oracle(key, qubits);
      if (!equal_up_to_global_phase(explicit_path, QuantumState::tensor(minus_state(), phase_only), 1e-12)) {
        return {"oracle_reduction", false, "m=" + std::to_string(m) + " key=" + key.to_string()};
      }
      ++cases;
    }
  }
  return {"oracle_reduction", true, std::to_string(cases) + " keys"};
}

CheckResult check_tensor_identity(std::size_t max_n, std::size_t max_m) {
  for (std::size_t n = 1; n <= max_n; ++n) {
    for (std::size_t m = 1; m <= max_m; ++m) {
      auto grown = prepare_ghz_tuples(n, m + 1);
      auto combined = QuantumState::tensor(prepare_ghz(n), prepare_ghz_tuples(n, m));
      // register-major: the new tuple is the last qubit of every register
      std::vector<std::size_t> position(n * (m + 1));
      for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t j = 0; j < m; ++j) {
          position[p * m + j] = p * (m + 1) + j;
        }
        position[n * m + p] = p * (m + 1) + m;
      }
      auto reordered = combined.permuted(position);
      for (std::uint64_t i = 0; i < grown.dimension(); ++i) {
        if (std::abs(grown.amplitude(i) - reordered.amplitude(i)) > 1e-12) {
          return {"tensor_identity", false, "n=" + std::to_string(n) + " m=" + std::to_string(m)};
        }
      }
    }
  }
  return {"tensor_identity", true, "n<=" + std::to_string(max_n) + " m<=" + std::to_string(max_m)};
}

CheckResult check_engine_equivalence(std::size_t n, std::size_t max_m) {
  std::size_t cases = 0;
  for (std::size_t m = 1; m <= max_m; ++m) {
    for (std::uint64_t sv = 0; sv < (std::uint64_t{1} << m); ++sv) {
      const auto s = BitString::from_uint(sv, m);
      ProtocolConfig cfg;
      cfg.n = n;
      // agent 0 holds the whole secret, the others hold zero keys
      std::vector<BitString> keys(n - 1, BitString::zeros(m));
      keys[0] = s;
      cfg.oracle_keys = keys;
      const auto dense = dense_outcome_distribution(cfg);
      const auto exact = factorized_outcome_distribution(n, s);
      bool same = dense.size() == exact.numerators.size();
      for (const auto& [outcome, p] : dense) {
        auto it = exact.numerators.find(outcome);
        const double scaled = p * static_cast<double>(exact.denominator);
        same = same && it != exact.numerators.end() && std::abs(scaled - std::round(scaled)) < 1e-9 &&
               static_cast<std::uint64_t>(std::llround(scaled)) == it->second;
      }
      if (!same) {
        return {"engine_equivalence", false, "n=" + std::to_string(n) + " s=" + s.to_string()};
      }
      ++cases;
    }
  }
  return {"engine_equivalence", true, "n=" + std::to_string(n) + ", " + std::to_string(cases) + " secrets"};
}

std::vector<CheckResult> run_invariant_suite() {
  return {check_ghz_amplitudes(12), check_oracle_reduction(3), check_tensor_identity(3, 2),
          check_engine_equivalence(3, 3), check_engine_equivalence(4, 2)};
}

}  // namespace qsa
