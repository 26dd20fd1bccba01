#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qsa/bitkit.hpp"
#include "qsa/rng.hpp"

namespace qsa {

using Amplitude = std::complex<double>;

inline constexpr std::size_t kDefaultDenseLimit = 24;
inline constexpr double kNormTolerance = 1e-10;
inline constexpr double kMeasureNormTolerance = 1e-6;
inline constexpr double kDumpThreshold = 1e-12;

/// Raised when the simulated state has drifted away from unit norm. The
/// engine never renormalizes on its own.
class StateCorruptionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Gate {
  enum class Kind { Hadamard, Cnot };
  Kind kind;
  std::size_t target;
  std::size_t control = 0;  // CNOT only

  static Gate h(std::size_t target) { return {Kind::Hadamard, target, 0}; }
  static Gate cnot(std::size_t control, std::size_t target) { return {Kind::Cnot, target, control}; }
  friend bool operator==(const Gate&, const Gate&) = default;
};

/// Gates grouped into time slices; the gates inside one layer touch
/// disjoint qubits and could run in parallel.
struct CircuitSchedule {
  std::vector<std::vector<Gate>> layers;

  std::size_t cnot_layer_count() const;
  std::size_t qubit_span() const;  // 1 + highest qubit index used
  /// True when no qubit appears twice within a layer.
  bool layers_disjoint() const;
  /// Same schedule with logical qubit q replaced by physical[q].
  CircuitSchedule remapped(std::span<const std::size_t> physical) const;
};

/// One H on qubit 0, then doubling CNOT layers: in layer t every qubit
/// already entangled (indices below 2^(t-1)) fans out to one new qubit.
/// Produces ceil(lg n) CNOT layers.
CircuitSchedule ghz_schedule(std::size_t n);

struct AmplitudeEntry {
  std::uint64_t index;
  double real;
  double imag;
};

/// Dense state vector over k qubits. Qubit q is bit q of the basis index.
class QuantumState {
 public:
  /// Basis state |basis> over `num_qubits` qubits.
  explicit QuantumState(std::size_t num_qubits, std::uint64_t basis = 0,
                        std::size_t dense_limit = kDefaultDenseLimit);
  /// Wraps explicit amplitudes; size must be a power of two and the vector
  /// must be normalized within kNormTolerance.
  static QuantumState from_amplitudes(std::vector<Amplitude> amplitudes);
  /// |high> (x) |low>: `low` occupies the low qubit indices.
  static QuantumState tensor(const QuantumState& high, const QuantumState& low);

  std::size_t num_qubits() const { return num_qubits_; }
  std::size_t dimension() const { return amplitudes_.size(); }
  std::span<const Amplitude> amplitudes() const { return amplitudes_; }
  Amplitude amplitude(std::uint64_t index) const { return amplitudes_.at(index); }

  double norm_squared() const;
  /// Throws StateCorruptionError if |norm^2 - 1| exceeds `tolerance`.
  void check_norm(double tolerance = kNormTolerance) const;

  void apply_hadamard(std::size_t target);
  void apply_x(std::size_t target);
  void apply_cnot(std::size_t control, std::size_t target);
  void apply(const Gate& gate);
  /// Runs every layer and checks the norm after each one.
  void run(const CircuitSchedule& schedule);

  /// Multiplies the amplitude of each basis index by (-1)^(key . x), where x
  /// is read from `reg` (reg[j] holds bit j of x). This is the net action of
  /// U_f on an output qubit prepared in |->, with that qubit left out.
  void apply_phase_oracle(const BitString& key, std::span<const std::size_t> reg);
  /// |y>|x> -> |y xor key.x>|x> on an explicit output qubit.
  void apply_oracle_explicit(const BitString& key, std::span<const std::size_t> reg,
                             std::size_t output_qubit);

  /// Samples a full basis outcome; bit q of the result is qubit q. The
  /// state itself is left untouched.
  BitString measure_all(StreamRng& rng) const;
  /// Measures `targets` jointly, collapses and renormalizes the state.
  /// Bit t of the result is the outcome of qubit targets[t].
  BitString measure_subset(std::span<const std::size_t> targets, StreamRng& rng);

  /// Reorders qubits: old qubit q becomes qubit new_position[q].
  QuantumState permuted(std::span<const std::size_t> new_position) const;

  std::vector<double> probabilities() const;
  /// Nonzero amplitudes (magnitude above `threshold`) in index order.
  std::vector<AmplitudeEntry> dump(double threshold = kDumpThreshold) const;
  /// Order-sensitive digest of the amplitudes rounded to 1e-9.
  std::uint64_t digest() const;

 private:
  QuantumState() = default;
  void check_qubit(std::size_t q) const;
  std::uint64_t register_mask(const BitString& key, std::span<const std::size_t> reg) const;

  std::size_t num_qubits_ = 0;
  std::vector<Amplitude> amplitudes_;
};

/// (|0...0> + |1...1>)/sqrt(2) built by running ghz_schedule(n).
QuantumState prepare_ghz(std::size_t n, std::size_t dense_limit = kDefaultDenseLimit);

/// m independent GHZ_n tuples in register-major layout: player p's
/// register holds qubits p*m .. p*m + m-1, and tuple j consists of qubit j
/// of every register.
QuantumState prepare_ghz_tuples(std::size_t n, std::size_t m,
                                std::size_t dense_limit = kDefaultDenseLimit);

/// True if the two states agree up to a global phase within `tolerance`.
bool equal_up_to_global_phase(const QuantumState& a, const QuantumState& b,
                              double tolerance = 1e-12);

}  // namespace qsa
