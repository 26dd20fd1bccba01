#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "qsa/bitkit.hpp"
#include "qsa/channels.hpp"
#include "qsa/rng.hpp"

namespace qsa {

enum class Basis { Z, X };

std::string to_string(Basis basis);
Basis parse_basis(std::string_view text);

struct NoAttack {};

/// Eve measures in-flight qubits and resends the observed eigenstate.
struct InterceptResend {
  Basis basis = Basis::Z;
  /// Probability that a given tuple is intercepted (all of its in-flight
  /// qubits at once).
  double fraction = 1.0;
};

/// A fraction of tuples leave the source as GHZ_{n+1}; Eve keeps the extra
/// qubit and measures it at the end.
struct PhotonNumberSplitting {
  double fraction = 1.0;
  Basis eve_basis = Basis::X;
};

/// Eve replaces every tuple of a third-party source with her own GHZ_{n+1}
/// tuple and keeps one qubit of each.
struct Blinding {
  Basis eve_basis = Basis::X;
};

struct AttackModel {
  std::variant<NoAttack, InterceptResend, PhotonNumberSplitting, Blinding> kind;
  std::uint64_t eve_seed = 0;

  bool active() const { return !std::holds_alternative<NoAttack>(kind); }
  /// PNS and blinding give Eve one qubit slot per tuple.
  bool eve_holds_qubits() const;
  std::string name() const;
  /// Throws std::invalid_argument for fractions outside [0, 1].
  void validate() const;
};

struct InterceptRecord {
  std::size_t tuple;
  std::size_t player;
  bool bit;
};

/// Everything Eve saw in the accepted attempt and how she fared.
struct EveReport {
  std::vector<InterceptRecord> intercepted;
  std::vector<std::size_t> affected_tuples;
  /// y_E, Eve's own register (zero where she held no qubit).
  std::optional<BitString> eve_register;
  std::vector<BitString> broadcasts;
  BitString guess;
  bool success = false;  // guess == s
  bool alice_corrupted = false;
  /// a xor y_E xor y_{n-2} xor ... xor y_0 == s.
  std::optional<bool> extended_parity;
  /// Outcome of the guess that exploits the all-zero restart rule.
  bool restart_aware_success = false;
  /// Outcome of the guess that also strips Eve's intercepted agent bits
  /// from the broadcasts.
  bool informed_success = false;

  /// Intercepted bits in interception order, or nullopt when none.
  std::optional<BitString> intercepted_bits() const;
};

/// The channel-side half of an attack: acts on qubits in flight and
/// remembers what it did.
class AttackHook : public AdversaryHook {
 public:
  const std::vector<std::size_t>& affected_tuples() const { return affected_; }
  const std::vector<InterceptRecord>& intercepted() const { return intercepted_; }
  /// Basis Eve uses for the qubits she holds until the end.
  virtual Basis held_qubit_basis() const { return Basis::X; }

 protected:
  std::vector<std::size_t> affected_;
  std::vector<InterceptRecord> intercepted_;
};

/// Hook for `model` in an n-player game. Returns nullptr for NoAttack.
std::unique_ptr<AttackHook> make_attack_hook(const AttackModel& model, std::size_t n,
                                             StreamRng eve_rng);

/// XOR of the broadcasts: Eve's guess if she assumes a = 0. With nothing
/// observed she guesses uniformly at random.
BitString eve_passive_guess(std::span<const BitString> broadcasts, std::size_t m, StreamRng& rng);

/// Uses that Alice never accepts a = 0: XOR of the broadcasts masked with a
/// uniformly chosen nonzero a. Succeeds with probability 1/(2^m - 1).
BitString eve_restart_aware_guess(std::span<const BitString> broadcasts, std::size_t m,
                                  StreamRng& rng);

/// XOR of the broadcasts with every intercepted agent bit (player < agents)
/// XORed out at its tuple position. Under full X-basis interception the
/// broadcasts are y_i = b_i xor s_i, so this recovers s exactly.
BitString eve_informed_guess(std::span<const BitString> broadcasts,
                             std::span<const InterceptRecord> intercepted, std::size_t agents,
                             std::size_t m, StreamRng& rng);

}  // namespace qsa
