#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "qsa/attack_model.hpp"
#include "qsa/bitkit.hpp"
#include "qsa/channels.hpp"
#include "qsa/qstate.hpp"

namespace qsa {

enum class Engine { Dense, Factorized };
enum class Source { Spymaster, TrustedThirdParty };

std::string to_string(Engine engine);
std::string to_string(Source source);
Engine parse_engine(std::string_view text);
Source parse_source(std::string_view text);

/// Invalid game configuration (bad n, layout/key mismatch, attack not
/// applicable to the chosen source, dense state too large).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Alice drew a = 0 on every allowed attempt.
class RestartsExhaustedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProtocolConfig {
  std::size_t n = 3;  // Alice plus n-1 agents
  KeyLayout layout{{2, 2}};
  /// Partial keys in agent order; nullopt draws them uniformly from the
  /// configuration's key stream (same keys for every shot of a seed).
  std::optional<std::vector<BitString>> partial_keys;
  /// Agents' m-bit oracle keys given directly, bypassing layout and partial
  /// keys. Supports may overlap, so m < n-1 becomes expressible.
  std::optional<std::vector<BitString>> oracle_keys;
  Source source = Source::Spymaster;
  Engine engine = Engine::Dense;
  std::uint64_t seed = 0;
  std::size_t max_restarts = 64;
  std::size_t dense_limit = kDefaultDenseLimit;

  std::size_t m() const { return oracle_keys ? oracle_keys->front().size() : layout.total_length(); }
  void validate() const;
  /// Also checks the attack against this configuration.
  void validate(const AttackModel& attack) const;
};

/// Explicit keys, or the keys drawn for `config.seed`.
std::vector<BitString> resolve_partial_keys(const ProtocolConfig& config);
/// The m-bit key each agent's oracle uses: the extended partial keys, or
/// `oracle_keys` when given.
std::vector<BitString> resolve_oracle_keys(const ProtocolConfig& config);
/// n-1 uniformly random m-bit oracle keys from the key stream of `seed`.
std::vector<BitString> random_oracle_keys(std::size_t n, std::size_t m, std::uint64_t seed);

struct PhaseMarker {
  std::string phase;                     // psi0 .. psi4
  std::optional<std::uint64_t> digest;   // amplitude digest (state-vector paths only)
};

/// Measurements of one attempt; attempts with a = 0 are discarded.
struct Attempt {
  BitString a;
  std::vector<BitString> ys;  // ys[i] belongs to agent i
  std::optional<BitString> eve_register;
};

struct Transcript {
  // configuration echo
  std::size_t n;
  std::size_t key_bits;
  std::optional<KeyLayout> layout;  // nullopt for direct oracle keys
  Source source;
  Engine engine;
  std::uint64_t seed;
  std::uint64_t shot;
  std::size_t max_restarts;
  std::string attack;
  BitString secret;

  std::vector<PhaseMarker> phases;
  std::vector<ChannelEvent> events;
  std::vector<Attempt> attempts;  // last one is the accepted attempt
  BitString a;
  std::vector<BitString> ys;
  std::vector<ClassicalMessage> broadcasts;
  BitString reconstructed;
  std::size_t restarts;
  std::vector<EveReport> attack_events;

  std::size_t m() const { return key_bits; }
  /// a || y_{n-2} || ... || y_0 of the given attempt.
  BitString joint_outcome(std::size_t attempt) const;
};

/// Plays one full game. The dense engine simulates every qubit in one state
/// vector; the factorized engine handles each tuple separately.
Transcript run_protocol(const ProtocolConfig& config, const AttackModel& attack = {},
                        std::uint64_t shot = 0);

/// Tuple-by-tuple engine. Attack-free games sample each position directly
/// from the parity-constrained uniform distribution; attacked games run a
/// small state vector per tuple so the channel hooks still apply.
Transcript run_factorized(const ProtocolConfig& config, const AttackModel& attack = {},
                          std::uint64_t shot = 0);

/// a xor y_{n-2} xor ... xor y_0 == s for the accepted attempt.
bool fcp_holds(const Transcript& transcript, const BitString& s);

/// Exact joint outcome probabilities of one attempt (before the restart
/// rule), read off the final dense state. Keys are [y_E ||] a || y_{n-2} ||
/// ... || y_0. Only deterministic attacks are supported: none, PNS with
/// fraction 0 or 1, and blinding.
std::map<BitString, double> dense_outcome_distribution(const ProtocolConfig& config,
                                                       const AttackModel& attack = {});

struct RationalDistribution {
  std::uint64_t denominator;
  std::map<BitString, std::uint64_t> numerators;
};

/// Analytic attack-free distribution: every parity-valid joint outcome has
/// probability 2^{-m(n-1)}.
RationalDistribution factorized_outcome_distribution(std::size_t n, const BitString& s);

/// True if a || y_{n-2} || ... || y_0 satisfies the correlation constraint.
bool parity_valid(const BitString& joint, std::size_t n, const BitString& s);

/// State after the oracles with every agent's output qubit allocated
/// explicitly (set to |1>, Hadamard, U_f). Output qubit of agent i is
/// qubit n*m + i.
QuantumState explicit_output_state(const ProtocolConfig& config);
/// Same stage on the reduced path with output qubits left out.
QuantumState phase_reduced_state(const ProtocolConfig& config);

nlohmann::ordered_json to_json(const Transcript& transcript);
nlohmann::ordered_json to_json(const EveReport& report);

}  // namespace qsa
