#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qsa/bitkit.hpp"
#include "qsa/qstate.hpp"
#include "qsa/rng.hpp"

namespace qsa {

// Player numbering for an n-player game: agents are 0..n-2, Alice is n-1
// and an eavesdropper holding qubits is n.
inline std::size_t alice_index(std::size_t n) { return n - 1; }
inline std::size_t eve_index(std::size_t n) { return n; }
std::string player_name(std::size_t player, std::size_t n);

/// Broken protocol bookkeeping, e.g. a qubit delivered twice.
class ProtocolIntegrityError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct ChannelEvent {
  enum class Kind {
    Emitted,      // source created a GHZ tuple
    Kept,         // the source's own qubit, never in transit
    Delivered,
    Intercepted,  // measured in flight by Eve
    Resent,
    Split,        // Eve took an extra entangled copy
    Destroyed,
    Substituted,
    Broadcast,
  };
  Kind kind;
  std::size_t tuple = 0;
  std::size_t player = 0;
  std::string detail;
};

std::string to_string(ChannelEvent::Kind kind);

/// One qubit of one tuple on its way to `recipient`. `qubit` addresses the
/// qubit inside the simulated state that carries it.
struct QuantumEnvelope {
  std::size_t tuple;
  std::size_t recipient;
  std::size_t qubit;
};

/// What an in-flight hook can see and touch.
struct TransitContext {
  QuantumState& state;
  /// Qubits of the envelope's tuple, indexed by player.
  std::span<const std::size_t> tuple_qubits;
  /// Eve's slot for this tuple, when the attack gives her one.
  std::optional<std::size_t> eve_qubit;
  /// Measurement randomness.
  StreamRng& nature;
  std::vector<ChannelEvent>& events;
};

class AdversaryHook {
 public:
  virtual ~AdversaryHook() = default;
  virtual void on_transit(const QuantumEnvelope& envelope, TransitContext& ctx) = 0;
};

/// Lossless, synchronous quantum channel for one run. Each
/// (tuple, recipient) pair may be delivered once.
class QuantumChannel {
 public:
  struct Transit {
    QuantumState* state = nullptr;
    std::span<const std::size_t> tuple_qubits;
    std::optional<std::size_t> eve_qubit;
    StreamRng* nature = nullptr;
  };

  QuantumChannel(std::size_t tuples, std::size_t players);

  /// Runs `hook` (if any) on the envelope and records the delivery. The
  /// hook needs `transit.state`; without a hook the state is untouched.
  void deliver(const QuantumEnvelope& envelope, AdversaryHook* hook, const Transit& transit);
  /// The source keeps its own qubit; recorded but never exposed to hooks.
  void keep(std::size_t tuple, std::size_t player);
  void record(ChannelEvent event) { events_.push_back(std::move(event)); }

  bool delivered(std::size_t tuple, std::size_t player) const;
  std::size_t delivered_count() const;
  const std::vector<ChannelEvent>& events() const { return events_; }
  std::vector<ChannelEvent> take_events() { return std::move(events_); }

 private:
  void claim(std::size_t tuple, std::size_t player);

  std::size_t tuples_;
  std::size_t players_;
  std::vector<bool> delivered_;
  std::vector<ChannelEvent> events_;
};

struct ClassicalMessage {
  std::size_t sender;
  BitString payload;
};

/// Public, append-only broadcast log. Everyone, Eve included, reads it.
class ClassicalChannel {
 public:
  explicit ClassicalChannel(std::size_t payload_length) : payload_length_(payload_length) {}

  void broadcast(ClassicalMessage message);
  std::span<const ClassicalMessage> log() const { return log_; }
  std::vector<BitString> payloads() const;

 private:
  std::size_t payload_length_;
  std::vector<ClassicalMessage> log_;
};

}  // namespace qsa
