#include "qsa/channels.hpp"

namespace qsa {

std::string player_name(std::size_t player, std::size_t n) {
  if (player == alice_index(n)) {
    return "alice";
  }
  if (player == eve_index(n)) {
    return "eve";
  }
  return "agent" + std::to_string(player);
}

std::string to_string(ChannelEvent::Kind kind) {
  switch (kind) {
    case ChannelEvent::Kind::Emitted:
      return "emitted";
    case ChannelEvent::Kind::Kept:
      return "kept";
    case ChannelEvent::Kind::Delivered:
      return "delivered";
    case ChannelEvent::Kind::Intercepted:
      return "intercepted";
    case ChannelEvent::Kind::Resent:
      return "resent";
    case ChannelEvent::Kind::Split:
      return "split";
    case ChannelEvent::Kind::Destroyed:
      return "destroyed";
    case ChannelEvent::Kind::Substituted:
      return "substituted";
    case ChannelEvent::Kind::Broadcast:
      return "broadcast";
  }
  return "unknown";
}

QuantumChannel::QuantumChannel(std::size_t tuples, std::size_t players)
    : tuples_(tuples), players_(players), delivered_(tuples * players, false) {}

void QuantumChannel::claim(std::size_t tuple, std::size_t player) {
  if (tuple >= tuples_ || player >= players_) {
    throw ProtocolIntegrityError("envelope (tuple " + std::to_string(tuple) + ", player " +
                                 std::to_string(player) + ") outside the channel's range");
  }
  const std::size_t slot = tuple * players_ + player;
  if (delivered_[slot]) {
    throw ProtocolIntegrityError("tuple " + std::to_string(tuple) + " already delivered to player " +
                                 std::to_string(player));
  }
  delivered_[slot] = true;
}

void QuantumChannel::deliver(const QuantumEnvelope& envelope, AdversaryHook* hook,
                             const Transit& transit) {
  claim(envelope.tuple, envelope.recipient);
  if (hook != nullptr) {
    if (transit.state == nullptr || transit.nature == nullptr) {
      throw ProtocolIntegrityError("adversary hook needs the in-flight state");
    }
    TransitContext ctx{*transit.state, transit.tuple_qubits, transit.eve_qubit, *transit.nature,
                       events_};
    hook->on_transit(envelope, ctx);
  }
  events_.push_back({ChannelEvent::Kind::Delivered, envelope.tuple, envelope.recipient, {}});
}

void QuantumChannel::keep(std::size_t tuple, std::size_t player) {
  claim(tuple, player);
  events_.push_back({ChannelEvent::Kind::Kept, tuple, player, {}});
}

bool QuantumChannel::delivered(std::size_t tuple, std::size_t player) const {
  return delivered_.at(tuple * players_ + player);
}

std::size_t QuantumChannel::delivered_count() const {
  std::size_t count = 0;
  for (bool d : delivered_) {
    count += d;
  }
  return count;
}

void ClassicalChannel::broadcast(ClassicalMessage message) {
  if (message.payload.size() != payload_length_) {
    throw std::invalid_argument("broadcast payload has " + std::to_string(message.payload.size()) +
                                " bits, expected " + std::to_string(payload_length_));
  }
  log_.push_back(std::move(message));
}

std::vector<BitString> ClassicalChannel::payloads() const {
  std::vector<BitString> out;
  out.reserve(log_.size());
  for (const auto& msg : log_) {
    out.push_back(msg.payload);
  }
  return out;
}

}  // namespace qsa
