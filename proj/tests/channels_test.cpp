#include "qsa/attack_model.hpp"
#include "qsa/channels.hpp"

#include <gtest/gtest.h>

using namespace qsa;

namespace {

class FlipHook : public AdversaryHook {
 public:
  void on_transit(const QuantumEnvelope& env, TransitContext& ctx) override {
    ctx.state.apply_x(env.qubit);
    ++calls;
  }
  int calls = 0;
};

}  // namespace

TEST(QuantumChannel, delivery_without_adversary_leaves_state_alone) {
  auto state = prepare_ghz(3);
  const std::vector<Amplitude> before(state.amplitudes().begin(), state.amplitudes().end());
  QuantumChannel channel(1, 3);
  std::size_t tuple[] = {0, 1, 2};
  StreamRng nature(1);
  for (std::size_t p = 0; p < 3; ++p) {
    channel.deliver({0, p, p}, nullptr, {&state, tuple, std::nullopt, &nature});
  }
  EXPECT_EQ(std::vector<Amplitude>(state.amplitudes().begin(), state.amplitudes().end()), before);
  EXPECT_EQ(channel.delivered_count(), 3u);
  EXPECT_EQ(nature.position(), 0u);
}

TEST(QuantumChannel, double_delivery_is_an_integrity_error) {
  QuantumChannel channel(2, 3);
  channel.deliver({1, 0, 0}, nullptr, {});
  EXPECT_TRUE(channel.delivered(1, 0));
  EXPECT_FALSE(channel.delivered(0, 0));
  EXPECT_THROW(channel.deliver({1, 0, 0}, nullptr, {}), ProtocolIntegrityError);
  channel.keep(0, 2);
  EXPECT_THROW(channel.keep(0, 2), ProtocolIntegrityError);
  EXPECT_THROW(channel.deliver({0, 2, 0}, nullptr, {}), ProtocolIntegrityError);
}

TEST(QuantumChannel, out_of_range_envelope_rejected) {
  QuantumChannel channel(2, 3);
  EXPECT_THROW(channel.deliver({2, 0, 0}, nullptr, {}), ProtocolIntegrityError);
  EXPECT_THROW(channel.deliver({0, 3, 0}, nullptr, {}), ProtocolIntegrityError);
}

TEST(QuantumChannel, hook_acts_before_delivery_is_logged) {
  QuantumState state(2);
  QuantumChannel channel(1, 2);
  FlipHook hook;
  std::size_t tuple[] = {0, 1};
  StreamRng nature(1);
  channel.deliver({0, 1, 1}, &hook, {&state, tuple, std::nullopt, &nature});
  EXPECT_EQ(hook.calls, 1);
  EXPECT_DOUBLE_EQ(std::norm(state.amplitude(0b10)), 1.0);
  ASSERT_EQ(channel.events().size(), 1u);
  EXPECT_EQ(channel.events()[0].kind, ChannelEvent::Kind::Delivered);
  EXPECT_THROW(channel.deliver({0, 0, 0}, &hook, {}), ProtocolIntegrityError);
}

TEST(QuantumChannel, intercept_hook_measures_and_resends) {
  // GHZ_3 with player 2 kept at the source; Eve intercepts everything.
  auto state = prepare_ghz(3);
  QuantumChannel channel(1, 3);
  auto hook = make_attack_hook({InterceptResend{}, 9}, 3, StreamRng(9));
  std::size_t tuple[] = {0, 1, 2};
  StreamRng nature(4);
  channel.keep(0, 2);
  channel.deliver({0, 0, 0}, hook.get(), {&state, tuple, std::nullopt, &nature});
  channel.deliver({0, 1, 1}, hook.get(), {&state, tuple, std::nullopt, &nature});
  ASSERT_EQ(hook->intercepted().size(), 2u);
  const bool bit = hook->intercepted()[0].bit;
  EXPECT_EQ(hook->intercepted()[1].bit, bit);
  // collapsed onto |000> or |111>
  EXPECT_NEAR(std::norm(state.amplitude(bit ? 7 : 0)), 1.0, 1e-12);
  std::size_t intercepted = 0;
  std::size_t resent = 0;
  for (const auto& e : channel.events()) {
    intercepted += e.kind == ChannelEvent::Kind::Intercepted;
    resent += e.kind == ChannelEvent::Kind::Resent;
  }
  EXPECT_EQ(intercepted, 2u);
  EXPECT_EQ(resent, 2u);
}

TEST(QuantumChannel, blinding_hook_substitutes_extended_tuple) {
  auto state = QuantumState::tensor(QuantumState(1), prepare_ghz(3));
  QuantumChannel channel(1, 3);
  auto hook = make_attack_hook({Blinding{}, 2}, 3, StreamRng(2));
  std::size_t tuple[] = {0, 1, 2};
  StreamRng nature(7);
  for (std::size_t p = 0; p < 3; ++p) {
    channel.deliver({0, p, p}, hook.get(), {&state, tuple, std::size_t{3}, &nature});
  }
  auto expected = prepare_ghz(4);
  EXPECT_TRUE(equal_up_to_global_phase(state, expected, 1e-12));
  EXPECT_EQ(hook->affected_tuples(), std::vector<std::size_t>{0});
  bool destroyed = false;
  bool substituted = false;
  for (const auto& e : channel.events()) {
    destroyed = destroyed || e.kind == ChannelEvent::Kind::Destroyed;
    substituted = substituted || e.kind == ChannelEvent::Kind::Substituted;
  }
  EXPECT_TRUE(destroyed);
  EXPECT_TRUE(substituted);
}

TEST(QuantumChannel, pns_hook_extends_ghz) {
  auto state = QuantumState::tensor(QuantumState(1), prepare_ghz(3));
  QuantumChannel channel(1, 3);
  auto hook = make_attack_hook({PhotonNumberSplitting{}, 2}, 3, StreamRng(2));
  std::size_t tuple[] = {0, 1, 2};
  StreamRng nature(7);
  channel.keep(0, 2);
  channel.deliver({0, 0, 0}, hook.get(), {&state, tuple, std::size_t{3}, &nature});
  channel.deliver({0, 1, 1}, hook.get(), {&state, tuple, std::size_t{3}, &nature});
  EXPECT_TRUE(equal_up_to_global_phase(state, prepare_ghz(4), 1e-12));
  EXPECT_EQ(nature.position(), 0u);
}

TEST(ClassicalChannel, broadcasts_are_public_and_ordered) {
  ClassicalChannel channel(4);
  channel.broadcast({0, BitString::parse("1010")});
  channel.broadcast({1, BitString::parse("0101")});
  ASSERT_EQ(channel.log().size(), 2u);
  EXPECT_EQ(channel.log()[0].sender, 0u);
  EXPECT_EQ(channel.log()[1].sender, 1u);
  // Eve's view is the same log
  auto seen = channel.payloads();
  EXPECT_EQ(seen[0], BitString::parse("1010"));
  EXPECT_EQ(seen[1], BitString::parse("0101"));
  // with a = 0110 Alice recovers s
  EXPECT_EQ(reconstruct_secret(BitString::parse("0110"), seen), BitString::parse("1001"));
}

TEST(ClassicalChannel, payload_length_enforced) {
  ClassicalChannel channel(4);
  EXPECT_THROW(channel.broadcast({0, BitString::parse("101")}), std::invalid_argument);
  EXPECT_TRUE(channel.log().empty());
}

TEST(Players, names) {
  EXPECT_EQ(player_name(0, 3), "agent0");
  EXPECT_EQ(player_name(2, 3), "alice");
  EXPECT_EQ(player_name(3, 3), "eve");
}
