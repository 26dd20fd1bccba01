#include "qsa/attack_model.hpp"

#include <algorithm>
#include <stdexcept>

namespace qsa {

std::string to_string(Basis basis) { return basis == Basis::Z ? "z" : "x"; }

Basis parse_basis(std::string_view text) {
  if (text == "z" || text == "Z") {
    return Basis::Z;
  }
  if (text == "x" || text == "X") {
    return Basis::X;
  }
  throw std::invalid_argument("unknown basis '" + std::string(text) + "'");
}

bool AttackModel::eve_holds_qubits() const {
  return std::holds_alternative<PhotonNumberSplitting>(kind) || std::holds_alternative<Blinding>(kind);
}

std::string AttackModel::name() const {
  struct Visitor {
    std::string operator()(const NoAttack&) const { return "none"; }
    std::string operator()(const InterceptResend&) const { return "intercept"; }
    std::string operator()(const PhotonNumberSplitting&) const { return "pns"; }
    std::string operator()(const Blinding&) const { return "blinding"; }
  };
  return std::visit(Visitor{}, kind);
}

void AttackModel::validate() const {
  auto check_fraction = [](double f) {
    if (!(f >= 0.0 && f <= 1.0)) {
      throw std::invalid_argument("attack fraction " + std::to_string(f) + " outside [0, 1]");
    }
  };
  if (const auto* ir = std::get_if<InterceptResend>(&kind)) {
    check_fraction(ir->fraction);
  } else if (const auto* pns = std::get_if<PhotonNumberSplitting>(&kind)) {
    check_fraction(pns->fraction);
  }
}

std::optional<BitString> EveReport::intercepted_bits() const {
  if (intercepted.empty()) {
    return std::nullopt;
  }
  BitString bits(intercepted.size());
  for (std::size_t k = 0; k < intercepted.size(); ++k) {
    bits.set(k, intercepted[k].bit);
  }
  return bits;
}

namespace {

/// Decides once per tuple, on its first in-flight qubit, whether Eve acts.
class PerTupleHook : public AttackHook {
 protected:
  PerTupleHook(std::size_t n, double fraction, StreamRng rng)
      : n_(n), fraction_(fraction), rng_(rng) {}

  /// Returns true if `tuple` is attacked; `first` tells whether this is the
  /// first in-flight qubit of the tuple.
  bool attacked(std::size_t tuple, bool& first) {
    first = std::find(seen_.begin(), seen_.end(), tuple) == seen_.end();
    if (first) {
      seen_.push_back(tuple);
      // fraction 1 and 0 are decided without consuming randomness
      bool hit = fraction_ >= 1.0 || (fraction_ > 0.0 && rng_.bernoulli(fraction_));
      if (hit) {
        affected_.push_back(tuple);
      }
      return hit;
    }
    return std::find(affected_.begin(), affected_.end(), tuple) != affected_.end();
  }

  std::size_t n_;

 private:
  double fraction_;
  StreamRng rng_;
  std::vector<std::size_t> seen_;
};

class InterceptResendHook final : public PerTupleHook {
 public:
  InterceptResendHook(std::size_t n, InterceptResend params, StreamRng rng)
      : PerTupleHook(n, params.fraction, rng), basis_(params.basis) {}

  void on_transit(const QuantumEnvelope& env, TransitContext& ctx) override {
    bool first = false;
    if (!attacked(env.tuple, first)) {
      return;
    }
    const std::size_t q = env.qubit;
    if (basis_ == Basis::X) {
      ctx.state.apply_hadamard(q);
    }
    std::size_t targets[] = {q};
    bool bit = ctx.state.measure_subset(targets, ctx.nature)[0];
    intercepted_.push_back({env.tuple, env.recipient, bit});
    ctx.events.push_back({ChannelEvent::Kind::Intercepted, env.tuple, env.recipient,
                          to_string(basis_) + ":" + (bit ? "1" : "0")});
    // The collapsed qubit is the observed basis state; for X it is rotated
    // back to |+> or |->.
    if (basis_ == Basis::X) {
      ctx.state.apply_hadamard(q);
    }
    ctx.events.push_back({ChannelEvent::Kind::Resent, env.tuple, env.recipient, {}});
  }

 private:
  Basis basis_;
};

class PnsHook final : public PerTupleHook {
 public:
  PnsHook(std::size_t n, PhotonNumberSplitting params, StreamRng rng)
      : PerTupleHook(n, params.fraction, rng), basis_(params.eve_basis) {}

  void on_transit(const QuantumEnvelope& env, TransitContext& ctx) override {
    bool first = false;
    if (!attacked(env.tuple, first) || !first) {
      return;
    }
    if (!ctx.eve_qubit) {
      throw ProtocolIntegrityError("PNS attack needs a qubit slot for Eve");
    }
    // Copying in the computational basis turns GHZ_n into GHZ_{n+1}.
    ctx.state.apply_cnot(env.qubit, *ctx.eve_qubit);
    ctx.events.push_back({ChannelEvent::Kind::Split, env.tuple, eve_index(n_), {}});
  }

  Basis held_qubit_basis() const override { return basis_; }

 private:
  Basis basis_;
};

class BlindingHook final : public PerTupleHook {
 public:
  BlindingHook(std::size_t n, Blinding params, StreamRng rng)
      : PerTupleHook(n, 1.0, rng), basis_(params.eve_basis) {}

  void on_transit(const QuantumEnvelope& env, TransitContext& ctx) override {
    bool first = false;
    if (!attacked(env.tuple, first) || !first) {
      return;
    }
    if (!ctx.eve_qubit) {
      throw ProtocolIntegrityError("blinding attack needs a qubit slot for Eve");
    }
    // Destroy the source's tuple: absorb every qubit and leave |0>.
    std::vector<std::size_t> tuple(ctx.tuple_qubits.begin(), ctx.tuple_qubits.end());
    auto absorbed = ctx.state.measure_subset(tuple, ctx.nature);
    for (std::size_t k = 0; k < tuple.size(); ++k) {
      if (absorbed[k]) {
        ctx.state.apply_x(tuple[k]);
      }
    }
    ctx.events.push_back({ChannelEvent::Kind::Destroyed, env.tuple, env.recipient, {}});

    tuple.push_back(*ctx.eve_qubit);
    ctx.state.run(ghz_schedule(tuple.size()).remapped(tuple));
    ctx.events.push_back({ChannelEvent::Kind::Substituted, env.tuple, eve_index(n_),
                          "ghz" + std::to_string(tuple.size())});
  }

  Basis held_qubit_basis() const override { return basis_; }

 private:
  Basis basis_;
};

}  // namespace

std::unique_ptr<AttackHook> make_attack_hook(const AttackModel& model, std::size_t n,
                                             StreamRng eve_rng) {
  model.validate();
  if (const auto* ir = std::get_if<InterceptResend>(&model.kind)) {
    return std::make_unique<InterceptResendHook>(n, *ir, eve_rng);
  }
  if (const auto* pns = std::get_if<PhotonNumberSplitting>(&model.kind)) {
    return std::make_unique<PnsHook>(n, *pns, eve_rng);
  }
  if (const auto* bl = std::get_if<Blinding>(&model.kind)) {
    return std::make_unique<BlindingHook>(n, *bl, eve_rng);
  }
  return nullptr;
}

BitString eve_passive_guess(std::span<const BitString> broadcasts, std::size_t m, StreamRng& rng) {
  if (broadcasts.empty()) {
    return rng.bits(m);
  }
  BitString guess = BitString::zeros(m);
  for (const auto& b : broadcasts) {
    guess ^= b;
  }
  return guess;
}

BitString eve_restart_aware_guess(std::span<const BitString> broadcasts, std::size_t m,
                                  StreamRng& rng) {
  BitString mask(m);
  if (m < 64) {
    mask = BitString::from_uint(1 + rng.below((std::uint64_t{1} << m) - 1), m);
  } else {
    do {
      mask = rng.bits(m);
    } while (mask.is_zero());
  }
  if (broadcasts.empty()) {
    return rng.bits(m);
  }
  return eve_passive_guess(broadcasts, m, rng) ^ mask;
}

BitString eve_informed_guess(std::span<const BitString> broadcasts,
                             std::span<const InterceptRecord> intercepted, std::size_t agents,
                             std::size_t m, StreamRng& rng) {
  BitString guess = eve_passive_guess(broadcasts, m, rng);
  for (const auto& r : intercepted) {
    if (r.player < agents && r.bit) {
      guess.set(r.tuple, !guess[r.tuple]);
    }
  }
  return guess;
}

}  // namespace qsa
