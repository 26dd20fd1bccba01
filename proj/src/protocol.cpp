#include "qsa/protocol.hpp"

#include <algorithm>
#include <cstdio>

namespace qsa {

namespace {

constexpr const char* kPhaseNames[] = {"psi0", "psi1", "psi2", "psi3", "psi4"};

/// Players of a tuple in emission order; the first one receives the H.
std::vector<std::size_t> emission_order(std::size_t n, Source source) {
  std::vector<std::size_t> order;
  if (source == Source::Spymaster) {
    order.push_back(alice_index(n));
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    order.push_back(i);
  }
  if (source == Source::TrustedThirdParty) {
    order.push_back(alice_index(n));
  }
  return order;
}

bool in_transit(std::size_t player, std::size_t n, Source source) {
  return !(source == Source::Spymaster && player == alice_index(n));
}

std::uint64_t combine(std::uint64_t h, std::uint64_t v) { return mix64(h ^ (v + 0x9e3779b97f4a7c15ULL)); }

struct RoundOutput {
  Attempt attempt;
  std::vector<ChannelEvent> events;
  std::vector<PhaseMarker> phases;
  std::vector<InterceptRecord> intercepted;
  std::vector<std::size_t> affected;
};

/// Simulates tuples [first, first + count) in one state vector through the
/// retrieval Hadamards. Qubit of (player p, local tuple t) is p*count + t;
/// Eve, when present, is player n.
class Block {
 public:
  Block(const ProtocolConfig& cfg, bool eve_slot, std::size_t first, std::size_t count)
      : cfg_(cfg),
        eve_slot_(eve_slot),
        first_(first),
        count_(count),
        state_((cfg.n + (eve_slot ? 1 : 0)) * count, 0, cfg.dense_limit) {}

  std::size_t qubit(std::size_t player, std::size_t local) const { return player * count_ + local; }
  QuantumState& state() { return state_; }

  void emit(QuantumChannel& channel) {
    const auto order = emission_order(cfg_.n, cfg_.source);
    const auto schedule = ghz_schedule(cfg_.n);
    std::vector<std::size_t> physical(order.size());
    for (std::size_t t = 0; t < count_; ++t) {
      for (std::size_t k = 0; k < order.size(); ++k) {
        physical[k] = qubit(order[k], t);
      }
      state_.run(schedule.remapped(physical));
      channel.record({ChannelEvent::Kind::Emitted, first_ + t, order.front(), "ghz" + std::to_string(cfg_.n)});
    }
  }

  void distribute(QuantumChannel& channel, AttackHook* hook, StreamRng& nature) {
    std::vector<std::size_t> tuple_qubits(cfg_.n);
    for (std::size_t t = 0; t < count_; ++t) {
      for (std::size_t p = 0; p < cfg_.n; ++p) {
        tuple_qubits[p] = qubit(p, t);
      }
      QuantumChannel::Transit transit{&state_, tuple_qubits,
                                      eve_slot_ ? std::optional(qubit(eve_index(cfg_.n), t)) : std::nullopt,
                                      &nature};
      for (std::size_t p : emission_order(cfg_.n, cfg_.source)) {
        if (in_transit(p, cfg_.n, cfg_.source)) {
          channel.deliver({first_ + t, p, qubit(p, t)}, hook, transit);
        } else {
          channel.keep(first_ + t, p);
        }
      }
    }
    state_.check_norm();
  }

  void apply_oracles(std::span<const BitString> ext) {
    std::vector<std::size_t> reg(count_);
    for (std::size_t i = 0; i < ext.size(); ++i) {
      for (std::size_t t = 0; t < count_; ++t) {
        reg[t] = qubit(i, t);
      }
      state_.apply_phase_oracle(ext[i].slice(first_, count_), reg);
    }
    state_.check_norm();
  }

  void retrieval_hadamards(const AttackHook* hook) {
    for (std::size_t p = 0; p < cfg_.n; ++p) {
      for (std::size_t t = 0; t < count_; ++t) {
        state_.apply_hadamard(qubit(p, t));
      }
    }
    if (eve_slot_ && hook != nullptr && hook->held_qubit_basis() == Basis::X) {
      for (std::size_t tuple : hook->affected_tuples()) {
        if (tuple >= first_ && tuple < first_ + count_) {
          state_.apply_hadamard(qubit(eve_index(cfg_.n), tuple - first_));
        }
      }
    }
    state_.check_norm();
  }

  /// Writes the block's measured bits into the attempt registers.
  void measure(StreamRng& nature, Attempt& out) {
    auto bits = state_.measure_all(nature);
    for (std::size_t t = 0; t < count_; ++t) {
      out.a.set(first_ + t, bits[qubit(alice_index(cfg_.n), t)]);
      for (std::size_t i = 0; i + 1 < cfg_.n; ++i) {
        out.ys[i].set(first_ + t, bits[qubit(i, t)]);
      }
      if (out.eve_register) {
        out.eve_register->set(first_ + t, bits[qubit(eve_index(cfg_.n), t)]);
      }
    }
  }

 private:
  const ProtocolConfig& cfg_;
  bool eve_slot_;
  std::size_t first_;
  std::size_t count_;
  QuantumState state_;
};

Attempt empty_attempt(std::size_t n, std::size_t m, bool eve_register) {
  Attempt out{BitString(m), std::vector<BitString>(n - 1, BitString(m)), std::nullopt};
  if (eve_register) {
    out.eve_register = BitString(m);
  }
  return out;
}

/// State-vector round with tuples grouped into blocks of `block_size`.
RoundOutput state_vector_round(const ProtocolConfig& cfg, std::span<const BitString> ext,
                               const AttackModel& attack, std::size_t block_size,
                               StreamRng& nature, StreamRng eve_rng) {
  const std::size_t n = cfg.n;
  const std::size_t m = cfg.m();
  const bool eve_slot = attack.eve_holds_qubits();
  auto hook = make_attack_hook(attack, n, eve_rng);
  QuantumChannel channel(m, n);

  RoundOutput out{empty_attempt(n, m, eve_slot), {}, {}, {}, {}};
  std::uint64_t digests[5] = {0, 0, 0, 0, 0};
  for (std::size_t first = 0; first < m; first += block_size) {
    Block block(cfg, eve_slot, first, std::min(block_size, m - first));
    block.emit(channel);
    block.distribute(channel, hook.get(), nature);
    digests[0] = combine(digests[0], block.state().digest());
    digests[1] = digests[0];  // output registers in |-> are left out
    block.apply_oracles(ext);
    digests[2] = combine(digests[2], block.state().digest());
    block.retrieval_hadamards(hook.get());
    digests[3] = combine(digests[3], block.state().digest());
    block.measure(nature, out.attempt);
  }
  for (const auto& w : out.attempt.a.words()) {
    digests[4] = combine(digests[4], w);
  }
  for (const auto& y : out.attempt.ys) {
    for (const auto& w : y.words()) {
      digests[4] = combine(digests[4], w);
    }
  }
  for (std::size_t k = 0; k < 5; ++k) {
    out.phases.push_back({kPhaseNames[k], digests[k]});
  }
  if (hook) {
    out.intercepted = hook->intercepted();
    out.affected = hook->affected_tuples();
  }
  out.events = channel.take_events();
  return out;
}

/// Attack-free tuple-by-tuple sampling: each position's bits are uniform
/// subject to a_j xor y_{n-2,j} xor ... xor y_{0,j} = s_j.
RoundOutput analytic_round(const ProtocolConfig& cfg, const BitString& s, StreamRng& nature) {
  const std::size_t n = cfg.n;
  const std::size_t m = cfg.m();
  QuantumChannel channel(m, n);
  const auto order = emission_order(n, cfg.source);
  for (std::size_t j = 0; j < m; ++j) {
    channel.record({ChannelEvent::Kind::Emitted, j, order.front(), "ghz" + std::to_string(n)});
    for (std::size_t p : order) {
      if (in_transit(p, n, cfg.source)) {
        channel.deliver({j, p, 0}, nullptr, {});
      } else {
        channel.keep(j, p);
      }
    }
  }

  RoundOutput out{empty_attempt(n, m, false), {}, {}, {}, {}};
  for (std::size_t j = 0; j < m; ++j) {
    bool parity = s[j];
    for (std::size_t i = 0; i + 1 < n; ++i) {
      bool y = nature.bit();
      out.attempt.ys[i].set(j, y);
      parity ^= y;
    }
    out.attempt.a.set(j, parity);
  }
  for (std::size_t k = 0; k < 5; ++k) {
    out.phases.push_back({kPhaseNames[k], std::nullopt});
  }
  out.events = channel.take_events();
  return out;
}

Transcript play(const ProtocolConfig& cfg, const AttackModel& attack, std::uint64_t shot) {
  cfg.validate(attack);
  const auto ext = resolve_oracle_keys(cfg);
  const BitString s = reconstruct_secret(BitString::zeros(cfg.m()), ext);
  const std::size_t n = cfg.n;
  const std::size_t m = cfg.m();

  std::vector<Attempt> attempts;
  std::optional<RoundOutput> accepted;
  for (std::size_t attempt = 0; attempt < cfg.max_restarts; ++attempt) {
    auto nature = StreamRng::derive(cfg.seed, shot, attempt, StreamPurpose::Nature);
    auto eve_rng = StreamRng::derive(attack.eve_seed, shot, attempt, StreamPurpose::Eve);
    RoundOutput round = [&] {
      if (cfg.engine == Engine::Dense) {
        return state_vector_round(cfg, ext, attack, m, nature, eve_rng);
      }
      if (attack.active()) {
        return state_vector_round(cfg, ext, attack, 1, nature, eve_rng);
      }
      return analytic_round(cfg, s, nature);
    }();
    attempts.push_back(round.attempt);
    if (!round.attempt.a.is_zero()) {
      accepted = std::move(round);
      break;
    }
  }
  if (!accepted) {
    throw RestartsExhaustedError("Alice measured a = 0 on all " + std::to_string(cfg.max_restarts) +
                                 " attempts");
  }

  ClassicalChannel classical(m);
  auto events = std::move(accepted->events);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    classical.broadcast({i, accepted->attempt.ys[i]});
    events.push_back({ChannelEvent::Kind::Broadcast, 0, i, accepted->attempt.ys[i].to_string()});
  }
  const Attempt& final_attempt = accepted->attempt;
  BitString reconstructed = reconstruct_secret(final_attempt.a, final_attempt.ys);

  std::vector<EveReport> reports;
  if (attack.active()) {
    auto guess_rng = StreamRng::derive(attack.eve_seed, shot, attempts.size() - 1, StreamPurpose::EveGuess);
    auto seen = classical.payloads();
    BitString guess = eve_passive_guess(seen, m, guess_rng);
    BitString aware = eve_restart_aware_guess(seen, m, guess_rng);
    BitString informed = eve_informed_guess(seen, accepted->intercepted, n - 1, m, guess_rng);
    EveReport report{accepted->intercepted, accepted->affected, final_attempt.eve_register, seen,
                     guess, guess == s, reconstructed != s, std::nullopt, aware == s, informed == s};
    if (final_attempt.eve_register) {
      report.extended_parity = (reconstructed ^ *final_attempt.eve_register) == s;
    }
    reports.push_back(std::move(report));
  }

  return Transcript{n,
                    m,
                    cfg.oracle_keys ? std::nullopt : std::optional(cfg.layout),
                    cfg.source,
                    cfg.engine,
                    cfg.seed,
                    shot,
                    cfg.max_restarts,
                    attack.name(),
                    s,
                    std::move(accepted->phases),
                    std::move(events),
                    std::move(attempts),
                    final_attempt.a,
                    final_attempt.ys,
                    std::vector<ClassicalMessage>(classical.log().begin(), classical.log().end()),
                    std::move(reconstructed),
                    0,
                    std::move(reports)};
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::vector<std::string> texts(std::span<const BitString> bits) {
  std::vector<std::string> out;
  for (const auto& b : bits) {
    out.push_back(b.to_string());
  }
  return out;
}

}  // namespace

std::string to_string(Engine engine) { return engine == Engine::Dense ? "dense" : "factorized"; }

std::string to_string(Source source) {
  return source == Source::Spymaster ? "spymaster" : "third-party";
}

Engine parse_engine(std::string_view text) {
  if (text == "dense") {
    return Engine::Dense;
  }
  if (text == "factorized") {
    return Engine::Factorized;
  }
  throw ConfigError("unknown engine '" + std::string(text) + "'");
}

Source parse_source(std::string_view text) {
  if (text == "spymaster") {
    return Source::Spymaster;
  }
  if (text == "third-party") {
    return Source::TrustedThirdParty;
  }
  throw ConfigError("unknown source '" + std::string(text) + "'");
}

void ProtocolConfig::validate() const {
  if (n < 3) {
    throw ConfigError("the game needs n >= 3 players, got " + std::to_string(n));
  }
  if (oracle_keys) {
    if (oracle_keys->size() != n - 1) {
      throw ConfigError("expected " + std::to_string(n - 1) + " oracle keys, got " +
                        std::to_string(oracle_keys->size()));
    }
    for (const auto& k : *oracle_keys) {
      if (k.size() != oracle_keys->front().size()) {
        throw ConfigError("oracle keys must share one length");
      }
    }
    if (partial_keys) {
      throw ConfigError("give either partial keys or oracle keys, not both");
    }
  } else if (layout.agents() != n - 1) {
    throw ConfigError("layout lists " + std::to_string(layout.agents()) + " agents, n = " +
                      std::to_string(n) + " needs " + std::to_string(n - 1));
  }
  if (partial_keys) {
    if (partial_keys->size() != n - 1) {
      throw ConfigError("expected " + std::to_string(n - 1) + " partial keys, got " +
                        std::to_string(partial_keys->size()));
    }
    for (std::size_t i = 0; i < partial_keys->size(); ++i) {
      if ((*partial_keys)[i].size() != layout.length(i)) {
        throw ConfigError("partial key " + std::to_string(i) + " has length " +
                          std::to_string((*partial_keys)[i].size()) + ", layout says " +
                          std::to_string(layout.length(i)));
      }
    }
  }
  if (max_restarts == 0) {
    throw ConfigError("max_restarts must be at least 1");
  }
}

void ProtocolConfig::validate(const AttackModel& attack) const {
  validate();
  try {
    attack.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (std::holds_alternative<Blinding>(attack.kind) && source != Source::TrustedThirdParty) {
    throw ConfigError("blinding attack requires a third-party GHZ source");
  }
  const std::size_t players = n + (attack.eve_holds_qubits() ? 1 : 0);
  const std::size_t qubits = engine == Engine::Dense ? players * m() : players;
  if (qubits > dense_limit) {
    throw ConfigError("dense engine would need " + std::to_string(qubits) + " qubits, limit is " +
                      std::to_string(dense_limit) + "; use the factorized engine");
  }
}

std::vector<BitString> resolve_partial_keys(const ProtocolConfig& config) {
  if (config.partial_keys) {
    return *config.partial_keys;
  }
  auto rng = StreamRng::derive(config.seed, 0, 0, StreamPurpose::Keys);
  std::vector<BitString> keys;
  for (std::size_t i = 0; i < config.layout.agents(); ++i) {
    keys.push_back(rng.bits(config.layout.length(i)));
  }
  return keys;
}

std::vector<BitString> resolve_oracle_keys(const ProtocolConfig& config) {
  if (config.oracle_keys) {
    return *config.oracle_keys;
  }
  const auto keys = resolve_partial_keys(config);
  std::vector<BitString> out;
  out.reserve(keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) {
    out.push_back(extend_partial_key(keys[i], config.layout, i));
  }
  return out;
}

std::vector<BitString> random_oracle_keys(std::size_t n, std::size_t m, std::uint64_t seed) {
  if (n < 2) {
    throw ConfigError("need at least one agent");
  }
  auto rng = StreamRng::derive(seed, 0, 0, StreamPurpose::Keys);
  std::vector<BitString> keys;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    keys.push_back(rng.bits(m));
  }
  return keys;
}

BitString Transcript::joint_outcome(std::size_t attempt) const {
  const auto& at = attempts.at(attempt);
  std::vector<BitString> parts{at.a};
  parts.insert(parts.end(), at.ys.rbegin(), at.ys.rend());
  return BitString::concat(parts);
}

Transcript run_protocol(const ProtocolConfig& config, const AttackModel& attack, std::uint64_t shot) {
  auto t = play(config, attack, shot);
  t.restarts = t.attempts.size() - 1;
  return t;
}

Transcript run_factorized(const ProtocolConfig& config, const AttackModel& attack,
                          std::uint64_t shot) {
  if (config.engine != Engine::Factorized) {
    throw ConfigError("run_factorized requires engine = factorized");
  }
  return run_protocol(config, attack, shot);
}

bool fcp_holds(const Transcript& transcript, const BitString& s) {
  return reconstruct_secret(transcript.a, transcript.ys) == s;
}

std::map<BitString, double> dense_outcome_distribution(const ProtocolConfig& config,
                                                       const AttackModel& attack) {
  ProtocolConfig cfg = config;
  cfg.engine = Engine::Dense;
  cfg.validate(attack);
  if (const auto* pns = std::get_if<PhotonNumberSplitting>(&attack.kind)) {
    if (pns->fraction != 0.0 && pns->fraction != 1.0) {
      throw ConfigError("exact distribution needs a PNS fraction of 0 or 1");
    }
  } else if (std::holds_alternative<InterceptResend>(attack.kind)) {
    throw ConfigError("exact distribution is not available for intercept-resend");
  }
  const auto ext = resolve_oracle_keys(cfg);
  const std::size_t m = cfg.m();
  const bool eve_slot = attack.eve_holds_qubits();

  auto hook = make_attack_hook(attack, cfg.n, StreamRng::derive(attack.eve_seed, 0, 0, StreamPurpose::Eve));
  auto nature = StreamRng::derive(cfg.seed, 0, 0, StreamPurpose::Nature);
  QuantumChannel channel(m, cfg.n);
  Block block(cfg, eve_slot, 0, m);
  block.emit(channel);
  block.distribute(channel, hook.get(), nature);
  block.apply_oracles(ext);
  block.retrieval_hadamards(hook.get());

  const auto& state = block.state();
  std::map<BitString, double> out;
  for (std::uint64_t i = 0; i < state.dimension(); ++i) {
    double p = std::norm(state.amplitude(i));
    if (p > 1e-15) {
      out.emplace(BitString::from_uint(i, state.num_qubits()), p);
    }
  }
  return out;
}

RationalDistribution factorized_outcome_distribution(std::size_t n, const BitString& s) {
  const std::size_t m = s.size();
  const std::size_t free_bits = m * (n - 1);
  if (free_bits > 30) {
    throw std::invalid_argument("distribution too large to enumerate");
  }
  RationalDistribution out{std::uint64_t{1} << free_bits, {}};
  // Enumerate the agents' registers freely; a is then fixed by the parity.
  for (std::uint64_t free = 0; free < out.denominator; ++free) {
    std::vector<BitString> parts;
    BitString a = s;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      BitString y = BitString::from_uint((free >> (i * m)) & ((std::uint64_t{1} << m) - 1), m);
      a ^= y;
      parts.push_back(y);
    }
    parts.push_back(a);
    std::reverse(parts.begin(), parts.end());
    out.numerators[BitString::concat(parts)] += 1;
  }
  return out;
}

bool parity_valid(const BitString& joint, std::size_t n, const BitString& s) {
  const std::size_t m = s.size();
  if (joint.size() != n * m) {
    throw std::invalid_argument("joint outcome length does not match n * m");
  }
  BitString acc = BitString::zeros(m);
  for (std::size_t p = 0; p < n; ++p) {
    acc ^= joint.slice(p * m, m);
  }
  return acc == s;
}

QuantumState explicit_output_state(const ProtocolConfig& config) {
  config.validate();
  const std::size_t n = config.n;
  const std::size_t m = config.m();
  const auto ext = resolve_oracle_keys(config);
  QuantumState state(n * m + n - 1, 0, config.dense_limit);
  const auto schedule = ghz_schedule(n);
  std::vector<std::size_t> tuple(n);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t p = 0; p < n; ++p) {
      tuple[p] = p * m + j;
    }
    state.run(schedule.remapped(tuple));
  }
  std::vector<std::size_t> reg(m);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const std::size_t output = n * m + i;
    state.apply_x(output);
    state.apply_hadamard(output);
    for (std::size_t j = 0; j < m; ++j) {
      reg[j] = i * m + j;
    }
    state.apply_oracle_explicit(ext[i], reg, output);
  }
  state.check_norm();
  return state;
}

QuantumState phase_reduced_state(const ProtocolConfig& config) {
  config.validate();
  const std::size_t n = config.n;
  const std::size_t m = config.m();
  const auto ext = resolve_oracle_keys(config);
  QuantumState state = prepare_ghz_tuples(n, m, config.dense_limit);
  std::vector<std::size_t> reg(m);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      reg[j] = i * m + j;
    }
    state.apply_phase_oracle(ext[i], reg);
  }
  state.check_norm();
  return state;
}

nlohmann::ordered_json to_json(const EveReport& report) {
  nlohmann::ordered_json j;
  auto intercepted = nlohmann::ordered_json::array();
  for (const auto& r : report.intercepted) {
    intercepted.push_back({{"tuple", r.tuple}, {"player", r.player}, {"bit", r.bit ? 1 : 0}});
  }
  j["intercepted"] = intercepted;
  j["affected_tuples"] = report.affected_tuples;
  j["eve_register"] = report.eve_register ? nlohmann::ordered_json(report.eve_register->to_string())
                                          : nlohmann::ordered_json(nullptr);
  j["broadcasts"] = texts(report.broadcasts);
  j["guess"] = report.guess.to_string();
  j["success"] = report.success;
  j["alice_corrupted"] = report.alice_corrupted;
  j["extended_parity"] = report.extended_parity ? nlohmann::ordered_json(*report.extended_parity)
                                                : nlohmann::ordered_json(nullptr);
  j["restart_aware_success"] = report.restart_aware_success;
  j["informed_success"] = report.informed_success;
  return j;
}

nlohmann::ordered_json to_json(const Transcript& t) {
  nlohmann::ordered_json j;
  j["n"] = t.n;
  j["m"] = t.m();
  j["layout"] = t.layout ? nlohmann::ordered_json(std::vector<std::size_t>(t.layout->lengths().begin(),
                                                                          t.layout->lengths().end()))
                         : nlohmann::ordered_json(nullptr);
  j["s"] = t.secret.to_string();
  j["a"] = t.a.to_string();
  j["ys"] = texts(t.ys);
  j["reconstructed"] = t.reconstructed.to_string();
  j["restarts"] = t.restarts;
  j["attack"] = t.attack;
  j["seed"] = t.seed;
  j["shot"] = t.shot;
  j["engine"] = to_string(t.engine);
  j["source"] = to_string(t.source);
  auto phases = nlohmann::ordered_json::array();
  for (const auto& p : t.phases) {
    phases.push_back({{"phase", p.phase},
                      {"digest", p.digest ? nlohmann::ordered_json(hex64(*p.digest)) : nlohmann::ordered_json(nullptr)}});
  }
  j["phases"] = phases;
  auto attempts = nlohmann::ordered_json::array();
  for (const auto& at : t.attempts) {
    attempts.push_back({{"a", at.a.to_string()}, {"ys", texts(at.ys)}});
  }
  j["attempts"] = attempts;
  auto events = nlohmann::ordered_json::array();
  for (const auto& e : t.events) {
    events.push_back({{"kind", to_string(e.kind)}, {"tuple", e.tuple}, {"player", player_name(e.player, t.n)},
                      {"detail", e.detail}});
  }
  j["events"] = events;
  auto broadcasts = nlohmann::ordered_json::array();
  for (const auto& b : t.broadcasts) {
    broadcasts.push_back({{"sender", b.sender}, {"payload", b.payload.to_string()}});
  }
  j["broadcasts"] = broadcasts;
  auto reports = nlohmann::ordered_json::array();
  for (const auto& r : t.attack_events) {
    reports.push_back(to_json(r));
  }
  j["attack_events"] = reports;
  return j;
}

}  // namespace qsa
