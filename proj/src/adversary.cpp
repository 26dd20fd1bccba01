#include "qsa/adversary.hpp"

namespace qsa {

namespace {

EveReport play_attack(const ProtocolConfig& config, AttackModel model, std::uint64_t shot) {
  auto transcript = run_protocol(config, model, shot);
  return std::move(transcript.attack_events.front());
}

}  // namespace

EveReport attack_intercept_resend(const ProtocolConfig& config, InterceptResend params,
                                  std::uint64_t eve_seed, std::uint64_t shot) {
  return play_attack(config, {params, eve_seed}, shot);
}

EveReport attack_pns(const ProtocolConfig& config, PhotonNumberSplitting params,
                     std::uint64_t eve_seed, std::uint64_t shot) {
  return play_attack(config, {params, eve_seed}, shot);
}

EveReport attack_blinding(const ProtocolConfig& config, Blinding params, std::uint64_t eve_seed,
                          std::uint64_t shot) {
  return play_attack(config, {params, eve_seed}, shot);
}

}  // namespace qsa
