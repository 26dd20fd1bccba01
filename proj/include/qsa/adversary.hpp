#pragma once

#include <cstdint>

#include "qsa/attack_model.hpp"
#include "qsa/protocol.hpp"

namespace qsa {

/// Plays one game under intercept-and-resend and returns Eve's report.
EveReport attack_intercept_resend(const ProtocolConfig& config, InterceptResend params,
                                  std::uint64_t eve_seed, std::uint64_t shot = 0);

/// Plays one game under photon-number splitting.
EveReport attack_pns(const ProtocolConfig& config, PhotonNumberSplitting params,
                     std::uint64_t eve_seed, std::uint64_t shot = 0);

/// Plays one game under blinding. The source must be a third party.
EveReport attack_blinding(const ProtocolConfig& config, Blinding params, std::uint64_t eve_seed,
                          std::uint64_t shot = 0);

}  // namespace qsa
