#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>

#include "qsa/bitkit.hpp"

namespace qsa {

/// Purpose tags that keep the streams of one shot apart.
enum class StreamPurpose : std::uint64_t {
  Nature = 1,  // measurement outcomes
  Eve = 2,     // adversary decisions
  Keys = 3,    // random partial keys
  EveGuess = 4,
  Test = 5,
};

/// Counter-based generator: the i-th output is a pure function of
/// (key, i), so a stream can be rebuilt from its derivation inputs alone.
/// Satisfies UniformRandomBitGenerator.
class StreamRng {
 public:
  using result_type = std::uint64_t;

  explicit StreamRng(std::uint64_t key) : key_(key) {}
  /// Stream for (master seed, shot, restart, purpose).
  static StreamRng derive(std::uint64_t master, std::uint64_t shot, std::uint64_t restart,
                          StreamPurpose purpose);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return next(); }

  std::uint64_t next();
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01();
  bool bit() { return next() >> 63; }
  bool bernoulli(double p) { return uniform01() < p; }
  /// Uniform integer in [0, bound); bound must be positive.
  std::uint64_t below(std::uint64_t bound);
  BitString bits(std::size_t length);

  std::uint64_t key() const { return key_; }
  std::uint64_t position() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t x);

}  // namespace qsa
