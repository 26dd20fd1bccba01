#include "qsa/rng.hpp"

#include <stdexcept>

namespace qsa {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
}

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

StreamRng StreamRng::derive(std::uint64_t master, std::uint64_t shot, std::uint64_t restart,
                            StreamPurpose purpose) {
  std::uint64_t k = mix64(master + kGolden);
  k = mix64(k ^ (shot + 1) * kGolden);
  k = mix64(k ^ (restart + 1) * 0xd1b54a32d192ed03ULL);
  k = mix64(k ^ static_cast<std::uint64_t>(purpose) * 0x8cb92ba72f3d8dd7ULL);
  return StreamRng(k);
}

std::uint64_t StreamRng::next() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double StreamRng::uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::uint64_t StreamRng::below(std::uint64_t bound) {
  if (bound == 0) {
    throw std::invalid_argument("StreamRng::below requires a positive bound");
  }
  // Rejection sampling keeps the result exactly uniform.
  std::uint64_t limit = max() - max() % bound;
  for (;;) {
    std::uint64_t v = next();
    if (v < limit) {
      return v % bound;
    }
  }
}

BitString StreamRng::bits(std::size_t length) {
  BitString out(length);
  for (std::size_t k = 0; k < length; k += 64) {
    std::uint64_t word = next();
    for (std::size_t b = 0; b < 64 && k + b < length; ++b) {
      out.set(k + b, (word >> b) & 1U);
    }
  }
  return out;
}

}  // namespace qsa
