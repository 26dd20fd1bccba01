#include "qsa/qstate.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

namespace qsa {

namespace {

constexpr double kInvSqrt2 = 1.0 / std::numbers::sqrt2;

std::size_t ceil_log2(std::size_t n) {
  std::size_t t = 0;
  while ((std::size_t{1} << t) < n) {
    ++t;
  }
  return t;
}

}  // namespace

std::size_t CircuitSchedule::cnot_layer_count() const {
  return static_cast<std::size_t>(std::count_if(layers.begin(), layers.end(), [](const auto& layer) {
    return !layer.empty() && std::all_of(layer.begin(), layer.end(), [](const Gate& g) {
      return g.kind == Gate::Kind::Cnot;
    });
  }));
}

std::size_t CircuitSchedule::qubit_span() const {
  std::size_t span = 0;
  for (const auto& layer : layers) {
    for (const auto& g : layer) {
      span = std::max(span, g.target + 1);
      if (g.kind == Gate::Kind::Cnot) {
        span = std::max(span, g.control + 1);
      }
    }
  }
  return span;
}

bool CircuitSchedule::layers_disjoint() const {
  for (const auto& layer : layers) {
    std::vector<std::size_t> used;
    for (const auto& g : layer) {
      used.push_back(g.target);
      if (g.kind == Gate::Kind::Cnot) {
        used.push_back(g.control);
      }
    }
    std::sort(used.begin(), used.end());
    if (std::adjacent_find(used.begin(), used.end()) != used.end()) {
      return false;
    }
  }
  return true;
}

CircuitSchedule CircuitSchedule::remapped(std::span<const std::size_t> physical) const {
  if (physical.size() < qubit_span()) {
    throw std::invalid_argument("qubit map shorter than the schedule's qubit span");
  }
  CircuitSchedule out;
  out.layers.reserve(layers.size());
  for (const auto& layer : layers) {
    auto& mapped = out.layers.emplace_back();
    for (const auto& g : layer) {
      mapped.push_back(g.kind == Gate::Kind::Cnot ? Gate::cnot(physical[g.control], physical[g.target])
                                                  : Gate::h(physical[g.target]));
    }
  }
  return out;
}

CircuitSchedule ghz_schedule(std::size_t n) {
  if (n == 0) {
    throw std::invalid_argument("GHZ schedule needs at least one qubit");
  }
  CircuitSchedule schedule;
  schedule.layers.push_back({Gate::h(0)});
  for (std::size_t t = 0, entangled = 1; t < ceil_log2(n); ++t) {
    auto& layer = schedule.layers.emplace_back();
    std::size_t fresh = entangled;
    for (std::size_t q = 0; q < entangled && fresh < n; ++q, ++fresh) {
      layer.push_back(Gate::cnot(q, fresh));
    }
    entangled = fresh;
  }
  return schedule;
}

QuantumState::QuantumState(std::size_t num_qubits, std::uint64_t basis, std::size_t dense_limit)
    : num_qubits_(num_qubits) {
  if (num_qubits == 0 || num_qubits > dense_limit) {
    throw std::invalid_argument("qubit count " + std::to_string(num_qubits) +
                                " outside the dense range [1, " + std::to_string(dense_limit) + "]");
  }
  if (num_qubits < 64 && (basis >> num_qubits) != 0) {
    throw std::invalid_argument("basis index out of range");
  }
  amplitudes_.assign(std::size_t{1} << num_qubits, Amplitude{0.0, 0.0});
  amplitudes_[basis] = 1.0;
}

QuantumState QuantumState::from_amplitudes(std::vector<Amplitude> amplitudes) {
  if (amplitudes.empty() || !std::has_single_bit(amplitudes.size()) || amplitudes.size() == 1) {
    throw std::invalid_argument("amplitude vector size must be a power of two >= 2");
  }
  QuantumState out;
  out.num_qubits_ = static_cast<std::size_t>(std::countr_zero(amplitudes.size()));
  out.amplitudes_ = std::move(amplitudes);
  out.check_norm();
  return out;
}

QuantumState QuantumState::tensor(const QuantumState& high, const QuantumState& low) {
  std::vector<Amplitude> amps(high.dimension() * low.dimension());
  for (std::size_t h = 0; h < high.dimension(); ++h) {
    for (std::size_t l = 0; l < low.dimension(); ++l) {
      amps[(h << low.num_qubits_) | l] = high.amplitudes_[h] * low.amplitudes_[l];
    }
  }
  return from_amplitudes(std::move(amps));
}

double QuantumState::norm_squared() const {
  double total = 0.0;
  for (const auto& a : amplitudes_) {
    total += std::norm(a);
  }
  return total;
}

void QuantumState::check_norm(double tolerance) const {
  double drift = std::abs(norm_squared() - 1.0);
  if (!(drift <= tolerance)) {
    throw StateCorruptionError("state norm drifted by " + std::to_string(drift));
  }
}

void QuantumState::check_qubit(std::size_t q) const {
  if (q >= num_qubits_) {
    throw std::out_of_range("qubit " + std::to_string(q) + " out of range for " +
                            std::to_string(num_qubits_) + "-qubit state");
  }
}

void QuantumState::apply_hadamard(std::size_t target) {
  check_qubit(target);
  const std::size_t stride = std::size_t{1} << target;
  for (std::size_t base = 0; base < amplitudes_.size(); base += 2 * stride) {
    for (std::size_t i = base; i < base + stride; ++i) {
      Amplitude a0 = amplitudes_[i];
      Amplitude a1 = amplitudes_[i + stride];
      amplitudes_[i] = (a0 + a1) * kInvSqrt2;
      amplitudes_[i + stride] = (a0 - a1) * kInvSqrt2;
    }
  }
}

void QuantumState::apply_x(std::size_t target) {
  check_qubit(target);
  const std::size_t stride = std::size_t{1} << target;
  for (std::size_t base = 0; base < amplitudes_.size(); base += 2 * stride) {
    for (std::size_t i = base; i < base + stride; ++i) {
      std::swap(amplitudes_[i], amplitudes_[i + stride]);
    }
  }
}

void QuantumState::apply_cnot(std::size_t control, std::size_t target) {
  check_qubit(control);
  check_qubit(target);
  if (control == target) {
    throw std::invalid_argument("CNOT control and target must differ");
  }
  const std::uint64_t cbit = std::uint64_t{1} << control;
  const std::uint64_t tbit = std::uint64_t{1} << target;
  for (std::uint64_t i = 0; i < amplitudes_.size(); ++i) {
    if ((i & cbit) && !(i & tbit)) {
      std::swap(amplitudes_[i], amplitudes_[i | tbit]);
    }
  }
}

void QuantumState::apply(const Gate& gate) {
  if (gate.kind == Gate::Kind::Hadamard) {
    apply_hadamard(gate.target);
  } else {
    apply_cnot(gate.control, gate.target);
  }
}

void QuantumState::run(const CircuitSchedule& schedule) {
  for (const auto& layer : schedule.layers) {
    for (const auto& gate : layer) {
      apply(gate);
    }
    check_norm();
  }
}

std::uint64_t QuantumState::register_mask(const BitString& key,
                                          std::span<const std::size_t> reg) const {
  if (key.size() != reg.size()) {
    throw std::invalid_argument("oracle key length " + std::to_string(key.size()) +
                                " does not match register size " + std::to_string(reg.size()));
  }
  std::uint64_t seen = 0;
  std::uint64_t mask = 0;
  for (std::size_t j = 0; j < reg.size(); ++j) {
    check_qubit(reg[j]);
    std::uint64_t bit = std::uint64_t{1} << reg[j];
    if (seen & bit) {
      throw std::invalid_argument("duplicate qubit " + std::to_string(reg[j]) + " in register");
    }
    seen |= bit;
    if (key[j]) {
      mask |= bit;
    }
  }
  return mask;
}

void QuantumState::apply_phase_oracle(const BitString& key, std::span<const std::size_t> reg) {
  const std::uint64_t mask = register_mask(key, reg);
  if (mask == 0) {
    return;
  }
  for (std::uint64_t i = 0; i < amplitudes_.size(); ++i) {
    if (std::popcount(i & mask) & 1) {
      amplitudes_[i] = -amplitudes_[i];
    }
  }
}

void QuantumState::apply_oracle_explicit(const BitString& key, std::span<const std::size_t> reg,
                                         std::size_t output_qubit) {
  const std::uint64_t mask = register_mask(key, reg);
  check_qubit(output_qubit);
  if (std::find(reg.begin(), reg.end(), output_qubit) != reg.end()) {
    throw std::invalid_argument("output qubit must not belong to the input register");
  }
  const std::uint64_t obit = std::uint64_t{1} << output_qubit;
  for (std::uint64_t i = 0; i < amplitudes_.size(); ++i) {
    if (!(i & obit) && (std::popcount(i & mask) & 1)) {
      std::swap(amplitudes_[i], amplitudes_[i | obit]);
    }
  }
}

BitString QuantumState::measure_all(StreamRng& rng) const {
  check_norm(kMeasureNormTolerance);
  const double r = rng.uniform01() * norm_squared();
  double acc = 0.0;
  // If rounding leaves r above the final running total, the last nonzero
  // index absorbs that sliver.
  std::uint64_t chosen = 0;
  for (std::uint64_t i = 0; i < amplitudes_.size(); ++i) {
    double p = std::norm(amplitudes_[i]);
    if (p == 0.0) {
      continue;
    }
    chosen = i;
    acc += p;
    if (r < acc) {
      break;
    }
  }
  BitString out(num_qubits_);
  for (std::size_t q = 0; q < num_qubits_; ++q) {
    out.set(q, (chosen >> q) & 1U);
  }
  return out;
}

BitString QuantumState::measure_subset(std::span<const std::size_t> targets, StreamRng& rng) {
  if (targets.empty()) {
    throw std::invalid_argument("measure_subset needs at least one target");
  }
  std::uint64_t seen = 0;
  for (auto q : targets) {
    check_qubit(q);
    if (seen & (std::uint64_t{1} << q)) {
      throw std::invalid_argument("duplicate measurement target " + std::to_string(q));
    }
    seen |= std::uint64_t{1} << q;
  }
  check_norm(kMeasureNormTolerance);

  auto outcome_of = [&](std::uint64_t index) {
    std::uint64_t o = 0;
    for (std::size_t t = 0; t < targets.size(); ++t) {
      o |= ((index >> targets[t]) & 1U) << t;
    }
    return o;
  };

  std::vector<double> marginal(std::size_t{1} << targets.size(), 0.0);
  for (std::uint64_t i = 0; i < amplitudes_.size(); ++i) {
    marginal[outcome_of(i)] += std::norm(amplitudes_[i]);
  }
  const double r = rng.uniform01() * norm_squared();
  double acc = 0.0;
  std::uint64_t chosen = 0;
  for (std::uint64_t o = 0; o < marginal.size(); ++o) {
    if (marginal[o] == 0.0) {
      continue;
    }
    chosen = o;
    acc += marginal[o];
    if (r < acc) {
      break;
    }
  }

  const double scale = 1.0 / std::sqrt(marginal[chosen]);
  for (std::uint64_t i = 0; i < amplitudes_.size(); ++i) {
    amplitudes_[i] = outcome_of(i) == chosen ? amplitudes_[i] * scale : Amplitude{0.0, 0.0};
  }
  check_norm();
  return BitString::from_uint(chosen, targets.size());
}

QuantumState QuantumState::permuted(std::span<const std::size_t> new_position) const {
  if (new_position.size() != num_qubits_) {
    throw std::invalid_argument("permutation size mismatch");
  }
  std::uint64_t seen = 0;
  for (auto p : new_position) {
    check_qubit(p);
    seen |= std::uint64_t{1} << p;
  }
  if (static_cast<std::size_t>(std::popcount(seen)) != num_qubits_) {
    throw std::invalid_argument("not a permutation");
  }
  QuantumState out;
  out.num_qubits_ = num_qubits_;
  out.amplitudes_.assign(amplitudes_.size(), Amplitude{0.0, 0.0});
  for (std::uint64_t i = 0; i < amplitudes_.size(); ++i) {
    std::uint64_t j = 0;
    for (std::size_t q = 0; q < num_qubits_; ++q) {
      j |= ((i >> q) & 1U) << new_position[q];
    }
    out.amplitudes_[j] = amplitudes_[i];
  }
  return out;
}

std::vector<double> QuantumState::probabilities() const {
  std::vector<double> out(amplitudes_.size());
  std::transform(amplitudes_.begin(), amplitudes_.end(), out.begin(),
                 [](const Amplitude& a) { return std::norm(a); });
  return out;
}

std::vector<AmplitudeEntry> QuantumState::dump(double threshold) const {
  std::vector<AmplitudeEntry> out;
  for (std::uint64_t i = 0; i < amplitudes_.size(); ++i) {
    if (std::abs(amplitudes_[i]) > threshold) {
      out.push_back({i, amplitudes_[i].real(), amplitudes_[i].imag()});
    }
  }
  return out;
}

std::uint64_t QuantumState::digest() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](std::int64_t v) {
    auto u = static_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b) {
      h ^= (u >> (8 * b)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& a : amplitudes_) {
    feed(std::llround(a.real() * 1e9));
    feed(std::llround(a.imag() * 1e9));
  }
  return h;
}

QuantumState prepare_ghz(std::size_t n, std::size_t dense_limit) {
  QuantumState state(n, 0, dense_limit);
  state.run(ghz_schedule(n));
  return state;
}

QuantumState prepare_ghz_tuples(std::size_t n, std::size_t m, std::size_t dense_limit) {
  QuantumState state(n * m, 0, dense_limit);
  const auto schedule = ghz_schedule(n);
  std::vector<std::size_t> tuple_qubits(n);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t p = 0; p < n; ++p) {
      tuple_qubits[p] = p * m + j;
    }
    state.run(schedule.remapped(tuple_qubits));
  }
  return state;
}

bool equal_up_to_global_phase(const QuantumState& a, const QuantumState& b, double tolerance) {
  if (a.dimension() != b.dimension()) {
    return false;
  }
  // Fix the phase on the largest amplitude of `a`.
  std::size_t pivot = 0;
  for (std::size_t i = 1; i < a.dimension(); ++i) {
    if (std::abs(a.amplitude(i)) > std::abs(a.amplitude(pivot))) {
      pivot = i;
    }
  }
  if (std::abs(b.amplitude(pivot)) < tolerance) {
    return false;
  }
  Amplitude phase = a.amplitude(pivot) / b.amplitude(pivot);
  if (std::abs(std::abs(phase) - 1.0) > tolerance) {
    return false;
  }
  for (std::size_t i = 0; i < a.dimension(); ++i) {
    if (std::abs(a.amplitude(i) - phase * b.amplitude(i)) > tolerance) {
      return false;
    }
  }
  return true;
}

}  // namespace qsa
