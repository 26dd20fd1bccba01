// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <numbers>
#include <sstream>
#include <string>

#include "qsa/adversary.hpp"
#include "qsa/analysis.hpp"
#include "qsa/experiment.hpp"
#include "qsa/invariants.hpp"

using namespace qsa;

namespace {

// Tolerances
constexpr double kToyBudgetSeconds = 10.0;
constexpr double kUniformityP = 0.001;
constexpr double kAmplitudeTol = 1e-12;
constexpr double kSigmaBand = 5.0;
constexpr std::size_t kSweepShots = 1000;
constexpr std::size_t kSecurityShots = 100000;

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), pattern, v);
  return buf;
}

std::size_t hits(double fraction, std::size_t trials) {
  return static_cast<std::size_t>(std::llround(fraction * static_cast<double>(trials)));
}

SpecFields toy_fields() {
  SpecFields f;
  f.n = 3;
  f.keys = "01,10";
  f.seed = 42;
  f.shots = 4096;
  f.engine = "dense";
  return f;
}

Verdict toy_example() {
  Verdict v;
  auto spec = build_spec(toy_fields());
  const auto ext = resolve_oracle_keys(spec.config);
  v.require(ext.at(0) == BitString::parse("0001") && ext.at(1) == BitString::parse("1000"),
            "extended keys are not 0001, 1000");
  const auto start = std::chrono::steady_clock::now();
  std::size_t invalid = 0;
  auto result = run_experiment(spec, [&](const Transcript& t) {
    invalid += !parity_valid(t.joint_outcome(0), t.n, t.secret);
  });
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  v.require(result.secret == BitString::parse("1001"), "s = " + result.secret.to_string());
  v.require(result.summary.fcp_fraction == 1.0, "FCP fraction " + fmt("%.6f", result.summary.fcp_fraction));
  v.require(invalid == 0, std::to_string(invalid) + " outcomes outside the parity-valid set");
  v.require(result.histogram && result.histogram->size() <= 256, "support larger than 256 classes");
  const auto u = chi_square_uniform(*result.histogram, 256, kUniformityP);
  v.require(u.reliable && u.pass, "chi-square p = " + fmt("%.4g", u.p_value));
  v.require(seconds < kToyBudgetSeconds, "took " + fmt("%.2f", seconds) + " s");
  if (v.pass) {
    v.detail = "s=1001, FCP 4096/4096, " + std::to_string(result.histogram->size()) +
               "/256 classes seen, chi2=" + fmt("%.1f", u.statistic) + " p=" + fmt("%.3f", u.p_value) +
               ", " + fmt("%.2f", seconds) + " s";
  }
  return v;
}

Verdict ghz5() {
  Verdict v;
  const auto schedule = ghz_schedule(5);
  v.require(!schedule.layers.empty() && schedule.layers.front().size() == 1 &&
                schedule.layers.front().front().kind == Gate::Kind::Hadamard,
            "first layer is not a single H");
  v.require(schedule.cnot_layer_count() == 3,
            std::to_string(schedule.cnot_layer_count()) + " CNOT layers instead of 3");
  v.require(schedule.layers.size() == 4, "expected 1 H layer + 3 CNOT layers");
  const auto state = prepare_ghz(5);
  const Amplitude half(1.0 / std::numbers::sqrt2, 0.0);
  for (std::uint64_t i = 0; i < 32; ++i) {
    const Amplitude want = (i == 0 || i == 31) ? half : Amplitude{};
    v.require(std::abs(state.amplitude(i) - want) <= kAmplitudeTol, "amplitude " + std::to_string(i));
  }
  if (v.pass) {
    v.detail = "1/sqrt2 at 0 and 31, zero elsewhere, 1 H + 3 CNOT layers";
  }
  return v;
}

Verdict sweep() {
  Verdict v;
  std::size_t configs = 0;
  double worst_z = 0.0;
  for (std::size_t n : {3, 4, 5, 6}) {
    for (std::size_t m : {1, 2, 4, 8}) {
      SpecFields f;
      f.n = n;
      f.m = m;
      f.seed = 1000 * n + m;
      f.shots = kSweepShots;
      auto spec = build_spec(f);
      std::size_t wrong = 0;
      auto result = run_experiment(spec, [&](const Transcript& t) { wrong += t.reconstructed != t.secret; });
      const std::string tag = "n=" + std::to_string(n) + " m=" + std::to_string(m);
      v.require(wrong == 0, tag + ": " + std::to_string(wrong) + " wrong reconstructions");
      const double z =
          binomial_z(hits(result.summary.restart_fraction, kSweepShots), kSweepShots, std::ldexp(1.0, -int(m)));
      worst_z = std::max(worst_z, std::abs(z));
      v.require(std::abs(z) <= kSigmaBand, tag + ": restart z = " + fmt("%.2f", z));
      ++configs;
    }
  }
  if (v.pass) {
    v.detail = std::to_string(configs) + " configs x " + std::to_string(kSweepShots) +
               " shots all correct, worst restart |z| = " + fmt("%.2f", worst_z);
  }
  return v;
}

Verdict from_check(const CheckResult& c) { return {c.pass, c.detail}; }

Verdict intercept_independence() {
  Verdict v;
  std::string detail;
  for (auto basis : {Basis::Z, Basis::X}) {
    Histogram h[2];
    const char* keys[2] = {"01,10", "10,01"};
    for (int k = 0; k < 2; ++k) {
      SpecFields f;
      f.n = 3;
      f.keys = keys[k];
      f.seed = 77 + k;  // separate streams, so the samples are independent
      f.engine = "factorized";
      auto spec = build_spec(f);
      spec.attack = {InterceptResend{basis, 1.0}, 5 + std::uint64_t(k)};
      for (std::uint64_t shot = 0; shot < kSecurityShots; ++shot) {
        auto t = run_protocol(spec.config, spec.attack, shot);
        ++h[k][*t.attack_events.at(0).intercepted_bits()];
      }
    }
    const auto u = chi_square_two_sample(h[0], h[1], kUniformityP);
    const std::string tag = to_string(basis) + "-basis";
    v.require(u.reliable && u.pass, tag + " p = " + fmt("%.4g", u.p_value));
    detail += (detail.empty() ? "" : ", ") + tag + " p=" + fmt("%.3f", u.p_value) + " over " +
              std::to_string(h[0].size()) + " classes";
  }
  if (v.pass) {
    v.detail = "s=1001 vs s=0110: " + detail;
  }
  return v;
}

/// Exact values at n = 3, m = 2 from the dense distribution; outcome bits
/// are y_E || a || y_1 || y_0.
Verdict exact_held_attacks() {
  Verdict v;
  ProtocolConfig cfg;
  cfg.partial_keys = std::vector<BitString>{BitString::parse("1"), BitString::parse("0")};
  cfg.layout = KeyLayout::even(2, 2);
  cfg.source = Source::TrustedThirdParty;
  const auto s = BitString::parse("01");
  for (const AttackModel& attack : {AttackModel{PhotonNumberSplitting{}, 1}, AttackModel{Blinding{}, 1}}) {
    double parity = 0;
    double accepted = 0;
    double alice = 0;
    double eve = 0;
    for (const auto& [outcome, p] : dense_outcome_distribution(cfg, attack)) {
      const auto y0 = outcome.slice(0, 2);
      const auto y1 = outcome.slice(2, 2);
      const auto a = outcome.slice(4, 2);
      const auto ye = outcome.slice(6, 2);
      parity += (a ^ ye ^ y0 ^ y1) == s ? p : 0.0;
      if (a.is_zero()) {
        continue;
      }
      accepted += p;
      alice += (a ^ y0 ^ y1) == s ? p : 0.0;
      eve += (y0 ^ y1) == s ? p : 0.0;  // passive guess: broadcasts XORed
    }
    const std::string tag = attack.name();
    v.require(std::abs(parity - 1.0) < 1e-12, tag + " exact extended parity " + fmt("%.6f", parity));
    v.require(std::abs(alice / accepted - 0.25) < 1e-12, tag + " exact Alice success " + fmt("%.6f", alice / accepted));
    v.require(std::abs(eve / accepted - 0.25) < 1e-12, tag + " exact Eve success " + fmt("%.6f", eve / accepted));
  }
  return v;
}

Verdict held_attacks() {
  Verdict v = exact_held_attacks();
  if (!v.pass) {
    v.detail = "dense oracle at n=3 m=2: " + v.detail;
    return v;
  }
  std::string detail = "dense oracle n=3 m=2 exact (1, 1/4, 1/4)";
  const double p = 1.0 / 16.0;
  for (const char* kind : {"pns", "blinding"}) {
    SpecFields f;
    f.n = 3;
    f.m = 4;
    f.seed = 2718;
    f.shots = kSecurityShots;
    f.engine = "factorized";
    f.source = "third-party";
    f.attack = kind;
    auto result = run_experiment(build_spec(f));
    const auto& eve = *result.summary.eve;
    const double parity = eve.extended_parity_fraction.value_or(0.0);
    const double ze = binomial_z(hits(eve.success_fraction, kSecurityShots), kSecurityShots, p);
    const double za = binomial_z(hits(result.summary.reconstruction_success, kSecurityShots), kSecurityShots, p);
    v.require(parity == 1.0, std::string(kind) + " extended parity " + fmt("%.6f", parity));
    v.require(std::abs(ze) <= kSigmaBand, std::string(kind) + " Eve z = " + fmt("%.2f", ze));
    v.require(std::abs(za) <= kSigmaBand, std::string(kind) + " Alice z = " + fmt("%.2f", za));
    detail += std::string("; ") + kind + ": parity 100%, Eve " + fmt("%.4f", eve.success_fraction) + " (z=" +
              fmt("%.2f", ze) + "), Alice " + fmt("%.4f", result.summary.reconstruction_success) +
              " (z=" + fmt("%.2f", za) + ")";
  }
  if (v.pass) {
    v.detail = detail;
  }
  return v;
}

Verdict security() {
  Verdict a = intercept_independence();
  Verdict b = held_attacks();
  return {a.pass && b.pass, "(a) " + a.detail + " | (b) " + b.detail};
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Verdict determinism() {
  Verdict v;
  const auto root = std::filesystem::temp_directory_path() / "qsa-acceptance-determinism";
  std::filesystem::remove_all(root);
  SpecFields blinding;
  blinding.n = 4;
  blinding.m = 3;
  blinding.seed = 99;
  blinding.shots = 5000;
  blinding.attack = "blinding";
  for (const auto& [name, base] : {std::pair{"toy", toy_fields()}, std::pair{"blinding", blinding}}) {
    std::string reference[2];
    int run = 0;
    for (std::size_t threads : {1, 8, 1}) {
      SpecFields f = base;
      f.threads = threads;
      f.out_dir = (root / (std::string(name) + "-" + std::to_string(run))).string();
      auto spec = build_spec(f);
      run_and_write(spec);
      const std::string files[2] = {slurp(*spec.out_dir / "transcripts.jsonl"), slurp(*spec.out_dir / "histogram.csv")};
      if (run == 0) {
        reference[0] = files[0];
        reference[1] = files[1];
        v.require(!files[0].empty() && !files[1].empty(), std::string(name) + " produced empty artifacts");
      } else {
        const std::string tag = std::string(name) + " run " + std::to_string(run) + " threads=" + std::to_string(threads);
        v.require(files[0] == reference[0], tag + " transcripts differ");
        v.require(files[1] == reference[1], tag + " histogram differs");
      }
      ++run;
    }
  }
  std::filesystem::remove_all(root);
  if (v.pass) {
    v.detail = "toy and blinding batches byte-identical across threads 1, 8, 1";
  }
  return v;
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Verdict()>> criteria[] = {
      {"toy example n=3 m=4, 4096 shots", toy_example},
      {"GHZ_5 preparation", ghz5},
      {"correctness sweep n in 3..6, m in {1,2,4,8}", sweep},
      {"engine equivalence n=3, m=1..3 (exact)", [] { return from_check(check_engine_equivalence(3, 3)); }},
      {"oracle reduction, all keys m<=3", [] { return from_check(check_oracle_reduction(3)); }},
      {"tensor identity n<=3, m<=2", [] { return from_check(check_tensor_identity(3, 2)); }},
      {"security properties", security},
      {"determinism across thread counts", determinism},
  };
  int failed = 0;
  int index = 1;
  for (const auto& [name, fn] : criteria) {
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (v.pass ? "PASS" : "FAIL") << ' ' << index << ' ' << name << ": " << v.detail << std::endl;
    failed += !v.pass;
    ++index;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
