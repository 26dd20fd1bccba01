// qsa: run, verify and attack quantum secret aggregation games.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "qsa/experiment.hpp"
#include "qsa/invariants.hpp"

using namespace qsa;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitConfig = 2;

int report_error(const std::string& kind, const std::string& message, int code) {
  nlohmann::ordered_json record{{"error", kind}, {"message", message}};
  std::cerr << record.dump() << '\n';
  return code;
}

/// Options shared by `run` and `attack`; each lands in a SpecFields slot
/// only when given on the command line.
struct GameOptions {
  SpecFields fields;
  std::string spec_file;

  void attach(CLI::App& app) {
    app.add_option("--spec", spec_file, "Flat JSON spec file; flags override its fields");
    app.add_option("--n", fields.n, "Players including Alice (>= 3)");
    app.add_option("--m", fields.m, "Secret length; split evenly over the agents");
    app.add_option("--key-lengths", fields.key_lengths, "Partial key lengths, agent 0 first, e.g. 2,2");
    app.add_option("--keys", fields.keys, "Partial keys, agent 0 first, e.g. 01,10");
    app.add_flag("--random-keys", fields.random_keys, "Draw the partial keys from the seed");
    app.add_option("--shots", fields.shots, "Number of games");
    app.add_option("--seed", fields.seed, "Master seed (required)");
    app.add_option("--engine", fields.engine, "dense or factorized (default: by size)")
        ->check(CLI::IsMember({"dense", "factorized"}));
    app.add_option("--source", fields.source, "GHZ source")->check(CLI::IsMember({"spymaster", "third-party"}));
    app.add_option("--max-restarts", fields.max_restarts, "Attempts allowed per game");
    app.add_option("--attack", fields.attack, "Eavesdropper model")
        ->check(CLI::IsMember({"none", "intercept", "pns", "blinding"}));
    app.add_option("--pns-fraction", fields.pns_fraction, "Share of tuples split by PNS");
    app.add_option("--intercept-fraction", fields.intercept_fraction, "Share of tuples intercepted");
    app.add_option("--eve-basis", fields.eve_basis, "Eve's measurement basis")->check(CLI::IsMember({"x", "z"}));
    app.add_option("--eve-seed", fields.eve_seed, "Seed of Eve's decisions (default: --seed)");
    app.add_option("--threads", fields.threads, "Worker threads");
    app.add_option("--out-dir", fields.out_dir, "Artifact directory");
  }

  SpecFields resolve(const SpecFields& preset) const {
    SpecFields merged = preset;
    if (!spec_file.empty()) {
      merged.merge(load_spec_file(spec_file));
    }
    merged.merge(fields);
    return merged;
  }
};

SpecFields paper_example() {
  SpecFields f;
  f.n = 3;
  f.keys = "01,10";
  f.shots = 4096;
  f.seed = 42;
  return f;
}

int cmd_run(const GameOptions& opts, bool example) {
  auto fields = opts.resolve(example ? paper_example() : SpecFields{});
  if (!fields.out_dir) {
    fields.out_dir = "qsa-output";
  }
  auto spec = build_spec(fields);
  auto result = run_and_write(spec);
  std::cout << summary_document(spec, result).dump(2) << '\n';
  if (!result.ok()) {
    for (const auto& a : result.assertions) {
      if (!a.pass) {
        report_error("assertion", a.name + " failed (" + a.detail + ")", kExitFailed);
      }
    }
    return kExitFailed;
  }
  return kExitOk;
}

int cmd_verify() {
  bool ok = true;
  for (const auto& check : run_invariant_suite()) {
    std::cout << (check.pass ? "PASS " : "FAIL ") << check.name << ": " << check.detail << '\n';
    ok = ok && check.pass;
  }
  return ok ? kExitOk : kExitFailed;
}

std::vector<std::string> split(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    out.push_back(item);
  }
  return out;
}

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

int cmd_attack(const GameOptions& opts, const std::string& fractions, const std::string& ms,
               const std::string& out_path) {
  auto base = opts.resolve({});
  if (!base.attack || *base.attack == "none") {
    throw ConfigError("attack needs --attack intercept, pns or blinding");
  }
  const std::string kind = *base.attack;
  if (!ms.empty() && !fractions.empty()) {
    throw ConfigError("sweep either --fractions or --ms, not both");
  }
  if (kind == "blinding" && !fractions.empty()) {
    throw ConfigError("blinding has no fraction to sweep; use --ms");
  }

  std::vector<SpecFields> points;
  if (!ms.empty()) {
    if (base.keys || base.key_lengths) {
      throw ConfigError("--ms sweeps need random keys; drop --keys and --key-lengths");
    }
    for (const auto& m : split(ms)) {
      SpecFields f = base;
      f.m = std::stoul(m);
      points.push_back(f);
    }
  } else if (kind == "blinding") {
    points.push_back(base);
  } else {
    for (const auto& v : split(fractions.empty() ? "0,0.25,0.5,0.75,1" : fractions)) {
      SpecFields f = base;
      (kind == "pns" ? f.pns_fraction : f.intercept_fraction) = std::stod(v);
      points.push_back(f);
    }
  }

  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path, std::ios::binary);
    if (!file) {
      throw std::runtime_error("cannot write " + out_path);
    }
  }
  std::ostream& out = out_path.empty() ? std::cout : file;
  out << "attack,eve_basis,m,fraction,shots,eve_success,alice_corrupted,extended_parity,"
         "restart_aware_success,informed_success\n";
  for (const auto& f : points) {
    auto spec = build_spec(f);
    auto result = run_experiment(spec);
    const auto j = to_json(spec)["attack"];
    const auto& eve = *result.summary.eve;
    out << kind << ',' << (j.contains("basis") ? j["basis"] : j["eve_basis"]).get<std::string>() << ','
        << spec.config.m() << ',' << (j.contains("fraction") ? fixed(j["fraction"].get<double>()) : fixed(1.0))
        << ',' << spec.shots << ',' << fixed(eve.success_fraction) << ',' << fixed(eve.alice_corrupted_fraction)
        << ',' << (eve.extended_parity_fraction ? fixed(*eve.extended_parity_fraction) : "") << ','
        << fixed(eve.restart_aware_success_fraction) << ',' << fixed(eve.informed_success_fraction) << '\n';
  }
  return kExitOk;
}

int cmd_ghz(std::size_t n) {
  auto schedule = ghz_schedule(n);
  std::cout << "# ghz n=" << n << " cnot_layers=" << schedule.cnot_layer_count() << '\n';
  for (std::size_t l = 0; l < schedule.layers.size(); ++l) {
    std::cout << "# layer " << l << ':';
    for (const auto& g : schedule.layers[l]) {
      if (g.kind == Gate::Kind::Hadamard) {
        std::cout << " h(" << g.target << ')';
      } else {
        std::cout << " cnot(" << g.control << "->" << g.target << ')';
      }
    }
    std::cout << '\n';
  }
  auto state = prepare_ghz(n);
  std::cout << "index,bits,real,imag\n";
  char buf[64];
  for (const auto& e : state.dump()) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g", e.real, e.imag);
    std::cout << e.index << ',' << BitString::from_uint(e.index, n).to_string() << ',' << buf << '\n';
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum secret aggregation simulator"};
  app.require_subcommand(1);

  GameOptions run_opts;
  bool example = false;
  auto* run = app.add_subcommand("run", "Play a batch of games and write artifacts");
  run_opts.attach(*run);
  run->add_flag("--paper-example", example, "n=3, keys 01/10, 4096 shots, seed 42");

  app.add_subcommand("verify", "Check the simulator's invariants");

  GameOptions attack_opts;
  std::string fractions;
  std::string ms;
  std::string out_path;
  auto* attack = app.add_subcommand("attack", "Sweep an attack and print a CSV curve");
  attack_opts.attach(*attack);
  attack->add_option("--fractions", fractions, "Fractions to sweep, e.g. 0,0.5,1");
  attack->add_option("--ms", ms, "Secret lengths to sweep, e.g. 1,2,4");
  attack->add_option("--out", out_path, "CSV file (default: stdout)");

  std::size_t ghz_n = 0;
  auto* ghz = app.add_subcommand("ghz", "Print a prepared GHZ state");
  ghz->add_option("--n", ghz_n, "Qubits")->required()->check(CLI::Range(1, 24));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage", e.what(), kExitConfig);
  }

  try {
    if (run->parsed()) {
      return cmd_run(run_opts, example);
    }
    if (attack->parsed()) {
      return cmd_attack(attack_opts, fractions, ms, out_path);
    }
    if (ghz->parsed()) {
      return cmd_ghz(ghz_n);
    }
    return cmd_verify();
  } catch (const ConfigError& e) {
    return report_error("config", e.what(), kExitConfig);
  } catch (const std::invalid_argument& e) {
    return report_error("config", e.what(), kExitConfig);
  } catch (const std::exception& e) {
    return report_error("runtime", e.what(), kExitFailed);
  }
}
