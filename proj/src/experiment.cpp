#include "qsa/experiment.hpp"

#include <algorithm>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>

namespace qsa {

namespace {

constexpr std::size_t kChunkShots = 4096;

std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    out.push_back(item);
  }
  return out;
}

/// Array of strings/numbers or a comma-separated string, as one csv string.
std::string list_field(const nlohmann::json& value, const char* name) {
  if (value.is_string()) {
    return value.get<std::string>();
  }
  if (!value.is_array()) {
    throw ConfigError(std::string(name) + " must be a list or a comma-separated string");
  }
  std::string out;
  for (const auto& v : value) {
    if (!out.empty()) {
      out += ',';
    }
    if (v.is_string()) {
      out += v.get<std::string>();
    } else if (v.is_number_unsigned()) {
      out += std::to_string(v.get<std::size_t>());
    } else {
      throw ConfigError(std::string(name) + " entries must be strings or non-negative integers");
    }
  }
  return out;
}

template <typename T>
void read(const nlohmann::json& doc, const char* key, std::optional<T>& out) {
  auto it = doc.find(key);
  if (it == doc.end() || it->is_null()) {
    return;
  }
  try {
    out = it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("spec field '") + key + "' has the wrong type");
  }
}

template <typename T>
void read_unsigned(const nlohmann::json& doc, const char* key, std::optional<T>& out) {
  auto it = doc.find(key);
  if (it == doc.end() || it->is_null()) {
    return;
  }
  if (!it->is_number_unsigned()) {
    throw ConfigError(std::string("spec field '") + key + "' must be a non-negative integer");
  }
  out = it->get<T>();
}

AttackModel build_attack(const SpecFields& f, std::uint64_t seed) {
  const std::string name = f.attack.value_or("none");
  const std::uint64_t eve_seed = f.eve_seed.value_or(seed);
  std::optional<Basis> basis;
  if (f.eve_basis) {
    try {
      basis = parse_basis(*f.eve_basis);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (f.pns_fraction && name != "pns") {
    throw ConfigError("pns_fraction only applies to the pns attack");
  }
  if (f.intercept_fraction && name != "intercept") {
    throw ConfigError("intercept_fraction only applies to the intercept attack");
  }
  if (name == "none") {
    if (basis) {
      throw ConfigError("eve_basis needs an attack");
    }
    return {NoAttack{}, eve_seed};
  }
  if (name == "intercept") {
    return {InterceptResend{basis.value_or(Basis::Z), f.intercept_fraction.value_or(1.0)}, eve_seed};
  }
  if (name == "pns") {
    return {PhotonNumberSplitting{f.pns_fraction.value_or(1.0), basis.value_or(Basis::X)}, eve_seed};
  }
  if (name == "blinding") {
    return {Blinding{basis.value_or(Basis::X)}, eve_seed};
  }
  throw ConfigError("unknown attack '" + name + "'");
}

std::vector<BitString> parse_keys(const std::string& csv) {
  std::vector<BitString> keys;
  for (const auto& item : split_csv(csv)) {
    try {
      keys.push_back(BitString::parse(item));
    } catch (const std::invalid_argument& e) {
      throw ConfigError("bad key '" + item + "': " + e.what());
    }
  }
  return keys;
}

void setup_keys(const SpecFields& f, std::size_t n, std::uint64_t seed, ProtocolConfig& cfg) {
  if (f.keys && f.random_keys.value_or(false)) {
    throw ConfigError("keys and random_keys exclude each other");
  }
  std::optional<KeyLayout> layout;
  if (f.key_lengths) {
    try {
      layout = KeyLayout::parse(*f.key_lengths);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("bad key_lengths: ") + e.what());
    }
  }
  if (f.keys) {
    auto keys = parse_keys(*f.keys);
    if (!layout) {
      std::vector<std::size_t> lengths;
      for (const auto& k : keys) {
        lengths.push_back(k.size());
      }
      layout = KeyLayout(lengths);
    }
    cfg.partial_keys = std::move(keys);
  }
  if (!layout) {
    if (!f.m) {
      throw ConfigError("give m, key_lengths or keys");
    }
    if (*f.m == 0) {
      throw ConfigError("m must be positive");
    }
    if (n >= 2 && *f.m < n - 1) {
      cfg.oracle_keys = random_oracle_keys(n, *f.m, seed);
      return;
    }
    layout = KeyLayout::even(n - 1, *f.m);
  }
  if (f.m && *f.m != layout->total_length()) {
    throw ConfigError("m = " + std::to_string(*f.m) + " disagrees with key lengths " + layout->to_string());
  }
  cfg.layout = *layout;
}

std::string assertion_detail(double value) {
  std::ostringstream out;
  out.precision(17);
  out << value;
  return out.str();
}

}  // namespace

void SpecFields::merge(const SpecFields& o) {
  auto take = [](auto& mine, const auto& theirs) {
    if (theirs) {
      mine = theirs;
    }
  };
  take(n, o.n);
  take(m, o.m);
  take(key_lengths, o.key_lengths);
  take(keys, o.keys);
  take(random_keys, o.random_keys);
  take(seed, o.seed);
  take(engine, o.engine);
  take(source, o.source);
  take(max_restarts, o.max_restarts);
  take(shots, o.shots);
  take(threads, o.threads);
  take(out_dir, o.out_dir);
  take(attack, o.attack);
  take(eve_basis, o.eve_basis);
  take(pns_fraction, o.pns_fraction);
  take(intercept_fraction, o.intercept_fraction);
  take(eve_seed, o.eve_seed);
}

SpecFields spec_fields_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) {
    throw ConfigError("spec document must be a JSON object");
  }
  static const char* const known[] = {"n",       "m",         "key_lengths",  "keys",
                                      "random_keys", "seed",  "engine",       "source",
                                      "max_restarts", "shots", "threads",     "out_dir",
                                      "attack",  "eve_basis", "pns_fraction", "intercept_fraction",
                                      "eve_seed"};
  for (const auto& [key, value] : doc.items()) {
    if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
      throw ConfigError("unknown spec field '" + key + "'");
    }
  }
  SpecFields f;
  read_unsigned(doc, "n", f.n);
  read_unsigned(doc, "m", f.m);
  if (doc.contains("key_lengths") && !doc["key_lengths"].is_null()) {
    f.key_lengths = list_field(doc["key_lengths"], "key_lengths");
  }
  if (doc.contains("keys") && !doc["keys"].is_null()) {
    f.keys = list_field(doc["keys"], "keys");
  }
  read(doc, "random_keys", f.random_keys);
  read_unsigned(doc, "seed", f.seed);
  read(doc, "engine", f.engine);
  read(doc, "source", f.source);
  read_unsigned(doc, "max_restarts", f.max_restarts);
  read_unsigned(doc, "shots", f.shots);
  read_unsigned(doc, "threads", f.threads);
  read(doc, "out_dir", f.out_dir);
  read(doc, "attack", f.attack);
  read(doc, "eve_basis", f.eve_basis);
  read(doc, "pns_fraction", f.pns_fraction);
  read(doc, "intercept_fraction", f.intercept_fraction);
  read_unsigned(doc, "eve_seed", f.eve_seed);
  return f;
}

SpecFields load_spec_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open spec file " + path.string());
  }
  try {
    return spec_fields_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("spec file " + path.string() + " is not valid JSON: " + e.what());
  }
}

Engine auto_engine(std::size_t n, std::size_t m, const AttackModel& attack) {
  const std::size_t players = n + (attack.eve_holds_qubits() ? 1 : 0);
  return players * m <= kAutoDenseQubits ? Engine::Dense : Engine::Factorized;
}

ExperimentSpec build_spec(const SpecFields& f) {
  if (!f.seed) {
    throw ConfigError("a seed must be given explicitly");
  }
  ExperimentSpec spec;
  auto& cfg = spec.config;
  cfg.seed = *f.seed;
  cfg.n = f.n.value_or(3);
  if (cfg.n < 3) {
    throw ConfigError("the game needs n >= 3 players, got " + std::to_string(cfg.n));
  }
  setup_keys(f, cfg.n, cfg.seed, cfg);
  spec.attack = build_attack(f, cfg.seed);
  if (f.source) {
    cfg.source = parse_source(*f.source);
  } else if (std::holds_alternative<Blinding>(spec.attack.kind)) {
    cfg.source = Source::TrustedThirdParty;
  }
  cfg.engine = f.engine ? parse_engine(*f.engine) : auto_engine(cfg.n, cfg.m(), spec.attack);
  cfg.max_restarts = f.max_restarts.value_or(cfg.max_restarts);
  spec.shots = f.shots.value_or(1);
  spec.threads = f.threads.value_or(1);
  if (f.out_dir) {
    spec.out_dir = *f.out_dir;
  }
  spec.validate();
  return spec;
}

void ExperimentSpec::validate() const {
  config.validate(attack);
  if (shots == 0) {
    throw ConfigError("shots must be at least 1");
  }
  if (threads == 0) {
    throw ConfigError("threads must be at least 1");
  }
}

bool ExperimentResult::ok() const {
  for (const auto& a : assertions) {
    if (!a.pass) {
      return false;
    }
  }
  return true;
}

ExperimentResult run_experiment(const ExperimentSpec& spec, const TranscriptSink& sink) {
  spec.validate();
  const auto secret = reconstruct_secret(BitString::zeros(spec.config.m()), resolve_oracle_keys(spec.config));
  BatchAccumulator acc(secret);

  for (std::size_t first = 0; first < spec.shots; first += kChunkShots) {
    const std::size_t count = std::min(kChunkShots, spec.shots - first);
    std::vector<std::optional<Transcript>> chunk(count);
    const std::size_t workers = std::min(spec.threads, count);
    std::vector<std::exception_ptr> errors(workers);
    auto work = [&](std::size_t worker) {
      try {
        for (std::size_t k = worker; k < count; k += workers) {
          chunk[k] = run_protocol(spec.config, spec.attack, first + k);
        }
      } catch (...) {
        errors[worker] = std::current_exception();
      }
    };
    if (workers == 1) {
      work(0);
    } else {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back(work, w);
      }
    }
    for (const auto& e : errors) {
      if (e) {
        std::rethrow_exception(e);
      }
    }
    for (const auto& t : chunk) {
      acc.add(*t);
      if (sink) {
        sink(*t);
      }
    }
  }

  ExperimentResult result{secret, acc.summary(), acc.histogram(OutcomeRound::First), std::nullopt, {}};
  const bool attacked = spec.attack.active();
  if (!attacked) {
    result.assertions.push_back({"fcp_all_shots", result.summary.fcp_fraction == 1.0,
                                 assertion_detail(result.summary.fcp_fraction)});
    result.assertions.push_back({"support_parity_valid", acc.parity_violations() == 0,
                                 std::to_string(acc.parity_violations()) + " violations"});
    if (result.histogram) {
      const auto classes = valid_outcome_count(spec.config.n, spec.config.m(), OutcomeRound::First);
      result.uniformity = chi_square_uniform(*result.histogram, classes);
    }
  }
  const auto held = [&]() -> std::optional<Basis> {
    if (const auto* pns = std::get_if<PhotonNumberSplitting>(&spec.attack.kind)) {
      return pns->eve_basis;
    }
    if (const auto* bl = std::get_if<Blinding>(&spec.attack.kind)) {
      return bl->eve_basis;
    }
    return std::nullopt;
  }();
  if (held == Basis::X) {
    const double fraction = result.summary.eve->extended_parity_fraction.value_or(0.0);
    result.assertions.push_back({"extended_parity_all_shots", fraction == 1.0, assertion_detail(fraction)});
  }
  return result;
}

nlohmann::ordered_json to_json(const ExperimentSpec& spec) {
  const auto& cfg = spec.config;
  nlohmann::ordered_json j;
  j["n"] = cfg.n;
  j["m"] = cfg.m();
  if (cfg.oracle_keys) {
    j["layout"] = nullptr;
  } else {
    j["layout"] = std::vector<std::size_t>(cfg.layout.lengths().begin(), cfg.layout.lengths().end());
  }
  std::vector<std::string> keys;
  for (const auto& k : cfg.oracle_keys ? *cfg.oracle_keys : resolve_partial_keys(cfg)) {
    keys.push_back(k.to_string());
  }
  j[cfg.oracle_keys ? "oracle_keys" : "keys"] = keys;
  j["seed"] = cfg.seed;
  j["engine"] = to_string(cfg.engine);
  j["source"] = to_string(cfg.source);
  j["max_restarts"] = cfg.max_restarts;
  j["shots"] = spec.shots;
  nlohmann::ordered_json attack;
  attack["kind"] = spec.attack.name();
  attack["eve_seed"] = spec.attack.eve_seed;
  if (const auto* ir = std::get_if<InterceptResend>(&spec.attack.kind)) {
    attack["basis"] = to_string(ir->basis);
    attack["fraction"] = ir->fraction;
  } else if (const auto* pns = std::get_if<PhotonNumberSplitting>(&spec.attack.kind)) {
    attack["eve_basis"] = to_string(pns->eve_basis);
    attack["fraction"] = pns->fraction;
  } else if (const auto* bl = std::get_if<Blinding>(&spec.attack.kind)) {
    attack["eve_basis"] = to_string(bl->eve_basis);
  }
  j["attack"] = attack;
  return j;
}

nlohmann::ordered_json summary_document(const ExperimentSpec& spec, const ExperimentResult& result) {
  nlohmann::ordered_json j;
  j["config"] = to_json(spec);
  j["s"] = result.secret.to_string();
  j["summary"] = to_json(result.summary);
  if (result.histogram) {
    j["histogram_classes"] = result.histogram->size();
    j["histogram_round"] = "first_attempt";
  } else {
    j["histogram_classes"] = nullptr;
    j["histogram_round"] = "omitted: outcome space exceeds 2^20 classes";
  }
  j["uniformity"] = result.uniformity ? to_json(*result.uniformity) : nlohmann::ordered_json(nullptr);
  auto assertions = nlohmann::ordered_json::array();
  for (const auto& a : result.assertions) {
    assertions.push_back({{"name", a.name}, {"pass", a.pass}, {"detail", a.detail}});
  }
  j["assertions"] = assertions;
  j["ok"] = result.ok();
  return j;
}

ExperimentResult run_and_write(const ExperimentSpec& spec) {
  if (!spec.out_dir) {
    throw ConfigError("no output directory given");
  }
  const auto& dir = *spec.out_dir;
  std::filesystem::create_directories(dir);
  std::ofstream transcripts(dir / "transcripts.jsonl", std::ios::binary);
  if (!transcripts) {
    throw std::runtime_error("cannot write " + (dir / "transcripts.jsonl").string());
  }
  auto result = run_experiment(spec, [&](const Transcript& t) { transcripts << to_json(t).dump() << '\n'; });
  transcripts.close();

  std::ofstream histogram(dir / "histogram.csv", std::ios::binary);
  write_histogram_csv(histogram, result.histogram.value_or(Histogram{}));
  std::ofstream summary(dir / "summary.json", std::ios::binary);
  summary << summary_document(spec, result).dump(2) << '\n';
  if (!histogram || !summary) {
    throw std::runtime_error("cannot write artifacts into " + dir.string());
  }
  return result;
}

}  // namespace qsa
