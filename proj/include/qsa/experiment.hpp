#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qsa/analysis.hpp"
#include "qsa/protocol.hpp"

namespace qsa {

/// A batch of shots of one configuration plus where to put the results.
struct ExperimentSpec {
  ProtocolConfig config;
  AttackModel attack;
  std::size_t shots = 1;
  std::size_t threads = 1;
  std::optional<std::filesystem::path> out_dir;

  /// Throws ConfigError.
  void validate() const;
};

/// Fields of a flat spec document or of the command line; unset fields
/// fall back to defaults when the spec is built.
struct SpecFields {
  std::optional<std::size_t> n;
  std::optional<std::size_t> m;
  std::optional<std::string> key_lengths;  // "2,2"
  std::optional<std::string> keys;         // "01,10", agent 0 first
  std::optional<bool> random_keys;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> engine;
  std::optional<std::string> source;
  std::optional<std::size_t> max_restarts;
  std::optional<std::size_t> shots;
  std::optional<std::size_t> threads;
  std::optional<std::string> out_dir;
  std::optional<std::string> attack;
  std::optional<std::string> eve_basis;
  std::optional<double> pns_fraction;
  std::optional<double> intercept_fraction;
  std::optional<std::uint64_t> eve_seed;

  /// Fields set in `over` replace ours.
  void merge(const SpecFields& over);
};

/// Reads a flat JSON object whose keys are the SpecFields names. Lists
/// (keys, key_lengths) may be arrays or comma-separated strings. Unknown
/// keys are rejected. Throws ConfigError.
SpecFields spec_fields_from_json(const nlohmann::json& doc);
SpecFields load_spec_file(const std::filesystem::path& path);

/// Resolves defaults and builds a validated spec. The seed is mandatory.
/// Without keys or key lengths the layout is an even split of m; when
/// m < n-1 the agents get random m-bit oracle keys instead. Throws
/// ConfigError.
ExperimentSpec build_spec(const SpecFields& fields);

/// Default engine: dense while the whole state stays small.
Engine auto_engine(std::size_t n, std::size_t m, const AttackModel& attack);

inline constexpr std::size_t kAutoDenseQubits = 12;

struct AssertionResult {
  std::string name;
  bool pass;
  std::string detail;
};

struct ExperimentResult {
  BitString secret;
  BatchSummary summary;
  std::optional<Histogram> histogram;  // first-attempt joint outcomes
  std::optional<UniformityVerdict> uniformity;
  std::vector<AssertionResult> assertions;

  bool ok() const;
};

/// Called with each transcript in shot order.
using TranscriptSink = std::function<void(const Transcript&)>;

/// Runs every shot, `threads` at a time. Transcripts reach `sink` in shot
/// order whatever the thread count.
ExperimentResult run_experiment(const ExperimentSpec& spec, const TranscriptSink& sink = {});

/// Runs the experiment and writes transcripts.jsonl, histogram.csv and
/// summary.json into spec.out_dir (which must be set).
ExperimentResult run_and_write(const ExperimentSpec& spec);

nlohmann::ordered_json to_json(const ExperimentSpec& spec);
nlohmann::ordered_json summary_document(const ExperimentSpec& spec, const ExperimentResult& result);

}  // namespace qsa
