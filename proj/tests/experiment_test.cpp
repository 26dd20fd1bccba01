#include "qsa/experiment.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <iterator>

using namespace qsa;

namespace {

SpecFields base_fields() {
  SpecFields f;
  f.n = 3;
  f.keys = "01,10";
  f.seed = 42;
  return f;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class TempDir {
 public:
  explicit TempDir(const std::string& name)
      : path_(std::filesystem::temp_directory_path() / ("qsa-test-" + name)) {
    std::filesystem::remove_all(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace

TEST(BuildSpec, seed_is_mandatory) {
  SpecFields f = base_fields();
  f.seed.reset();
  EXPECT_THROW(build_spec(f), ConfigError);
}

TEST(BuildSpec, keys_fix_the_layout) {
  auto spec = build_spec(base_fields());
  EXPECT_EQ(spec.config.layout.to_string(), KeyLayout({2, 2}).to_string());
  EXPECT_EQ(spec.config.m(), 4u);
  EXPECT_EQ(spec.config.engine, Engine::Dense);
  EXPECT_EQ(spec.shots, 1u);
  EXPECT_FALSE(spec.attack.active());
}

TEST(BuildSpec, m_alone_splits_evenly) {
  SpecFields f;
  f.n = 4;
  f.m = 7;
  f.seed = 1;
  auto spec = build_spec(f);
  EXPECT_FALSE(spec.config.oracle_keys);
  EXPECT_EQ(spec.config.layout.total_length(), 7u);
  EXPECT_EQ(spec.config.layout.lengths().size(), 3u);
}

TEST(BuildSpec, short_m_uses_oracle_keys) {
  SpecFields f;
  f.n = 6;
  f.m = 2;
  f.seed = 1;
  auto spec = build_spec(f);
  ASSERT_TRUE(spec.config.oracle_keys);
  EXPECT_EQ(spec.config.oracle_keys->size(), 5u);
  EXPECT_EQ(spec.config.m(), 2u);
}

TEST(BuildSpec, inconsistent_inputs_rejected) {
  SpecFields f = base_fields();
  f.m = 5;
  EXPECT_THROW(build_spec(f), ConfigError);

  f = base_fields();
  f.random_keys = true;
  EXPECT_THROW(build_spec(f), ConfigError);

  f = base_fields();
  f.key_lengths = "1,3";
  EXPECT_THROW(build_spec(f), ConfigError);

  f = base_fields();
  f.keys = "01,1x";
  EXPECT_THROW(build_spec(f), ConfigError);

  f = base_fields();
  f.n = 2;
  EXPECT_THROW(build_spec(f), ConfigError);

  SpecFields none;
  none.seed = 3;
  EXPECT_THROW(build_spec(none), ConfigError);
}

TEST(BuildSpec, random_keys_with_lengths) {
  SpecFields f;
  f.n = 3;
  f.key_lengths = "2,2";
  f.random_keys = true;
  f.seed = 11;
  auto spec = build_spec(f);
  EXPECT_FALSE(spec.config.partial_keys);
  auto result = run_experiment(spec);
  EXPECT_EQ(result.summary.fcp_fraction, 1.0);
  EXPECT_TRUE(result.ok());
}

TEST(BuildSpec, attack_defaults) {
  SpecFields f = base_fields();
  f.attack = "blinding";
  auto spec = build_spec(f);
  EXPECT_EQ(spec.config.source, Source::TrustedThirdParty);
  EXPECT_EQ(std::get<Blinding>(spec.attack.kind).eve_basis, Basis::X);
  EXPECT_EQ(spec.attack.eve_seed, 42u);
  EXPECT_EQ(spec.config.engine, Engine::Factorized);  // 4 players x 4 bits > 12 qubits

  f = base_fields();
  f.attack = "intercept";
  f.intercept_fraction = 0.5;
  f.eve_seed = 9;
  spec = build_spec(f);
  const auto& ir = std::get<InterceptResend>(spec.attack.kind);
  EXPECT_EQ(ir.basis, Basis::Z);
  EXPECT_EQ(ir.fraction, 0.5);
  EXPECT_EQ(spec.attack.eve_seed, 9u);
}

TEST(BuildSpec, attack_parameter_mismatches) {
  SpecFields f = base_fields();
  f.pns_fraction = 0.5;
  EXPECT_THROW(build_spec(f), ConfigError);

  f = base_fields();
  f.attack = "pns";
  f.intercept_fraction = 0.5;
  EXPECT_THROW(build_spec(f), ConfigError);

  f = base_fields();
  f.eve_basis = "x";
  EXPECT_THROW(build_spec(f), ConfigError);

  f = base_fields();
  f.attack = "pns";
  f.pns_fraction = 1.5;
  EXPECT_THROW(build_spec(f), std::invalid_argument);

  f = base_fields();
  f.attack = "blinding";
  f.source = "spymaster";
  EXPECT_THROW(build_spec(f), ConfigError);

  f = base_fields();
  f.attack = "teleport";
  EXPECT_THROW(build_spec(f), ConfigError);
}

TEST(BuildSpec, zero_shots_or_threads_rejected) {
  SpecFields f = base_fields();
  f.shots = 0;
  EXPECT_THROW(build_spec(f), ConfigError);
  f = base_fields();
  f.threads = 0;
  EXPECT_THROW(build_spec(f), ConfigError);
}

TEST(SpecJson, arrays_and_strings) {
  auto f = spec_fields_from_json(nlohmann::json::parse(
      R"({"n": 3, "keys": ["01", "10"], "seed": 42, "shots": 10, "attack": "pns", "pns_fraction": 0.5})"));
  EXPECT_EQ(*f.keys, "01,10");
  auto g = spec_fields_from_json(nlohmann::json::parse(R"({"key_lengths": [1, 3], "seed": 1})"));
  EXPECT_EQ(*g.key_lengths, "1,3");
  auto spec = build_spec(f);
  EXPECT_EQ(std::get<PhotonNumberSplitting>(spec.attack.kind).fraction, 0.5);
}

TEST(SpecJson, rejects_unknown_and_mistyped) {
  EXPECT_THROW(spec_fields_from_json(nlohmann::json::parse(R"({"n": 3, "sead": 1})")), ConfigError);
  EXPECT_THROW(spec_fields_from_json(nlohmann::json::parse(R"({"n": -3})")), ConfigError);
  EXPECT_THROW(spec_fields_from_json(nlohmann::json::parse(R"({"engine": 4})")), ConfigError);
  EXPECT_THROW(spec_fields_from_json(nlohmann::json::parse(R"([1, 2])")), ConfigError);
  EXPECT_THROW(spec_fields_from_json(nlohmann::json::parse(R"({"keys": [true]})")), ConfigError);
}

TEST(SpecJson, flags_override_file_fields) {
  TempDir dir("spec");
  std::filesystem::create_directories(dir.path());
  const auto file = dir.path() / "spec.json";
  std::ofstream(file) << R"({"n": 4, "m": 6, "seed": 5, "shots": 3})";
  SpecFields merged = load_spec_file(file);
  SpecFields flags;
  flags.shots = 7;
  merged.merge(flags);
  EXPECT_EQ(*merged.n, 4u);
  EXPECT_EQ(*merged.shots, 7u);
  EXPECT_EQ(*merged.seed, 5u);
  EXPECT_THROW(load_spec_file(dir.path() / "missing.json"), ConfigError);
  std::ofstream(dir.path() / "bad.json") << "{not json";
  EXPECT_THROW(load_spec_file(dir.path() / "bad.json"), ConfigError);
}

TEST(RunExperiment, toy_batch_summary) {
  SpecFields f = base_fields();
  f.shots = 4096;
  auto spec = build_spec(f);
  auto result = run_experiment(spec);
  EXPECT_EQ(result.secret.to_string(), "1001");
  EXPECT_EQ(result.summary.fcp_fraction, 1.0);
  EXPECT_EQ(result.summary.reconstruction_success, 1.0);
  ASSERT_TRUE(result.histogram);
  EXPECT_LE(result.histogram->size(), 256u);
  ASSERT_TRUE(result.uniformity);
  EXPECT_TRUE(result.uniformity->pass);
  EXPECT_EQ(result.uniformity->dof, 255u);
  EXPECT_TRUE(result.ok());
  const auto doc = summary_document(spec, result);
  EXPECT_EQ(doc["s"], "1001");
  EXPECT_EQ(doc["summary"]["fcp_fraction"], 1.0);
  EXPECT_EQ(doc["histogram_classes"], result.histogram->size());
  EXPECT_TRUE(doc["ok"].get<bool>());
}

TEST(RunExperiment, sink_sees_shots_in_order) {
  SpecFields f = base_fields();
  f.shots = 300;
  f.threads = 4;
  std::vector<std::uint64_t> order;
  run_experiment(build_spec(f), [&](const Transcript& t) { order.push_back(t.shot); });
  ASSERT_EQ(order.size(), 300u);
  for (std::size_t i = 0; i < order.size(); ++i) {
    EXPECT_EQ(order[i], i);
  }
}

TEST(RunExperiment, attacked_assertions) {
  SpecFields f = base_fields();
  f.attack = "pns";
  f.shots = 500;
  auto result = run_experiment(build_spec(f));
  ASSERT_TRUE(result.summary.eve);
  EXPECT_FALSE(result.uniformity);
  ASSERT_EQ(result.assertions.size(), 1u);
  EXPECT_EQ(result.assertions[0].name, "extended_parity_all_shots");
  EXPECT_TRUE(result.ok());

  f.eve_basis = "z";
  result = run_experiment(build_spec(f));
  EXPECT_TRUE(result.assertions.empty());
}

TEST(RunExperiment, large_outcome_space_skips_histogram) {
  SpecFields f;
  f.n = 6;
  f.m = 8;
  f.seed = 3;
  f.shots = 50;
  auto spec = build_spec(f);
  auto result = run_experiment(spec);
  EXPECT_FALSE(result.histogram);
  EXPECT_FALSE(result.uniformity);
  EXPECT_TRUE(result.ok());
  EXPECT_TRUE(summary_document(spec, result)["histogram_classes"].is_null());
}

TEST(RunAndWrite, artifacts_identical_across_thread_counts) {
  TempDir dir("determinism");
  std::string first[3];
  int run = 0;
  for (std::size_t threads : {1, 8}) {
    SpecFields f = base_fields();
    f.shots = 5000;
    f.attack = "intercept";
    f.intercept_fraction = 0.5;
    f.threads = threads;
    f.out_dir = (dir.path() / std::to_string(threads)).string();
    auto spec = build_spec(f);
    run_and_write(spec);
    const std::string files[3] = {slurp(*spec.out_dir / "transcripts.jsonl"),
                                  slurp(*spec.out_dir / "histogram.csv"),
                                  slurp(*spec.out_dir / "summary.json")};
    for (int i = 0; i < 3; ++i) {
      EXPECT_FALSE(files[i].empty());
      if (run == 0) {
        first[i] = files[i];
      } else {
        EXPECT_EQ(files[i], first[i]) << "artifact " << i;
      }
    }
    ++run;
  }
}

TEST(RunAndWrite, transcripts_one_line_per_shot) {
  TempDir dir("lines");
  SpecFields f = base_fields();
  f.shots = 17;
  f.out_dir = dir.path().string();
  run_and_write(build_spec(f));
  std::ifstream in(dir.path() / "transcripts.jsonl");
  std::string line;
  std::size_t count = 0;
  while (std::getline(in, line)) {
    auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j["shot"], count);
    EXPECT_EQ(j["s"], "1001");
    ++count;
  }
  EXPECT_EQ(count, 17u);
  const auto csv = slurp(dir.path() / "histogram.csv");
  EXPECT_EQ(csv.rfind("outcome,count,probability\n", 0), 0u);
}

TEST(RunAndWrite, needs_output_directory) {
  EXPECT_THROW(run_and_write(build_spec(base_fields())), ConfigError);
}

TEST(ConfigJson, omits_run_only_settings) {
  SpecFields f = base_fields();
  f.threads = 8;
  f.out_dir = "somewhere";
  const auto j = to_json(build_spec(f));
  EXPECT_FALSE(j.contains("threads"));
  EXPECT_FALSE(j.contains("out_dir"));
  EXPECT_EQ(j["keys"][1], "10");
  EXPECT_EQ(j["attack"]["kind"], "none");
}
