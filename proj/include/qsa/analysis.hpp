#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "json.hpp"
#include "qsa/bitkit.hpp"
#include "qsa/protocol.hpp"

namespace qsa {

inline constexpr double kUniformityThreshold = 1e-3;
inline constexpr std::size_t kHistogramClassLimit = std::size_t{1} << 20;

/// Transcripts of one configuration and the secret planted in it.
struct ShotBatch {
  std::vector<Transcript> transcripts;
  BitString secret;

  std::size_t shots() const { return transcripts.size(); }
};

struct EveSummary {
  double success_fraction;
  double alice_corrupted_fraction;
  double restart_aware_success_fraction;
  double informed_success_fraction;
  std::optional<double> extended_parity_fraction;
};

struct BatchSummary {
  std::size_t shots;
  double fcp_fraction;
  double reconstruction_success;
  /// Shots that needed at least one restart.
  double restart_fraction;
  std::map<std::size_t, std::size_t> restart_counts;  // restarts -> shots
  std::optional<EveSummary> eve;
};

/// Throws std::invalid_argument on an empty batch or mixed configurations.
BatchSummary verify_batch(const ShotBatch& batch);

enum class OutcomeRound {
  First,     // the first attempt of every shot: raw circuit statistics
  Accepted,  // the attempt Alice accepted (never has a = 0)
};

using Histogram = std::map<BitString, std::size_t>;

/// The configuration fields two transcripts of one batch must share.
struct ConfigEcho {
  std::size_t n;
  std::size_t key_bits;
  std::optional<KeyLayout> layout;
  Source source;
  Engine engine;
  std::uint64_t seed;
  std::string attack;
  BitString secret;

  static ConfigEcho of(const Transcript& t) {
    return {t.n, t.key_bits, t.layout, t.source, t.engine, t.seed, t.attack, t.secret};
  }
  friend bool operator==(const ConfigEcho&, const ConfigEcho&) = default;
};

/// Streaming form of verify_batch and outcome_histogram, for batches too
/// large to keep in memory. Histograms are only kept while the outcome
/// space fits the 2^20 guard.
class BatchAccumulator {
 public:
  explicit BatchAccumulator(BitString secret) : secret_(std::move(secret)) {}

  /// Throws std::invalid_argument if `t` comes from another configuration.
  void add(const Transcript& t);

  std::size_t shots() const { return shots_; }
  const BitString& secret() const { return secret_; }
  /// Throws std::invalid_argument when nothing was added.
  BatchSummary summary() const;
  /// nullopt when the outcome space exceeds the guard.
  const std::optional<Histogram>& histogram(OutcomeRound round) const {
    return round == OutcomeRound::First ? first_ : accepted_;
  }
  /// Shots whose first-attempt joint outcome broke the parity constraint.
  std::size_t parity_violations() const { return parity_violations_; }

 private:
  BitString secret_;
  std::optional<ConfigEcho> reference_;
  std::size_t shots_ = 0;
  std::size_t fcp_ = 0;
  std::size_t recovered_ = 0;
  std::size_t restarted_ = 0;
  std::map<std::size_t, std::size_t> restart_counts_;
  std::size_t eve_runs_ = 0;
  std::size_t eve_success_ = 0;
  std::size_t corrupted_ = 0;
  std::size_t aware_ = 0;
  std::size_t informed_ = 0;
  std::size_t parity_runs_ = 0;
  std::size_t parity_ok_ = 0;
  std::size_t parity_violations_ = 0;
  std::optional<Histogram> first_;
  std::optional<Histogram> accepted_;
};

/// Counts keyed by a || y_{n-2} || ... || y_0. Throws std::length_error if
/// the outcome space exceeds 2^20 classes.
Histogram outcome_histogram(const ShotBatch& batch, OutcomeRound round = OutcomeRound::First);

/// Counts of one player's register (player n-1 is Alice).
Histogram register_histogram(const ShotBatch& batch, std::size_t player,
                             OutcomeRound round = OutcomeRound::First);

/// Number of parity-valid joint outcomes for the round: 2^{m(n-1)}, minus
/// the 2^{m(n-2)} outcomes with a = 0 for accepted attempts.
std::uint64_t valid_outcome_count(std::size_t n, std::size_t m, OutcomeRound round);

struct UniformityVerdict {
  double statistic;
  std::size_t dof;
  double p_value;
  /// Every class expects at least 5 counts.
  bool reliable;
  bool pass;  // reliable and p > threshold
};

/// Pearson goodness-of-fit against the uniform law over `classes`
/// categories; `counts` lists the observed classes, absent ones count 0.
UniformityVerdict chi_square_uniform(std::span<const std::size_t> counts, std::size_t classes,
                                     double threshold = kUniformityThreshold);
UniformityVerdict chi_square_uniform(const Histogram& counts, std::size_t classes,
                                     double threshold = kUniformityThreshold);

/// Chi-square test of homogeneity for two samples over the union of their
/// categories.
UniformityVerdict chi_square_two_sample(const Histogram& first, const Histogram& second,
                                        double threshold = kUniformityThreshold);

/// Q(a, x) = Gamma(a, x) / Gamma(a), relative accuracy 1e-10.
double regularized_gamma_q(double a, double x);
/// Survival function of the chi-square law with `dof` degrees of freedom.
double chi_square_survival(double statistic, double dof);

/// Kolmogorov-Smirnov distance between the empirical law of `samples` and
/// Uniform(0, 1).
double ks_uniform_distance(std::vector<double> samples);

/// Binomial z-score of `hits` successes in `trials` against probability p.
double binomial_z(std::size_t hits, std::size_t trials, double p);

void write_histogram_csv(std::ostream& out, const Histogram& histogram);

nlohmann::ordered_json to_json(const BatchSummary& summary);
nlohmann::ordered_json to_json(const UniformityVerdict& verdict);

}  // namespace qsa
