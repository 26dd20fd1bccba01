#include "qsa/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace qsa {

namespace {

constexpr double kGammaEps = 1e-15;
constexpr int kGammaMaxIter = 100000;

void require_same_config(const ConfigEcho& ref, const Transcript& t) {
  if (!(ConfigEcho::of(t) == ref)) {
    throw std::invalid_argument("batch mixes transcripts from different configurations (shot " +
                                std::to_string(t.shot) + ")");
  }
}

std::size_t attempt_index(const Transcript& t, OutcomeRound round) {
  return round == OutcomeRound::First ? 0 : t.attempts.size() - 1;
}

// Lower series, valid for x < a + 1.
double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int k = 1; k < kGammaMaxIter; ++k) {
    term *= x / (a + k);
    sum += term;
    if (std::abs(term) < std::abs(sum) * kGammaEps) {
      break;
    }
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper continued fraction (modified Lentz), valid for x >= a + 1.
double gamma_q_fraction(double a, double x) {
  const double tiny = std::numeric_limits<double>::min() / kGammaEps;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kGammaMaxIter; ++i) {
    double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) {
      d = tiny;
    }
    c = b + an / c;
    if (std::abs(c) < tiny) {
      c = tiny;
    }
    d = 1.0 / d;
    double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kGammaEps) {
      break;
    }
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

UniformityVerdict make_verdict(double statistic, std::size_t dof, bool reliable, double threshold) {
  double p = chi_square_survival(statistic, static_cast<double>(dof));
  return {statistic, dof, p, reliable, reliable && p > threshold};
}

}  // namespace

void BatchAccumulator::add(const Transcript& t) {
  if (!reference_) {
    reference_ = ConfigEcho::of(t);
    if (t.key_bits * (t.n - 1) <= 20) {
      first_.emplace();
      accepted_.emplace();
    }
  } else {
    require_same_config(*reference_, t);
  }
  ++shots_;
  fcp_ += fcp_holds(t, secret_);
  recovered_ += t.reconstructed == secret_;
  restarted_ += t.restarts > 0;
  ++restart_counts_[t.restarts];
  for (const auto& r : t.attack_events) {
    ++eve_runs_;
    eve_success_ += r.success;
    corrupted_ += r.alice_corrupted;
    aware_ += r.restart_aware_success;
    informed_ += r.informed_success;
    if (r.extended_parity) {
      ++parity_runs_;
      parity_ok_ += *r.extended_parity;
    }
  }
  const auto& first = t.attempts.front();
  if (reconstruct_secret(first.a, first.ys) != secret_) {
    ++parity_violations_;
  }
  if (first_) {
    ++(*first_)[t.joint_outcome(0)];
    ++(*accepted_)[t.joint_outcome(t.attempts.size() - 1)];
  }
}

BatchSummary BatchAccumulator::summary() const {
  if (shots_ == 0) {
    throw std::invalid_argument("cannot verify an empty batch");
  }
  const double shots = static_cast<double>(shots_);
  BatchSummary out{shots_, fcp_ / shots, recovered_ / shots, restarted_ / shots, restart_counts_,
                   std::nullopt};
  if (eve_runs_ > 0) {
    const double runs = static_cast<double>(eve_runs_);
    out.eve = EveSummary{eve_success_ / runs, corrupted_ / runs, aware_ / runs, informed_ / runs,
                         std::nullopt};
    if (parity_runs_ > 0) {
      out.eve->extended_parity_fraction = static_cast<double>(parity_ok_) / parity_runs_;
    }
  }
  return out;
}

BatchSummary verify_batch(const ShotBatch& batch) {
  if (batch.transcripts.empty()) {
    throw std::invalid_argument("cannot verify an empty batch");
  }
  BatchAccumulator acc(batch.secret);
  for (const auto& t : batch.transcripts) {
    acc.add(t);
  }
  return acc.summary();
}

std::uint64_t valid_outcome_count(std::size_t n, std::size_t m, OutcomeRound round) {
  const std::size_t free_bits = m * (n - 1);
  if (free_bits >= 63) {
    throw std::length_error("outcome space too large");
  }
  std::uint64_t all = std::uint64_t{1} << free_bits;
  return round == OutcomeRound::First ? all : all - (std::uint64_t{1} << (m * (n - 2)));
}

Histogram outcome_histogram(const ShotBatch& batch, OutcomeRound round) {
  if (batch.transcripts.empty()) {
    return {};
  }
  const auto ref = ConfigEcho::of(batch.transcripts.front());
  const std::size_t free_bits = ref.key_bits * (ref.n - 1);
  if (free_bits > 20) {
    throw std::length_error("outcome histogram would need 2^" + std::to_string(free_bits) +
                            " classes, limit is 2^20");
  }
  Histogram counts;
  for (const auto& t : batch.transcripts) {
    require_same_config(ref, t);
    ++counts[t.joint_outcome(attempt_index(t, round))];
  }
  return counts;
}

Histogram register_histogram(const ShotBatch& batch, std::size_t player, OutcomeRound round) {
  Histogram counts;
  for (const auto& t : batch.transcripts) {
    const auto& at = t.attempts.at(attempt_index(t, round));
    ++counts[player == alice_index(t.n) ? at.a : at.ys.at(player)];
  }
  return counts;
}

UniformityVerdict chi_square_uniform(std::span<const std::size_t> counts, std::size_t classes,
                                     double threshold) {
  if (classes < 2 || counts.size() > classes) {
    throw std::invalid_argument("chi-square needs at least two classes and no more observed "
                                "classes than expected ones");
  }
  double total = 0.0;
  for (auto c : counts) {
    total += static_cast<double>(c);
  }
  const double expected = total / static_cast<double>(classes);
  double statistic = 0.0;
  for (auto c : counts) {
    double diff = static_cast<double>(c) - expected;
    statistic += diff * diff / expected;
  }
  // classes that never showed up
  statistic += static_cast<double>(classes - counts.size()) * expected;
  return make_verdict(statistic, classes - 1, expected >= 5.0, threshold);
}

UniformityVerdict chi_square_uniform(const Histogram& counts, std::size_t classes, double threshold) {
  std::vector<std::size_t> values;
  values.reserve(counts.size());
  for (const auto& [outcome, count] : counts) {
    values.push_back(count);
  }
  return chi_square_uniform(values, classes, threshold);
}

UniformityVerdict chi_square_two_sample(const Histogram& first, const Histogram& second,
                                        double threshold) {
  std::map<BitString, std::pair<double, double>> table;
  double n1 = 0.0;
  double n2 = 0.0;
  for (const auto& [k, c] : first) {
    table[k].first += static_cast<double>(c);
    n1 += static_cast<double>(c);
  }
  for (const auto& [k, c] : second) {
    table[k].second += static_cast<double>(c);
    n2 += static_cast<double>(c);
  }
  if (table.size() < 2 || n1 == 0.0 || n2 == 0.0) {
    throw std::invalid_argument("two-sample test needs two non-empty samples over >= 2 classes");
  }
  const double total = n1 + n2;
  double statistic = 0.0;
  bool reliable = true;
  for (const auto& [k, row] : table) {
    const double col = row.first + row.second;
    const double e1 = n1 * col / total;
    const double e2 = n2 * col / total;
    reliable = reliable && e1 >= 5.0 && e2 >= 5.0;
    statistic += (row.first - e1) * (row.first - e1) / e1 + (row.second - e2) * (row.second - e2) / e2;
  }
  return make_verdict(statistic, table.size() - 1, reliable, threshold);
}

double regularized_gamma_q(double a, double x) {
  if (!(a > 0.0) || x < 0.0) {
    throw std::domain_error("regularized_gamma_q needs a > 0 and x >= 0");
  }
  if (x == 0.0) {
    return 1.0;
  }
  if (x < a + 1.0) {
    return 1.0 - gamma_p_series(a, x);
  }
  return gamma_q_fraction(a, x);
}

double chi_square_survival(double statistic, double dof) {
  if (statistic <= 0.0) {
    return 1.0;
  }
  return regularized_gamma_q(dof / 2.0, statistic / 2.0);
}

double ks_uniform_distance(std::vector<double> samples) {
  if (samples.empty()) {
    throw std::invalid_argument("KS distance of an empty sample");
  }
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    d = std::max({d, (i + 1) / n - samples[i], samples[i] - i / n});
  }
  return d;
}

double binomial_z(std::size_t hits, std::size_t trials, double p) {
  const double n = static_cast<double>(trials);
  const double sigma = std::sqrt(n * p * (1.0 - p));
  const double diff = static_cast<double>(hits) - n * p;
  if (sigma == 0.0) {
    return diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
  }
  return diff / sigma;
}

void write_histogram_csv(std::ostream& out, const Histogram& histogram) {
  std::size_t total = 0;
  for (const auto& [outcome, count] : histogram) {
    total += count;
  }
  out << "outcome,count,probability\n";
  char prob[32];
  for (const auto& [outcome, count] : histogram) {
    std::snprintf(prob, sizeof(prob), "%.10g", static_cast<double>(count) / static_cast<double>(total));
    out << outcome.to_string() << ',' << count << ',' << prob << '\n';
  }
}

nlohmann::ordered_json to_json(const UniformityVerdict& v) {
  return {{"chi_square", v.statistic}, {"dof", v.dof}, {"p_value", v.p_value},
          {"reliable", v.reliable},    {"pass", v.pass}};
}

nlohmann::ordered_json to_json(const BatchSummary& s) {
  nlohmann::ordered_json j;
  j["shots"] = s.shots;
  j["fcp_fraction"] = s.fcp_fraction;
  j["reconstruction_success"] = s.reconstruction_success;
  j["restart_fraction"] = s.restart_fraction;
  auto counts = nlohmann::ordered_json::object();
  for (const auto& [restarts, shots] : s.restart_counts) {
    counts[std::to_string(restarts)] = shots;
  }
  j["restart_counts"] = counts;
  if (s.eve) {
    j["eve"] = {{"success_fraction", s.eve->success_fraction},
                {"alice_corrupted_fraction", s.eve->alice_corrupted_fraction},
                {"restart_aware_success_fraction", s.eve->restart_aware_success_fraction},
                {"informed_success_fraction", s.eve->informed_success_fraction},
                {"extended_parity_fraction", s.eve->extended_parity_fraction
                                                 ? nlohmann::ordered_json(*s.eve->extended_parity_fraction)
                                                 : nlohmann::ordered_json(nullptr)}};
  } else {
    j["eve"] = nullptr;
  }
  return j;
}

}  // namespace qsa
