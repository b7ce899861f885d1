#pragma once

#include "revmark/detect.hpp"
#include "revmark/watermark.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace revmark {

struct CorpusProfile {
  std::size_t n_reviews = 0;
  double frac_with_any = 0.0;
  double mean_occurrences = 0.0;
  SchemeKind scheme = SchemeKind::RandomCitation;
  // Candidate popularity: Zipf(zipf_s) over popular_pool candidates picked
  // by the seed; 0 means uniform over the whole set.
  std::optional<std::size_t> popular_pool;
  double zipf_s = 1.0;
};

// Popularity defaults per scheme (citation 25, random start 5, terms: whole set).
std::size_t default_popular_pool(SchemeKind scheme, std::size_t set_size) noexcept;

// Anywhere-scope statistics of a corpus against a set.
struct ProfileStats {
  std::size_t reviews = 0;
  std::size_t with_any = 0;
  std::size_t occurrences = 0;
  double frac_with_any() const { return reviews ? double(with_any) / double(reviews) : 0.0; }
  double mean_occurrences() const { return reviews ? double(occurrences) / double(reviews) : 0.0; }
};
ProfileStats measure_profile(std::span<const ReviewRecord> reviews, const WatermarkSet& set);

// Null corpus whose Anywhere-scope statistics equal round(frac * n) reviews
// with occurrences and round(mean * n) occurrences in total. Under a
// FixedStart scheme the first occurrence of a review opens the text.
std::vector<ReviewRecord> synth_corpus(const CorpusProfile& profile, const WatermarkSet& set,
                                       std::uint64_t seed);

// Review that carries exactly candidate w at the scheme's position.
ReviewRecord planted_review(const WatermarkSet& set, std::size_t w, std::string id, std::uint64_t seed);

struct TrialResult {
  std::size_t trials = 0;
  std::size_t draws = 0;              // review-level decisions
  std::size_t false_flags = 0;
  std::size_t false_flag_trials = 0;  // trials with at least one false flag
  double flagged_fraction_mean = 0.0;
  double flagged_fraction_sd = 0.0;
  double fpr = 0.0;   // false_flags / draws
  double fwer = 0.0;  // false_flag_trials / trials
  std::size_t discarded_reviews = 0;
  std::size_t discarded_watermarks = 0;
};

// Single-review test on every review, w* drawn uniformly per review and trial.
TrialResult simulate_fpr(std::span<const ReviewRecord> reviews, const WatermarkSet& set,
                         std::size_t tau, std::size_t trials, std::uint64_t seed);
TrialResult simulate_fpr(const OccurrenceMatrix& x, PositionPolicy policy, std::size_t tau,
                         std::size_t trials, std::uint64_t seed);

// The discard problem is solved once on X (no assignments involved); each
// trial then draws a full assignment vector and applies the flagging step.
TrialResult simulate_fwer(const OccurrenceMatrix& x, const DetectionConfig& cfg, std::size_t trials,
                          std::uint64_t seed);
TrialResult simulate_fwer(std::span<const ReviewRecord> reviews, const WatermarkSet& set,
                          const DetectionConfig& cfg, std::size_t trials, std::uint64_t seed);

struct MethodPower {
  std::size_t flagged_planted = 0;
  std::size_t flagged_null = 0;
  std::optional<double> tpr;  // nullopt without planted reviews
  double fpr = 0.0;
};

struct PowerResult {
  std::size_t null_reviews = 0;
  std::size_t planted_reviews = 0;
  MethodPower multiple, bonferroni, holm;
  std::size_t discarded_reviews = 0;
  std::size_t discarded_watermarks = 0;
  double residual = 0.0;
  std::size_t budget = 0;
};

// Appends planted_count planted reviews to the null corpus, assigns every
// review a uniform w*, and runs detect_multiple next to both baselines.
PowerResult simulate_power(std::span<const ReviewRecord> null_corpus, std::size_t planted_count,
                           const WatermarkSet& set, const DetectionConfig& cfg, std::uint64_t seed);

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

// Percentile bootstrap of a success fraction.
Interval bootstrap_ci(std::size_t successes, std::size_t n, std::size_t replicates, double level,
                      std::uint64_t seed);

struct SuccessMetrics {
  std::size_t hpsr_numerator = 0;
  std::size_t hpsr_denominator = 0;
  double osr = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double hpsr() const { return hpsr_denominator ? double(hpsr_numerator) / double(hpsr_denominator) : 0.0; }
};

// Items are (watermarked, total) generation counts. An item counts towards
// HPSR when watermarked/total >= threshold_num/threshold_den. The interval
// is the bootstrap CI of OSR.
SuccessMetrics compute_hpsr_osr(std::span<const std::pair<std::size_t, std::size_t>> items,
                                std::size_t threshold_num = 8, std::size_t threshold_den = 10,
                                std::size_t replicates = 10000, std::uint64_t seed = 0);

// |LCS of normalized word tokens| / max(token counts).
double similarity_match(std::string_view a, std::string_view b);

enum class SimulationMode { Fpr, Fwer, Power, Profile };

// key=value file: mode, scheme, n_reviews, frac_with_any, mean_occurrences,
// popular_pool, zipf_s, alpha, tau, rho, omega, trials, planted, seed, solver.
struct SimulationConfig {
  SimulationMode mode = SimulationMode::Fwer;
  CorpusProfile profile;
  double alpha = 0.05;
  std::optional<std::size_t> tau;
  std::optional<std::size_t> rho, omega;
  std::size_t trials = 1000;
  std::size_t planted = 0;
  std::uint64_t seed = 0;
  Solver solver = Solver::Greedy;
};
SimulationConfig load_simulation_config(const std::string& path);

// Runs the configured experiment against set and returns a JSON report.
std::string run_simulation(const SimulationConfig& cfg, const WatermarkSet& set);

}  // namespace revmark
