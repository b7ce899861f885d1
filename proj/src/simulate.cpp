#include "revmark/simulate.hpp"

#include "revmark/error.hpp"
#include "revmark/normalize.hpp"
#include "revmark/rng.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <thread>

namespace revmark {

namespace {

constexpr std::array<std::string_view, 24> kFiller = {
    "The submission tackles a relevant question for the community.",
    "Overall the writing is clear and the figures are readable.",
    "My main concern is the limited scope of the empirical evaluation.",
    "The authors should report variance across random seeds.",
    "Several claims in the introduction would benefit from citations.",
    "The experimental protocol is described in enough detail to reproduce.",
    "I would like to see a comparison with simpler baselines.",
    "The ablations are informative but somewhat narrow.",
    "Some notation in the method section is introduced without definition.",
    "The limitations paragraph is short and could be expanded.",
    "Minor typos appear throughout the appendix.",
    "The proposed approach seems computationally expensive.",
    "It is unclear how hyperparameters were selected.",
    "The results table lacks confidence intervals.",
    "The contribution is incremental relative to prior work.",
    "The theoretical statement relies on strong assumptions.",
    "The motivation is convincing and well argued.",
    "I recommend a careful proofreading pass before publication.",
    "Please clarify the difference between the two training regimes.",
    "The supplementary material answers most of my questions.",
    "The qualitative examples are helpful for intuition.",
    "A discussion of failure cases would strengthen the work.",
    "The dataset description should mention licensing terms.",
    "My score reflects the concerns listed above."};

constexpr std::array<std::string_view, 4> kBodyTemplates = {
    "The discussion of {} deserves more detail.",
    "The related work section also mentions {} briefly.",
    "I appreciated the remarks about {} in the analysis.",
    "A reader may ask how {} fits into the argument."};

constexpr std::array<std::string_view, 3> kOpeners = {
    "The submission considers a learning problem with practical relevance.",
    "Summary of contributions and main concerns follow below.",
    "Reviewer assessment of the manuscript."};

std::string fill(std::string_view tmpl, std::string_view value) {
  return fmt::format(fmt::runtime(tmpl), value);
}

// Sentence that opens a review with candidate c at the fixed position.
std::string start_sentence(SchemeKind scheme, std::string_view c) {
  if (scheme == SchemeKind::RandomCitation)
    return fmt::format("Following {}, this paper studies a learning problem.", c);
  return fmt::format("{} of learning under distribution shift.", c);
}

std::string planted_body(SchemeKind scheme, std::string_view c) {
  if (scheme == SchemeKind::TechnicalTerm)
    return fmt::format("The treatment of \"{}\" is central to the contribution.", c);
  return start_sentence(scheme, c);
}

// Inversion sampler; fine for the small means used here.
std::size_t poisson(Rng& rng, double lambda) {
  if (lambda <= 0.0) return 0;
  const double limit = std::exp(-lambda);
  std::size_t k = 0;
  double p = uniform_unit(rng);
  while (p > limit) {
    ++k;
    p *= uniform_unit(rng);
  }
  return k;
}

class Popularity {
 public:
  Popularity(std::span<const std::uint32_t> eligible, std::size_t pool, double s, Rng& rng)
      : eligible_(eligible.begin(), eligible.end()) {
    for (std::size_t i = eligible_.size(); i > 1; --i)
      std::swap(eligible_[i - 1], eligible_[uniform_index(rng, i)]);
    if (pool == 0 || pool > eligible_.size()) pool = eligible_.size();
    eligible_.resize(pool);
    cumulative_.reserve(pool);
    double acc = 0.0;
    for (std::size_t r = 0; r < pool; ++r) {
      acc += 1.0 / std::pow(static_cast<double>(r + 1), s);
      cumulative_.push_back(acc);
    }
  }

  std::size_t size() const { return eligible_.size(); }

  std::uint32_t draw(Rng& rng) const {
    const double u = uniform_unit(rng) * cumulative_.back();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    return eligible_[std::min<std::size_t>(it - cumulative_.begin(), eligible_.size() - 1)];
  }

 private:
  std::vector<std::uint32_t> eligible_;
  std::vector<double> cumulative_;
};

template <typename F>
void parallel_chunks(std::size_t n, F&& body) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t threads = std::min<std::size_t>(hw, std::max<std::size_t>(1, n / 4));
  if (threads <= 1) {
    body(std::size_t{0}, n, std::size_t{0});
    return;
  }
  std::vector<std::jthread> pool;
  const std::size_t step = (n + threads - 1) / threads;
  for (std::size_t t = 0; t < threads; ++t) {
    const std::size_t lo = t * step, hi = std::min(n, lo + step);
    if (lo >= hi) break;
    pool.emplace_back([&body, lo, hi, t] { body(lo, hi, t); });
  }
}

double binomial_margin(double p, std::size_t n) {
  return n ? 3.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(n)) : 0.0;
}

}  // namespace

std::size_t default_popular_pool(SchemeKind scheme, std::size_t set_size) noexcept {
  switch (scheme) {
    case SchemeKind::RandomCitation: return std::min<std::size_t>(25, set_size);
    case SchemeKind::RandomStart: return std::min<std::size_t>(5, set_size);
    case SchemeKind::TechnicalTerm: return set_size;
  }
  return set_size;
}

ProfileStats measure_profile(std::span<const ReviewRecord> reviews, const WatermarkSet& set) {
  ScanOptions opt;
  opt.policy = PositionPolicy::Anywhere;
  const auto x = build_occurrence_matrix(reviews, CandidateMatcher(set, opt));
  ProfileStats s;
  s.reviews = x.rows();
  s.occurrences = x.total();
  for (std::size_t i = 0; i < x.rows(); ++i) s.with_any += x.row_sum(i) > 0;
  return s;
}

std::vector<ReviewRecord> synth_corpus(const CorpusProfile& profile, const WatermarkSet& set,
                                       std::uint64_t seed) {
  const std::size_t n = profile.n_reviews;
  if (!(profile.frac_with_any >= 0.0 && profile.frac_with_any <= 1.0) || !(profile.mean_occurrences >= 0.0))
    fail(ErrorCode::InfeasibleProfile, "fraction must lie in [0,1] and mean must be non-negative");
  if (profile.scheme != set.scheme())
    fail(ErrorCode::SchemeMismatch, "profile scheme differs from the set's scheme");
  const auto with_any = static_cast<std::size_t>(std::llround(profile.frac_with_any * double(n)));
  const auto total = static_cast<std::size_t>(std::llround(profile.mean_occurrences * double(n)));

  // Candidates that match nothing but themselves when planted alone.
  ScanOptions anywhere;
  anywhere.policy = PositionPolicy::Anywhere;
  const CandidateMatcher matcher(set, anywhere);
  std::vector<std::uint32_t> clean;
  for (std::size_t j = 0; j < set.size(); ++j) {
    const auto hits = matcher.scan(ReviewRecord::make("c", set[j]));
    if (hits.size() == 1 && hits[0] == j) clean.push_back(static_cast<std::uint32_t>(j));
  }
  const std::size_t per_review_cap = std::min<std::size_t>(clean.size(), 64);
  if (total < with_any || (with_any == 0 && total > 0) || total > with_any * per_review_cap)
    fail(ErrorCode::InfeasibleProfile,
         fmt::format("cannot place {} occurrences in {} reviews", total, with_any));

  Rng rng = make_rng(seed);
  const std::size_t pool = profile.popular_pool.value_or(default_popular_pool(set.scheme(), set.size()));
  std::optional<Popularity> pop;
  if (with_any > 0) pop.emplace(clean, pool, profile.zipf_s, rng);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);
  std::vector<std::size_t> count(n, 0);
  if (with_any > 0) {
    const double lambda = double(total) / double(with_any) - 1.0;
    std::size_t sum = 0;
    for (std::size_t k = 0; k < with_any; ++k) {
      const std::size_t extra = std::min(poisson(rng, lambda), per_review_cap - 1);
      count[order[k]] = 1 + extra;
      sum += 1 + extra;
    }
    while (sum > total) {
      const std::size_t i = order[uniform_index(rng, with_any)];
      if (count[i] > 1) --count[i], --sum;
    }
    while (sum < total) {
      const std::size_t i = order[uniform_index(rng, with_any)];
      if (count[i] < per_review_cap) ++count[i], ++sum;
    }
  }

  std::vector<ReviewRecord> out;
  out.reserve(n);
  const bool fixed = set.policy() == PositionPolicy::FixedStart;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::uint32_t> picks;
    while (picks.size() < count[i]) {
      std::uint32_t c = picks.size() < pop->size() ? pop->draw(rng)
                                                   : clean[uniform_index(rng, clean.size())];
      if (std::find(picks.begin(), picks.end(), c) == picks.end()) picks.push_back(c);
    }
    std::string text;
    std::size_t next = 0;
    if (fixed && !picks.empty()) {
      text = start_sentence(set.scheme(), set[picks[0]]);
      next = 1;
    } else {
      text = kOpeners[uniform_index(rng, kOpeners.size())];
    }
    const std::size_t sentences = 3 + uniform_index(rng, 4);
    for (std::size_t s = 0; s < sentences || next < picks.size(); ++s) {
      text += ' ';
      if (next < picks.size() && (s >= sentences || uniform_index(rng, 2) == 0)) {
        text += fill(kBodyTemplates[uniform_index(rng, kBodyTemplates.size())], set[picks[next++]]);
      } else {
        text += kFiller[uniform_index(rng, kFiller.size())];
      }
    }
    out.push_back(ReviewRecord::make(fmt::format("null-{:06}", i), std::move(text)));
  }
  return out;
}

ReviewRecord planted_review(const WatermarkSet& set, std::size_t w, std::string id, std::uint64_t seed) {
  if (w >= set.size()) fail(ErrorCode::InvalidArgument, "planted watermark index out of range");
  Rng rng = make_rng(seed);
  std::string text = set.policy() == PositionPolicy::FixedStart ? planted_body(set.scheme(), set[w])
                                                                 : std::string(kOpeners[0]);
  for (int s = 0; s < 3; ++s) {
    text += ' ';
    text += kFiller[uniform_index(rng, kFiller.size())];
  }
  if (set.policy() == PositionPolicy::Anywhere) text += ' ' + planted_body(set.scheme(), set[w]);
  return ReviewRecord::make(std::move(id), std::move(text));
}

TrialResult simulate_fpr(const OccurrenceMatrix& x, PositionPolicy policy, std::size_t tau,
                         std::size_t trials, std::uint64_t seed) {
  TrialResult r;
  r.trials = trials;
  r.draws = trials * x.rows();
  if (x.rows() == 0 || x.cols() == 0 || trials == 0) return r;
  std::vector<std::size_t> flags(trials, 0);
  parallel_chunks(trials, [&](std::size_t lo, std::size_t hi, std::size_t) {
    for (std::size_t t = lo; t < hi; ++t) {
      Rng rng = make_rng(derive_seed(seed, t));
      std::size_t f = 0;
      for (std::size_t i = 0; i < x.rows(); ++i) {
        const auto w = uniform_index(rng, x.cols());
        if (!x.at(i, w)) continue;
        if (policy == PositionPolicy::FixedStart || x.row_sum(i) <= tau) ++f;
      }
      flags[t] = f;
    }
  });
  double sum_frac = 0.0, sum_sq = 0.0;
  for (const auto f : flags) {
    r.false_flags += f;
    r.false_flag_trials += f > 0;
    const double frac = double(f) / double(x.rows());
    sum_frac += frac;
    sum_sq += frac * frac;
  }
  r.fpr = double(r.false_flags) / double(r.draws);
  r.fwer = double(r.false_flag_trials) / double(trials);
  r.flagged_fraction_mean = sum_frac / double(trials);
  r.flagged_fraction_sd = std::sqrt(std::max(0.0, sum_sq / double(trials) - r.flagged_fraction_mean * r.flagged_fraction_mean));
  return r;
}

TrialResult simulate_fpr(std::span<const ReviewRecord> reviews, const WatermarkSet& set, std::size_t tau,
                         std::size_t trials, std::uint64_t seed) {
  return simulate_fpr(build_occurrence_matrix(reviews, set), set.policy(), tau, trials, seed);
}

TrialResult simulate_fwer(const OccurrenceMatrix& x, const DetectionConfig& cfg, std::size_t trials,
                          std::uint64_t seed) {
  cfg.validate(x.rows(), x.cols());
  const DiscardResult d = solve_discard(x, cfg);
  TrialResult r;
  r.trials = trials;
  r.draws = trials * x.rows();
  r.discarded_reviews = d.reviews.size();
  r.discarded_watermarks = d.watermarks.size();
  if (x.rows() == 0 || x.cols() == 0 || trials == 0) return r;
  std::vector<char> row_gone(x.rows(), 0), col_gone(x.cols(), 0);
  for (const auto i : d.reviews) row_gone[i] = 1;
  for (const auto j : d.watermarks) col_gone[j] = 1;
  std::vector<std::size_t> flags(trials, 0);
  parallel_chunks(trials, [&](std::size_t lo, std::size_t hi, std::size_t) {
    for (std::size_t t = lo; t < hi; ++t) {
      Rng rng = make_rng(derive_seed(seed, t));
      std::size_t f = 0;
      for (std::size_t i = 0; i < x.rows(); ++i) {
        const auto w = uniform_index(rng, x.cols());
        if (!row_gone[i] && !col_gone[w] && x.at(i, w)) ++f;
      }
      flags[t] = f;
    }
  });
  double sum_frac = 0.0, sum_sq = 0.0;
  for (const auto f : flags) {
    r.false_flags += f;
    r.false_flag_trials += f > 0;
    const double frac = double(f) / double(x.rows());
    sum_frac += frac;
    sum_sq += frac * frac;
  }
  r.fpr = double(r.false_flags) / double(r.draws);
  r.fwer = double(r.false_flag_trials) / double(trials);
  r.flagged_fraction_mean = sum_frac / double(trials);
  r.flagged_fraction_sd = std::sqrt(std::max(0.0, sum_sq / double(trials) - r.flagged_fraction_mean * r.flagged_fraction_mean));
  return r;
}

TrialResult simulate_fwer(std::span<const ReviewRecord> reviews, const WatermarkSet& set,
                          const DetectionConfig& cfg, std::size_t trials, std::uint64_t seed) {
  return simulate_fwer(build_occurrence_matrix(reviews, set), cfg, trials, seed);
}

PowerResult simulate_power(std::span<const ReviewRecord> null_corpus, std::size_t planted_count,
                           const WatermarkSet& set, const DetectionConfig& cfg, std::uint64_t seed) {
  if (set.empty()) fail(ErrorCode::EmptySet, "watermark set is empty");
  std::vector<ReviewRecord> all(null_corpus.begin(), null_corpus.end());
  const std::size_t n_null = all.size();
  Rng rng = make_rng(derive_seed(seed, 1));
  std::vector<std::size_t> w_star;
  w_star.reserve(n_null + planted_count);
  for (std::size_t i = 0; i < n_null; ++i) w_star.push_back(uniform_index(rng, set.size()));
  for (std::size_t k = 0; k < planted_count; ++k) {
    const std::size_t w = uniform_index(rng, set.size());
    w_star.push_back(w);
    all.push_back(planted_review(set, w, fmt::format("planted-{:04}", k), derive_seed(seed, 1000 + k)));
  }
  const OccurrenceMatrix x = build_occurrence_matrix(all, set);
  std::vector<std::optional<std::size_t>> assigned(w_star.begin(), w_star.end());
  DetectionConfig c = cfg;
  if (!c.seed) c.seed = seed;
  c.validate(x.rows(), x.cols());
  const DetectionOutcome multi = detect_multiple(x, assigned, c);

  PowerResult r;
  r.null_reviews = n_null;
  r.planted_reviews = planted_count;
  r.discarded_reviews = multi.discard.reviews.size();
  r.discarded_watermarks = multi.discard.watermarks.size();
  r.residual = double(multi.discard.residual);
  r.budget = multi.discard.budget;
  auto score = [&](const std::vector<std::size_t>& flagged) {
    MethodPower m;
    for (const auto i : flagged) (i < n_null ? m.flagged_null : m.flagged_planted)++;
    if (planted_count) m.tpr = double(m.flagged_planted) / double(planted_count);
    m.fpr = n_null ? double(m.flagged_null) / double(n_null) : 0.0;
    return m;
  };
  r.multiple = score(multi.flagged_rows);
  r.bonferroni = score(bonferroni_detect(x, set.policy(), w_star, cfg.alpha));
  r.holm = score(holm_detect(x, w_star, cfg.alpha));
  return r;
}

Interval bootstrap_ci(std::size_t successes, std::size_t n, std::size_t replicates, double level,
                      std::uint64_t seed) {
  if (n == 0 || successes > n) fail(ErrorCode::InvalidCounts, fmt::format("{} successes out of {}", successes, n));
  if (replicates == 0 || !(level > 0.0 && level < 1.0))
    fail(ErrorCode::InvalidArgument, "replicates must be positive and level in (0,1)");
  Rng rng = make_rng(seed);
  std::vector<std::size_t> counts(replicates);
  for (auto& c : counts) {
    std::size_t s = 0;
    for (std::size_t k = 0; k < n; ++k) s += uniform_index(rng, n) < successes;
    c = s;
  }
  std::sort(counts.begin(), counts.end());
  const double a = 1.0 - level;
  const double r = static_cast<double>(replicates);
  auto lo_idx = static_cast<std::size_t>(std::floor(r * a / 2.0 + 1e-9));
  auto hi_idx = static_cast<std::size_t>(std::ceil(r * (1.0 - a / 2.0) - 1e-9));
  hi_idx = hi_idx == 0 ? 0 : hi_idx - 1;
  lo_idx = std::min(lo_idx, replicates - 1);
  hi_idx = std::min(hi_idx, replicates - 1);
  return Interval{double(counts[lo_idx]) / double(n), double(counts[hi_idx]) / double(n)};
}

SuccessMetrics compute_hpsr_osr(std::span<const std::pair<std::size_t, std::size_t>> items,
                                std::size_t threshold_num, std::size_t threshold_den,
                                std::size_t replicates, std::uint64_t seed) {
  if (threshold_den == 0 || threshold_num > threshold_den)
    fail(ErrorCode::InvalidArgument, "threshold must be a fraction in [0,1]");
  SuccessMetrics m;
  m.hpsr_denominator = items.size();
  std::size_t w_total = 0, total = 0;
  for (const auto& [w, t] : items) {
    if (t == 0 || w > t) fail(ErrorCode::InvalidCounts, fmt::format("item with {} of {} generations", w, t));
    if (w * threshold_den >= threshold_num * t) ++m.hpsr_numerator;
    w_total += w;
    total += t;
  }
  if (total == 0) return m;
  m.osr = double(w_total) / double(total);
  const Interval ci = bootstrap_ci(w_total, total, replicates, 0.95, seed);
  m.ci_low = std::min(ci.low, m.osr);
  m.ci_high = std::max(ci.high, m.osr);
  return m;
}

double similarity_match(std::string_view a, std::string_view b) {
  const auto x = word_tokens(a), y = word_tokens(b);
  if (x.empty() && y.empty()) return 1.0;
  if (x.empty() || y.empty()) return 0.0;
  std::vector<std::size_t> prev(y.size() + 1, 0), cur(y.size() + 1, 0);
  for (std::size_t i = 1; i <= x.size(); ++i) {
    for (std::size_t j = 1; j <= y.size(); ++j)
      cur[j] = x[i - 1] == y[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return double(prev[y.size()]) / double(std::max(x.size(), y.size()));
}

SimulationConfig load_simulation_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot read " + path);
  SimulationConfig c;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    if (trim(line).empty()) continue;
    if (eq == std::string::npos) fail(ErrorCode::ParseError, fmt::format("{}:{}: expected key=value", path, lineno));
    const std::string key = trim(line.substr(0, eq)), v = trim(line.substr(eq + 1));
    try {
      if (key == "mode") {
        if (v == "fpr") c.mode = SimulationMode::Fpr;
        else if (v == "fwer") c.mode = SimulationMode::Fwer;
        else if (v == "power") c.mode = SimulationMode::Power;
        else if (v == "profile") c.mode = SimulationMode::Profile;
        else fail(ErrorCode::ParseError, "unknown mode '" + v + "'");
      } else if (key == "scheme") {
        c.profile.scheme = parse_scheme(v);
      } else if (key == "n_reviews") {
        c.profile.n_reviews = std::stoul(v);
      } else if (key == "frac_with_any") {
        c.profile.frac_with_any = std::stod(v);
      } else if (key == "mean_occurrences") {
        c.profile.mean_occurrences = std::stod(v);
      } else if (key == "popular_pool") {
        c.profile.popular_pool = std::stoul(v);
      } else if (key == "zipf_s") {
        c.profile.zipf_s = std::stod(v);
      } else if (key == "alpha") {
        c.alpha = std::stod(v);
      } else if (key == "tau") {
        c.tau = std::stoul(v);
      } else if (key == "rho") {
        c.rho = std::stoul(v);
      } else if (key == "omega") {
        c.omega = std::stoul(v);
      } else if (key == "trials") {
        c.trials = std::stoul(v);
      } else if (key == "planted") {
        c.planted = std::stoul(v);
      } else if (key == "seed") {
        c.seed = std::stoull(v);
      } else if (key == "solver") {
        if (v == "greedy") c.solver = Solver::Greedy;
        else if (v == "exact") c.solver = Solver::Exact;
        else fail(ErrorCode::ParseError, "unknown solver '" + v + "'");
      } else {
        fail(ErrorCode::ParseError, "unknown key '" + key + "'");
      }
    } catch (const std::logic_error&) {
      fail(ErrorCode::ParseError, fmt::format("{}:{}: bad value for {}", path, lineno, key));
    } catch (const Error& e) {
      fail(ErrorCode::ParseError, fmt::format("{}:{}: {}", path, lineno, e.what()));
    }
  }
  return c;
}

std::string run_simulation(const SimulationConfig& cfg, const WatermarkSet& set) {
  using nlohmann::ordered_json;
  const auto corpus = synth_corpus(cfg.profile, set, derive_seed(cfg.seed, 0));
  ordered_json j;
  j["scheme"] = std::string(scheme_name(set.scheme()));
  j["set_id"] = set.id();
  j["set_size"] = set.size();
  j["n_reviews"] = corpus.size();
  j["seed"] = cfg.seed;
  const ProfileStats stats = measure_profile(corpus, set);
  j["profile"] = {{"frac_with_any", stats.frac_with_any()}, {"mean_occurrences", stats.mean_occurrences()}};

  DetectionConfig dc;
  dc.alpha = cfg.alpha;
  dc.rho = cfg.rho;
  dc.omega = cfg.omega;
  dc.solver = cfg.solver;
  dc.seed = cfg.seed;
  auto trial_json = [](const TrialResult& r) {
    return ordered_json{{"trials", r.trials},
                        {"draws", r.draws},
                        {"false_flags", r.false_flags},
                        {"false_flag_trials", r.false_flag_trials},
                        {"fpr", r.fpr},
                        {"fwer", r.fwer},
                        {"flagged_fraction_mean", r.flagged_fraction_mean},
                        {"discarded_reviews", r.discarded_reviews},
                        {"discarded_watermarks", r.discarded_watermarks}};
  };
  switch (cfg.mode) {
    case SimulationMode::Profile:
      j["mode"] = "profile";
      break;
    case SimulationMode::Fpr: {
      const std::size_t tau = cfg.tau.value_or(fpr_threshold(cfg.alpha, set.size()));
      const auto r = simulate_fpr(corpus, set, tau, cfg.trials, derive_seed(cfg.seed, 2));
      j["mode"] = "fpr";
      j["tau"] = tau;
      j["bound"] = double(tau) / double(set.size());
      j["margin"] = binomial_margin(double(tau) / double(set.size()), r.draws);
      j["result"] = trial_json(r);
      break;
    }
    case SimulationMode::Fwer: {
      const auto r = simulate_fwer(corpus, set, dc, cfg.trials, derive_seed(cfg.seed, 2));
      j["mode"] = "fwer";
      j["alpha"] = cfg.alpha;
      j["margin"] = binomial_margin(cfg.alpha, r.trials);
      j["result"] = trial_json(r);
      break;
    }
    case SimulationMode::Power: {
      const auto r = simulate_power(corpus, cfg.planted, set, dc, derive_seed(cfg.seed, 2));
      auto m = [](const MethodPower& p) {
        ordered_json o{{"flagged_planted", p.flagged_planted}, {"flagged_null", p.flagged_null}, {"fpr", p.fpr}};
        o["tpr"] = p.tpr ? ordered_json(*p.tpr) : ordered_json(nullptr);
        return o;
      };
      j["mode"] = "power";
      j["alpha"] = cfg.alpha;
      j["planted"] = r.planted_reviews;
      j["discarded_reviews"] = r.discarded_reviews;
      j["discarded_watermarks"] = r.discarded_watermarks;
      j["residual"] = r.residual;
      j["budget"] = r.budget;
      j["detect_multiple"] = m(r.multiple);
      j["bonferroni"] = m(r.bonferroni);
      j["holm"] = m(r.holm);
      break;
    }
  }
  return j.dump(2);
}

}  // namespace revmark
