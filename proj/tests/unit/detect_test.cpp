#include "revmark/detect.hpp"
#include "revmark/error.hpp"
#include "revmark/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <optional>

namespace revmark {
namespace {

OccurrenceMatrix matrix(const std::vector<std::vector<std::uint32_t>>& rows, std::size_t cols) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < rows.size(); ++i) ids.push_back("r" + std::to_string(i));
  return OccurrenceMatrix(ids, cols, rows);
}

TEST(Thresholds, FloorOfAlphaTimesSetSize) {
  EXPECT_EQ(fpr_threshold(0.05, 1000), 50u);
  EXPECT_EQ(fpr_threshold(0.05, 1200), 60u);
  EXPECT_EQ(fpr_threshold(0.001, 109989), 109u);
  EXPECT_EQ(fpr_threshold(0.01, 109989), 1099u);
  EXPECT_EQ(fpr_threshold(0.07, 100), 7u);  // 0.07 * 100 = 7.000000000000001
  EXPECT_EQ(fpr_threshold(0.0299, 100), 2u);
}

TEST(Single, FixedStartFlagsOnPresence) {
  const auto set = build_random_start_set();
  const auto w = watermark_at(set, 17);
  const auto yes = detect_single(ReviewRecord::make("r", set[17] + " of interest."), set, w, 0);
  EXPECT_TRUE(yes.present);
  EXPECT_TRUE(yes.flagged);
  const auto no = detect_single(ReviewRecord::make("r", set[18] + " of interest."), set, w, 60);
  EXPECT_FALSE(no.present);
  EXPECT_FALSE(no.flagged);
  EXPECT_EQ(no.candidate_count, 1u);
}

TEST(Single, AnywhereRespectsTau) {
  const WatermarkSet set(SchemeKind::TechnicalTerm, {"a1", "a2", "a3", "a4"});
  const auto w = watermark_at(set, 0);
  const auto r = ReviewRecord::make("r", "a1 a2 a3");
  EXPECT_TRUE(detect_single(r, set, w, 3).flagged);
  EXPECT_FALSE(detect_single(r, set, w, 2).flagged);
  EXPECT_TRUE(detect_single(r, set, w, 2).present);
  EXPECT_EQ(detect_single(r, set, w, 2).candidate_count, 3u);
}

TEST(Single, RejectsForeignWatermark) {
  const auto set = build_random_start_set();
  const WatermarkSet other(SchemeKind::TechnicalTerm, {"x"});
  EXPECT_THROW(detect_single(ReviewRecord::make("r", "x"), set, watermark_at(other, 0), 1), Error);
}

TEST(Objective, Definition) {
  EXPECT_DOUBLE_EQ(discard_objective(10, 5, 2, 3), 2 + 3.0 * 8 / 5);
  EXPECT_DOUBLE_EQ(discard_objective(10, 5, 0, 0), 0.0);
}

TEST(Greedy, NoDiscardWhenWithinBudget) {
  const auto x = matrix({{0}, {1}, {}}, 100);
  DetectionConfig cfg;
  cfg.alpha = 0.05;  // budget 5
  const auto d = greedy_discard(x, cfg);
  EXPECT_TRUE(d.reviews.empty());
  EXPECT_TRUE(d.watermarks.empty());
  EXPECT_EQ(d.residual, 2u);
  EXPECT_EQ(d.budget, 5u);
}

TEST(Greedy, PrefersCheaperRatio) {
  // One review hits all 20 columns; removing it is cheaper than removing columns.
  std::vector<std::vector<std::uint32_t>> rows(10);
  for (std::uint32_t j = 0; j < 20; ++j) rows[0].push_back(j);
  const auto x = matrix(rows, 20);
  DetectionConfig cfg;
  cfg.alpha = 0.05;  // budget 1
  const auto d = greedy_discard(x, cfg);
  ASSERT_EQ(d.reviews.size(), 1u);
  EXPECT_EQ(d.reviews[0], 0u);
  EXPECT_TRUE(d.watermarks.empty());
  EXPECT_EQ(d.residual, 0u);
}

TEST(Greedy, PopularColumnIsDiscarded) {
  // Column 3 hit by every review; removing it is cheaper than 10 reviews.
  std::vector<std::vector<std::uint32_t>> rows(10, std::vector<std::uint32_t>{3});
  const auto x = matrix(rows, 100);
  DetectionConfig cfg;
  cfg.alpha = 0.05;
  const auto d = greedy_discard(x, cfg);
  EXPECT_TRUE(d.reviews.empty());
  ASSERT_EQ(d.watermarks.size(), 1u);
  EXPECT_EQ(d.watermarks[0], 3u);
}

TEST(Greedy, InfeasibleBudgets) {
  std::vector<std::vector<std::uint32_t>> rows(10, std::vector<std::uint32_t>{0, 1, 2});
  const auto x = matrix(rows, 20);
  DetectionConfig cfg;
  cfg.alpha = 0.05;
  cfg.rho = 1;
  cfg.omega = 1;
  try {
    greedy_discard(x, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Infeasible);
    EXPECT_STREQ(e.what(), "infeasible combination of \xCF\x81 and \xCE\xA9");
  }
}

// Greedy spends its review budget on the densest rows and runs out, while
// I = {0, 3}, J = {1, 3, 4, 5} leaves residual 3. Every tie-break path fails.
TEST(Greedy, CanMissFeasibleBudgets) {
  const auto x = matrix({{0, 2, 3}, {3, 5}, {1, 2, 3, 4}, {0, 2}, {1, 3, 4}, {0, 1, 5}, {4}, {2, 3, 4, 5}}, 6);
  DetectionConfig cfg;
  cfg.alpha = 0.592;  // budget 3
  cfg.rho = 2;
  cfg.omega = 4;
  const auto e = exact_discard(x, cfg);
  EXPECT_LE(e.residual, 3u);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    cfg.seed = seed;
    EXPECT_THROW(greedy_discard(x, cfg), Error);
  }
}

TEST(Config, Validation) {
  DetectionConfig cfg;
  cfg.alpha = 0.0;
  EXPECT_THROW(cfg.validate(5, 5), Error);
  cfg.alpha = 0.05;
  cfg.rho = 6;
  EXPECT_THROW(cfg.validate(5, 5), Error);
  cfg.rho = 5;
  cfg.omega = 6;
  EXPECT_THROW(cfg.validate(5, 5), Error);
}

// Brute force over every (I, J) pair; independent of both solvers.
struct Brute {
  bool feasible = false;
  double objective = 0.0;
};

Brute brute_force(const OccurrenceMatrix& x, const DetectionConfig& cfg) {
  const std::size_t r = x.rows(), w = x.cols();
  const std::size_t budget = static_cast<std::size_t>(std::floor(cfg.alpha * double(w) + 1e-9));
  Brute best;
  for (std::uint32_t im = 0; im < (1u << r); ++im) {
    const auto ni = static_cast<std::size_t>(__builtin_popcount(im));
    if (ni > cfg.rho.value_or(r)) continue;
    for (std::uint32_t jm = 0; jm < (1u << w); ++jm) {
      const auto nj = static_cast<std::size_t>(__builtin_popcount(jm));
      if (nj > cfg.omega.value_or(w)) continue;
      std::size_t residual = 0;
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < w; ++j)
          if (!(im >> i & 1u) && !(jm >> j & 1u) && x.at(i, j)) ++residual;
      if (residual > budget) continue;
      const double obj = double(ni) + double(nj) * double(r - ni) / double(w);
      if (!best.feasible || obj < best.objective - 1e-12) best = {true, obj};
    }
  }
  return best;
}

OccurrenceMatrix random_matrix(Rng& rng, std::size_t r, std::size_t w, double p) {
  std::vector<std::vector<std::uint32_t>> rows(r);
  for (std::size_t i = 0; i < r; ++i)
    for (std::uint32_t j = 0; j < w; ++j)
      if (uniform_unit(rng) < p) rows[i].push_back(j);
  return matrix(rows, w);
}

TEST(Exact, MatchesBruteForce) {
  Rng rng = make_rng(11);
  for (int t = 0; t < 300; ++t) {
    const std::size_t r = 1 + uniform_index(rng, 6), w = 1 + uniform_index(rng, 6);
    const auto x = random_matrix(rng, r, w, uniform_unit(rng));
    DetectionConfig cfg;
    cfg.alpha = 0.05 + 0.5 * uniform_unit(rng);
    cfg.rho = uniform_index(rng, r + 1);
    cfg.omega = uniform_index(rng, w + 1);
    const Brute b = brute_force(x, cfg);
    try {
      const auto d = exact_discard(x, cfg);
      ASSERT_TRUE(b.feasible);
      EXPECT_NEAR(d.objective, b.objective, 1e-9);
      EXPECT_LE(d.residual, d.budget);
    } catch (const Error& e) {
      ASSERT_EQ(e.code(), ErrorCode::Infeasible);
      EXPECT_FALSE(b.feasible);
    }
  }
}

TEST(Exact, RefusesLargeInstances) {
  const auto x = matrix(std::vector<std::vector<std::uint32_t>>(21), 3);
  DetectionConfig cfg;
  try {
    exact_discard(x, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InstanceTooLarge);
  }
}

TEST(Multiple, FlagsOnlyKeptPairs) {
  // r0 carries w0; r1 carries w1 (which will be discarded); r2 carries w2 but w* = 0.
  std::vector<std::vector<std::uint32_t>> rows{{0}, {1}, {2}, {1}, {1}};
  const auto x = matrix(rows, 20);  // budget at alpha 0.1 is 2
  DetectionConfig cfg;
  cfg.alpha = 0.1;
  const std::vector<std::optional<std::size_t>> w{0, 1, 0, 5, 6};
  const auto out = detect_multiple(x, w, cfg);
  ASSERT_EQ(out.discard.watermarks.size(), 1u);
  EXPECT_EQ(out.discard.watermarks[0], 1u);
  const std::vector<std::size_t> want{0};
  EXPECT_EQ(out.flagged_rows, want);
  EXPECT_EQ(out.flags, std::vector<std::string>{"r0"});
}

TEST(Multiple, MissingAssignment) {
  const auto x = matrix({{0}, {1}}, 10);
  const std::vector<std::optional<std::size_t>> w{0, std::nullopt};
  try {
    detect_multiple(x, w, DetectionConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingAssignment);
  }
}

TEST(Baselines, BonferroniThreshold) {
  // |W| = 100, |R| = 2, alpha = 0.05: tau_b = floor(2.5) = 2.
  const auto x = matrix({{0, 1}, {0, 1, 2}}, 100);
  const std::vector<std::size_t> w{0, 0};
  EXPECT_EQ(bonferroni_detect(x, PositionPolicy::Anywhere, w, 0.05), std::vector<std::size_t>{0});
  EXPECT_EQ(bonferroni_detect(x, PositionPolicy::FixedStart, w, 0.05), (std::vector<std::size_t>{0, 1}));
  // alpha |W| / |R| < 1: nothing can be flagged.
  EXPECT_TRUE(bonferroni_detect(x, PositionPolicy::FixedStart, w, 0.01).empty());
}

TEST(Baselines, HolmStepDown) {
  // p-values k/|W| = 1/100, 2/100, 3/100 with |R| = 3, alpha = 0.05.
  // Holm: 0.01 <= 0.05/3, 0.02 <= 0.05/2, 0.03 <= 0.05/1 -> all three.
  const auto x = matrix({{0}, {0, 1}, {0, 1, 2}}, 100);
  const std::vector<std::size_t> w{0, 0, 0};
  EXPECT_EQ(holm_detect(x, w, 0.05), (std::vector<std::size_t>{0, 1, 2}));
  // alpha = 0.03: 0.01 <= 0.01, 0.02 > 0.015 -> stop.
  EXPECT_EQ(holm_detect(x, w, 0.03), std::vector<std::size_t>{0});
  // Absent watermark gives p = 1 and is never flagged.
  const std::vector<std::size_t> w2{5, 0, 0};
  EXPECT_TRUE(holm_detect(x, w2, 0.05).empty());
  EXPECT_EQ(holm_detect(x, w2, 0.1), (std::vector<std::size_t>{1, 2}));
}

}  // namespace
}  // namespace revmark
