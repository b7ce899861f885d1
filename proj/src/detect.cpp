#include "revmark/detect.hpp"

#include "revmark/error.hpp"
#include "revmark/rng.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

namespace revmark {

namespace {

constexpr double kFloorGuard = 1e-9;

const char* const kInfeasibleMessage = "infeasible combination of ρ and Ω";

std::size_t guarded_floor(double v) {
  if (!(v > 0.0)) return 0;
  return static_cast<std::size_t>(std::floor(v + kFloorGuard));
}

}  // namespace

void DetectionConfig::validate(std::size_t reviews, std::size_t set_size) const {
  if (!(alpha > 0.0 && alpha < 1.0))
    fail(ErrorCode::InvalidArgument, fmt::format("alpha must lie in (0, 1), got {}", alpha));
  if (rho && *rho > reviews)
    fail(ErrorCode::InvalidArgument, fmt::format("rho {} exceeds review count {}", *rho, reviews));
  if (omega && *omega > set_size)
    fail(ErrorCode::InvalidArgument, fmt::format("omega {} exceeds set size {}", *omega, set_size));
}

std::size_t fpr_threshold(double alpha, std::size_t set_size) {
  return guarded_floor(alpha * static_cast<double>(set_size));
}

std::size_t fwer_budget(double alpha, std::size_t set_size) {
  return guarded_floor(alpha * static_cast<double>(set_size));
}

SingleDecision detect_single(const ReviewRecord& review, const CandidateMatcher& matcher,
                             std::size_t w_star, std::size_t tau) {
  if (w_star >= matcher.set_size())
    fail(ErrorCode::InvalidArgument, fmt::format("watermark index {} out of range", w_star));
  const auto hits = matcher.scan(review);
  SingleDecision d;
  d.candidate_count = hits.size();
  d.present = std::binary_search(hits.begin(), hits.end(), static_cast<std::uint32_t>(w_star));
  if (!d.present) return d;
  d.flagged = matcher.policy() == PositionPolicy::FixedStart || d.candidate_count <= tau;
  return d;
}

SingleDecision detect_single(const ReviewRecord& review, const WatermarkSet& set,
                             const Watermark& w_star, std::size_t tau) {
  if (!w_star.set_id.empty() && w_star.set_id != set.id())
    fail(ErrorCode::SchemeMismatch,
         fmt::format("watermark belongs to set {}, not {}", w_star.set_id, set.id()));
  return detect_single(review, CandidateMatcher(set), w_star.index, tau);
}

double discard_objective(std::size_t reviews, std::size_t set_size, std::size_t discarded_reviews,
                         std::size_t discarded_watermarks) {
  const double base = static_cast<double>(discarded_reviews);
  if (set_size == 0) return base;
  return base + static_cast<double>(discarded_watermarks) *
                    static_cast<double>(reviews - discarded_reviews) /
                    static_cast<double>(set_size);
}

DiscardResult greedy_discard(const OccurrenceMatrix& x, const DetectionConfig& cfg) {
  const std::size_t n_rows = x.rows(), n_cols = x.cols();
  cfg.validate(n_rows, n_cols);
  const std::size_t rho = cfg.rho.value_or(n_rows);
  const std::size_t omega = cfg.omega.value_or(n_cols);

  DiscardResult out;
  out.budget = fwer_budget(cfg.alpha, n_cols);
  out.residual = x.total();

  std::vector<std::size_t> row_sum(n_rows), col_sum(n_cols);
  std::vector<std::size_t> active_rows, active_cols;
  for (std::size_t i = 0; i < n_rows; ++i)
    if ((row_sum[i] = x.row_sum(i)) > 0) active_rows.push_back(i);
  for (std::size_t j = 0; j < n_cols; ++j)
    if ((col_sum[j] = x.col_sum(j)) > 0) active_cols.push_back(j);
  std::vector<char> row_gone(n_rows, 0), col_gone(n_cols, 0);

  Rng rng = make_rng(cfg.seed);
  auto pick_max = [&](std::vector<std::size_t>& active, const std::vector<std::size_t>& sums) {
    std::size_t best = 0, best_sum = 0, ties = 0, write = 0;
    for (std::size_t k = 0; k < active.size(); ++k) {
      const std::size_t idx = active[k];
      const std::size_t s = sums[idx];
      if (s == 0) continue;
      active[write++] = idx;
      if (s > best_sum) {
        best = idx;
        best_sum = s;
        ties = 1;
      } else if (s == best_sum && uniform_index(rng, ++ties) == 0) {
        best = idx;
      }
    }
    active.resize(write);
    return best;
  };

  while (out.residual > out.budget) {
    const std::size_t i_star = pick_max(active_rows, row_sum);
    const std::size_t j_star = pick_max(active_cols, col_sum);
    const std::size_t kept_rows = n_rows - out.reviews.size();
    const std::size_t kept_cols = n_cols - out.watermarks.size();
    const bool review_budget = out.reviews.size() < rho;
    const bool watermark_budget = out.watermarks.size() < omega;
    if (!review_budget && !watermark_budget) fail(ErrorCode::Infeasible, kInfeasibleMessage);

    DiscardStep step;
    step.row_candidate = i_star;
    step.col_candidate = j_star;
    step.review_ratio = static_cast<double>(kept_cols) / static_cast<double>(row_sum[i_star]);
    step.watermark_ratio = static_cast<double>(kept_rows) / static_cast<double>(col_sum[j_star]);
    // |W\J| / rowsum < |R\I| / colsum, compared exactly in integers.
    const bool review_cheaper = kept_cols * col_sum[j_star] < kept_rows * row_sum[i_star];
    if ((review_cheaper && review_budget) || !watermark_budget) {
      step.kind = DiscardStep::Kind::Review;
      step.index = i_star;
      row_gone[i_star] = 1;
      out.reviews.push_back(i_star);
      out.residual -= row_sum[i_star];
      for (const auto j : x.row(i_star))
        if (!col_gone[j]) --col_sum[j];
      row_sum[i_star] = 0;
    } else {
      step.kind = DiscardStep::Kind::Watermark;
      step.index = j_star;
      col_gone[j_star] = 1;
      out.watermarks.push_back(j_star);
      out.residual -= col_sum[j_star];
      for (const auto i : x.col(j_star))
        if (!row_gone[i]) --row_sum[i];
      col_sum[j_star] = 0;
    }
    step.residual_after = out.residual;
    out.trace.push_back(step);
  }
  out.objective = discard_objective(n_rows, n_cols, out.reviews.size(), out.watermarks.size());
  return out;
}

DiscardResult exact_discard(const OccurrenceMatrix& x, const DetectionConfig& cfg) {
  const std::size_t n_rows = x.rows(), n_cols = x.cols();
  if (n_rows > kExactSolverLimit || n_cols > kExactSolverLimit)
    fail(ErrorCode::InstanceTooLarge,
         fmt::format("exact solver handles at most {0}x{0}, got {1}x{2}", kExactSolverLimit,
                     n_rows, n_cols));
  cfg.validate(n_rows, n_cols);
  const std::size_t rho = cfg.rho.value_or(n_rows);
  const std::size_t omega = cfg.omega.value_or(n_cols);
  const std::size_t budget = fwer_budget(cfg.alpha, n_cols);

  std::vector<std::uint32_t> col_mask(n_cols, 0);
  for (std::size_t j = 0; j < n_cols; ++j)
    for (const auto i : x.col(j)) col_mask[j] |= std::uint32_t{1} << i;

  struct Best {
    bool found = false;
    std::uint64_t score = 0;
    std::uint32_t mask = 0;
    std::vector<std::size_t> cols;
  } best;

  auto mask_indices = [](std::uint32_t m) {
    std::vector<std::size_t> v;
    for (std::size_t i = 0; m; ++i, m >>= 1)
      if (m & 1u) v.push_back(i);
    return v;
  };

  std::vector<std::pair<std::size_t, std::size_t>> sums(n_cols);
  const std::uint64_t limit = std::uint64_t{1} << n_rows;
  for (std::uint64_t m = 0; m < limit; ++m) {
    const auto mask = static_cast<std::uint32_t>(m);
    const auto n_i = static_cast<std::size_t>(std::popcount(mask));
    if (n_i > rho) continue;
    std::size_t residual = 0;
    for (std::size_t j = 0; j < n_cols; ++j) {
      sums[j] = {static_cast<std::size_t>(std::popcount(col_mask[j] & ~mask)), j};
      residual += sums[j].first;
    }
    std::sort(sums.begin(), sums.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    std::size_t k = 0;
    while (residual > budget && k < n_cols) residual -= sums[k++].first;
    if (residual > budget || k > omega) continue;
    const std::uint64_t score =
        static_cast<std::uint64_t>(n_i) * n_cols + static_cast<std::uint64_t>(k) * (n_rows - n_i);
    bool better = !best.found || score < best.score;
    if (!better && score == best.score) {
      const auto cur_n = static_cast<std::size_t>(std::popcount(best.mask));
      better = n_i < cur_n || (n_i == cur_n && mask_indices(mask) < mask_indices(best.mask));
    }
    if (!better) continue;
    best.found = true;
    best.score = score;
    best.mask = mask;
    best.cols.clear();
    for (std::size_t t = 0; t < k; ++t) best.cols.push_back(sums[t].second);
    std::sort(best.cols.begin(), best.cols.end());
  }
  if (!best.found) fail(ErrorCode::Infeasible, kInfeasibleMessage);

  DiscardResult out;
  out.budget = budget;
  out.reviews = mask_indices(best.mask);
  out.watermarks = best.cols;
  std::vector<char> col_gone(n_cols, 0);
  for (const auto j : out.watermarks) col_gone[j] = 1;
  for (std::size_t i = 0; i < n_rows; ++i) {
    if (best.mask >> i & 1u) continue;
    for (const auto j : x.row(i))
      if (!col_gone[j]) ++out.residual;
  }
  out.objective = discard_objective(n_rows, n_cols, out.reviews.size(), out.watermarks.size());
  return out;
}

DiscardResult solve_discard(const OccurrenceMatrix& x, const DetectionConfig& cfg) {
  return cfg.solver == Solver::Exact ? exact_discard(x, cfg) : greedy_discard(x, cfg);
}

std::vector<std::size_t> flag_after_discard(const OccurrenceMatrix& x, const DiscardResult& d,
                                            std::span<const std::size_t> w_star) {
  if (w_star.size() != x.rows())
    fail(ErrorCode::MissingAssignment,
         fmt::format("{} assignments for {} reviews", w_star.size(), x.rows()));
  std::vector<char> row_gone(x.rows(), 0), col_gone(x.cols(), 0);
  for (const auto i : d.reviews) row_gone[i] = 1;
  for (const auto j : d.watermarks) col_gone[j] = 1;
  std::vector<std::size_t> flagged;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const std::size_t w = w_star[i];
    if (w >= x.cols())
      fail(ErrorCode::InvalidArgument, fmt::format("assignment {} out of range", w));
    if (!row_gone[i] && !col_gone[w] && x.at(i, w)) flagged.push_back(i);
  }
  return flagged;
}

DetectionOutcome detect_multiple(const OccurrenceMatrix& x,
                                 std::span<const std::optional<std::size_t>> w_star,
                                 const DetectionConfig& cfg) {
  if (w_star.size() != x.rows())
    fail(ErrorCode::MissingAssignment,
         fmt::format("{} assignments for {} reviews", w_star.size(), x.rows()));
  std::vector<std::size_t> assigned;
  assigned.reserve(w_star.size());
  for (std::size_t i = 0; i < w_star.size(); ++i) {
    if (!w_star[i])
      fail(ErrorCode::MissingAssignment,
           fmt::format("review '{}' has no assignment", x.row_ids()[i]));
    assigned.push_back(*w_star[i]);
  }
  DetectionOutcome out;
  out.reviews = x.rows();
  out.set_size = x.cols();
  out.alpha = cfg.alpha;
  out.discard = solve_discard(x, cfg);
  out.flagged_rows = flag_after_discard(x, out.discard, assigned);
  for (const auto i : out.flagged_rows) out.flags.push_back(x.row_ids()[i]);
  return out;
}

DetectionOutcome detect_multiple(std::span<const ReviewRecord> reviews, const WatermarkSet& set,
                                 std::span<const std::optional<std::size_t>> w_star,
                                 const DetectionConfig& cfg, const ScanOptions& options) {
  if (w_star.size() != reviews.size())
    fail(ErrorCode::MissingAssignment,
         fmt::format("{} assignments for {} reviews", w_star.size(), reviews.size()));
  const OccurrenceMatrix x = build_occurrence_matrix(reviews, set, options);
  return detect_multiple(x, w_star, cfg);
}

std::vector<std::size_t> bonferroni_detect(const OccurrenceMatrix& x, PositionPolicy policy,
                                           std::span<const std::size_t> w_star, double alpha) {
  if (w_star.size() != x.rows())
    fail(ErrorCode::MissingAssignment,
         fmt::format("{} assignments for {} reviews", w_star.size(), x.rows()));
  std::vector<std::size_t> flagged;
  if (x.rows() == 0) return flagged;
  const std::size_t tau = guarded_floor(alpha * static_cast<double>(x.cols()) /
                                        static_cast<double>(x.rows()));
  if (tau < 1) return flagged;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    if (w_star[i] >= x.cols() || !x.at(i, w_star[i])) continue;
    if (policy == PositionPolicy::FixedStart || x.row_sum(i) <= tau) flagged.push_back(i);
  }
  return flagged;
}

std::vector<std::size_t> holm_detect(const OccurrenceMatrix& x,
                                     std::span<const std::size_t> w_star, double alpha) {
  if (w_star.size() != x.rows())
    fail(ErrorCode::MissingAssignment,
         fmt::format("{} assignments for {} reviews", w_star.size(), x.rows()));
  const std::size_t n = x.rows();
  std::vector<std::size_t> flagged;
  if (n == 0 || x.cols() == 0) return flagged;
  // p_i = k_i / |W| when w*_i is present, 1 otherwise.
  std::vector<std::pair<std::size_t, std::size_t>> present;
  for (std::size_t i = 0; i < n; ++i)
    if (w_star[i] < x.cols() && x.at(i, w_star[i])) present.emplace_back(x.row_sum(i), i);
  std::stable_sort(present.begin(), present.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  const double alpha_w = alpha * static_cast<double>(x.cols());
  for (std::size_t m = 0; m < present.size(); ++m) {
    const double remaining = static_cast<double>(n - m);
    if (static_cast<double>(present[m].first) * remaining > alpha_w + kFloorGuard * remaining)
      break;
    flagged.push_back(present[m].second);
  }
  std::sort(flagged.begin(), flagged.end());
  return flagged;
}

std::vector<std::size_t> bonferroni_detect(std::span<const ReviewRecord> reviews,
                                           const WatermarkSet& set,
                                           std::span<const std::size_t> w_star, double alpha) {
  return bonferroni_detect(build_occurrence_matrix(reviews, set), set.policy(), w_star, alpha);
}

std::vector<std::size_t> holm_detect(std::span<const ReviewRecord> reviews,
                                     const WatermarkSet& set,
                                     std::span<const std::size_t> w_star, double alpha) {
  return holm_detect(build_occurrence_matrix(reviews, set), w_star, alpha);
}

}  // namespace revmark
