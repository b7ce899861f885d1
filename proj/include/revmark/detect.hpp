#pragma once

#include "revmark/watermark.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace revmark {

struct ReviewRecord {
  std::string review_id;
  std::string raw_text;
  std::string normalized_text;

  static ReviewRecord make(std::string id, std::string raw);
};

struct ScanOptions {
  // Stripped from the start of the review text (repeatedly) before a
  // fixed-position comparison.
  std::vector<std::string> strip_prefixes{"review:"};
  // Leading lines starting with one of these are dropped entirely.
  std::vector<std::string> drop_line_prefixes{"title:"};
  // Leading heading lines (ending in ':' or starting with '#') of at most
  // this many words are dropped; 0 disables the rule.
  std::size_t heading_max_words = 6;
  // Scan scope override; defaults to the set's own position policy.
  std::optional<PositionPolicy> policy;
};

// Precomputed lookup over the normalized candidates of one set. Immutable
// after construction and safe to share between threads.
class CandidateMatcher {
 public:
  explicit CandidateMatcher(const WatermarkSet& set, ScanOptions options = {});

  PositionPolicy policy() const noexcept { return policy_; }
  std::size_t set_size() const noexcept { return keys_.size(); }

  // Sorted indices of candidates present at the scan scope. Under
  // FixedStart at most one index is returned (the longest match).
  std::vector<std::uint32_t> scan(const ReviewRecord& review) const;

  bool present(const ReviewRecord& review, std::size_t index) const;

  // Normalized text a fixed-position match is evaluated against.
  std::string start_text(const ReviewRecord& review) const;

 private:
  std::optional<std::uint32_t> match_start(std::string_view text) const;
  std::vector<std::uint32_t> match_anywhere(std::string_view text) const;

  ScanOptions options_;
  PositionPolicy policy_;
  std::vector<std::string> keys_;
  std::unordered_map<std::string, std::vector<std::uint32_t>> by_first_word_;
};

std::vector<std::uint32_t> scan_review(const ReviewRecord& review, const WatermarkSet& set,
                                       const ScanOptions& options = {});

// Sparse binary |R| x |W| matrix; stored both row- and column-major.
class OccurrenceMatrix {
 public:
  OccurrenceMatrix() = default;
  OccurrenceMatrix(std::vector<std::string> row_ids, std::size_t cols,
                   std::vector<std::vector<std::uint32_t>> rows);

  std::size_t rows() const noexcept { return row_ids_.size(); }
  std::size_t cols() const noexcept { return cols_; }
  const std::vector<std::string>& row_ids() const noexcept { return row_ids_; }

  std::span<const std::uint32_t> row(std::size_t i) const;
  std::span<const std::uint32_t> col(std::size_t j) const;
  bool at(std::size_t i, std::size_t j) const;
  std::size_t row_sum(std::size_t i) const { return row(i).size(); }
  std::size_t col_sum(std::size_t j) const { return col(j).size(); }
  std::size_t total() const noexcept { return row_index_.size(); }

  // Recomputes the sums from the row-major entries and compares.
  bool sums_consistent() const;

 private:
  std::vector<std::string> row_ids_;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::uint32_t> row_index_;
  std::vector<std::size_t> col_ptr_{0};
  std::vector<std::uint32_t> col_index_;
};

// Never reads assignments: the matrix depends only on reviews and the set.
OccurrenceMatrix build_occurrence_matrix(std::span<const ReviewRecord> reviews,
                                         const WatermarkSet& set, const ScanOptions& options = {},
                                         unsigned threads = 0);
OccurrenceMatrix build_occurrence_matrix(std::span<const ReviewRecord> reviews,
                                         const CandidateMatcher& matcher, unsigned threads = 0);

enum class Solver { Greedy, Exact };

struct DetectionConfig {
  double alpha = 0.05;
  std::size_t tau = 1;
  std::optional<std::size_t> rho;    // default |R|
  std::optional<std::size_t> omega;  // default |W|
  Solver solver = Solver::Greedy;
  std::uint64_t seed = 0;

  // Throws InvalidArgument when the invariants do not hold for this instance.
  void validate(std::size_t reviews, std::size_t set_size) const;
};

// floor(alpha * set_size), guarded against representation error.
std::size_t fpr_threshold(double alpha, std::size_t set_size);
// Largest integer residual allowed by the FWER constraint.
std::size_t fwer_budget(double alpha, std::size_t set_size);

struct SingleDecision {
  bool flagged = false;
  bool present = false;
  std::size_t candidate_count = 0;
};

SingleDecision detect_single(const ReviewRecord& review, const WatermarkSet& set,
                             const Watermark& w_star, std::size_t tau);
SingleDecision detect_single(const ReviewRecord& review, const CandidateMatcher& matcher,
                             std::size_t w_star, std::size_t tau);

struct DiscardStep {
  enum class Kind { Review, Watermark };
  Kind kind = Kind::Review;
  std::size_t index = 0;
  std::size_t row_candidate = 0;
  std::size_t col_candidate = 0;
  double review_ratio = 0.0;
  double watermark_ratio = 0.0;
  std::size_t residual_after = 0;
};

struct DiscardResult {
  std::vector<std::size_t> reviews;     // I, in discard order
  std::vector<std::size_t> watermarks;  // J, in discard order
  std::vector<DiscardStep> trace;
  std::size_t residual = 0;             // sum of X over kept rows and columns
  std::size_t budget = 0;               // floor(alpha |W|)
  double objective = 0.0;               // |I| + |J| |R \ I| / |W|
};

double discard_objective(std::size_t reviews, std::size_t set_size, std::size_t discarded_reviews,
                         std::size_t discarded_watermarks);

DiscardResult greedy_discard(const OccurrenceMatrix& x, const DetectionConfig& cfg);

inline constexpr std::size_t kExactSolverLimit = 20;
DiscardResult exact_discard(const OccurrenceMatrix& x, const DetectionConfig& cfg);

DiscardResult solve_discard(const OccurrenceMatrix& x, const DetectionConfig& cfg);

// Final step of the multi-review test: the only place assignments are used.
std::vector<std::size_t> flag_after_discard(const OccurrenceMatrix& x, const DiscardResult& d,
                                            std::span<const std::size_t> w_star);

struct DetectionOutcome {
  std::vector<std::size_t> flagged_rows;
  std::vector<std::string> flags;  // review ids of flagged_rows
  DiscardResult discard;
  std::size_t reviews = 0;
  std::size_t set_size = 0;
  double alpha = 0.0;
};

DetectionOutcome detect_multiple(std::span<const ReviewRecord> reviews, const WatermarkSet& set,
                                 std::span<const std::optional<std::size_t>> w_star,
                                 const DetectionConfig& cfg, const ScanOptions& options = {});
DetectionOutcome detect_multiple(const OccurrenceMatrix& x,
                                 std::span<const std::optional<std::size_t>> w_star,
                                 const DetectionConfig& cfg);

// Baselines. x must be built at the set's own scan scope.
std::vector<std::size_t> bonferroni_detect(const OccurrenceMatrix& x, PositionPolicy policy,
                                           std::span<const std::size_t> w_star, double alpha);
std::vector<std::size_t> holm_detect(const OccurrenceMatrix& x,
                                     std::span<const std::size_t> w_star, double alpha);
std::vector<std::size_t> bonferroni_detect(std::span<const ReviewRecord> reviews,
                                           const WatermarkSet& set,
                                           std::span<const std::size_t> w_star, double alpha);
std::vector<std::size_t> holm_detect(std::span<const ReviewRecord> reviews,
                                     const WatermarkSet& set,
                                     std::span<const std::size_t> w_star, double alpha);

// Review corpus files: one JSON object per line with review_id and text
// (optionally paper_id and review_slot).
struct CorpusEntry {
  ReviewRecord review;
  std::string paper_id;
  std::optional<std::string> review_slot;
};
std::vector<CorpusEntry> load_corpus(const std::string& path);
void save_corpus(const std::string& path, std::span<const CorpusEntry> entries);

}  // namespace revmark
