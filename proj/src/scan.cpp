#include "revmark/detect.hpp"

#include "revmark/error.hpp"
#include "revmark/normalize.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <thread>
#include <unordered_set>

namespace revmark {

namespace {

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.size() >= prefix.size() && s.compare(0, prefix.size(), prefix) == 0;
}

std::size_t word_count(std::string_view s) {
  std::size_t n = 0;
  bool in_word = false;
  for (const char c : s) {
    if (c == ' ') {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++n;
    }
  }
  return n;
}

std::string_view leading_word(std::string_view s, std::size_t pos = 0) {
  std::size_t end = pos;
  while (end < s.size() && is_word_byte(static_cast<unsigned char>(s[end]))) ++end;
  return s.substr(pos, end - pos);
}

bool right_boundary_ok(std::string_view text, std::size_t end, std::string_view key) {
  if (key.empty() || !is_word_byte(static_cast<unsigned char>(key.back()))) return true;
  return end == text.size() || !is_word_byte(static_cast<unsigned char>(text[end]));
}

}  // namespace

ReviewRecord ReviewRecord::make(std::string id, std::string raw) {
  ReviewRecord r;
  r.review_id = std::move(id);
  r.normalized_text = normalize(raw);
  r.raw_text = std::move(raw);
  return r;
}

CandidateMatcher::CandidateMatcher(const WatermarkSet& set, ScanOptions options)
    : options_(std::move(options)), policy_(options_.policy.value_or(set.policy())) {
  for (auto& p : options_.strip_prefixes) p = normalize(p);
  for (auto& p : options_.drop_line_prefixes) p = normalize(p);
  const bool citation_lead =
      set.scheme() == SchemeKind::RandomCitation && policy_ == PositionPolicy::FixedStart;
  keys_.reserve(set.size());
  for (std::size_t j = 0; j < set.size(); ++j) {
    std::string key = normalize(set[j]);
    if (citation_lead) key = "following " + key;
    by_first_word_[std::string(leading_word(key))].push_back(static_cast<std::uint32_t>(j));
    keys_.push_back(std::move(key));
  }
}

std::optional<std::uint32_t> CandidateMatcher::match_start(std::string_view text) const {
  std::optional<std::uint32_t> best;
  auto consider = [&](const std::vector<std::uint32_t>& idx) {
    for (const auto j : idx) {
      const std::string& key = keys_[j];
      if (starts_with(text, key) && right_boundary_ok(text, key.size(), key) &&
          (!best || key.size() > keys_[*best].size()))
        best = j;
    }
  };
  if (const auto it = by_first_word_.find(std::string(leading_word(text)));
      it != by_first_word_.end())
    consider(it->second);
  return best;
}

std::vector<std::uint32_t> CandidateMatcher::match_anywhere(std::string_view text) const {
  std::vector<std::uint32_t> hits;
  const auto nonword = by_first_word_.find(std::string());
  for (std::size_t p = 0; p < text.size(); ++p) {
    const bool word_start = is_word_byte(static_cast<unsigned char>(text[p])) &&
                            (p == 0 || !is_word_byte(static_cast<unsigned char>(text[p - 1])));
    if (word_start) {
      const std::string_view w = leading_word(text, p);
      if (const auto it = by_first_word_.find(std::string(w)); it != by_first_word_.end()) {
        for (const auto j : it->second) {
          const std::string& key = keys_[j];
          if (text.compare(p, key.size(), key) == 0 &&
              right_boundary_ok(text, p + key.size(), key))
            hits.push_back(j);
        }
      }
      p += w.size() - 1;
      continue;
    }
    if (nonword != by_first_word_.end() && !is_word_byte(static_cast<unsigned char>(text[p]))) {
      for (const auto j : nonword->second) {
        const std::string& key = keys_[j];
        if (text.compare(p, key.size(), key) == 0 && right_boundary_ok(text, p + key.size(), key))
          hits.push_back(j);
      }
    }
  }
  std::sort(hits.begin(), hits.end());
  hits.erase(std::unique(hits.begin(), hits.end()), hits.end());
  return hits;
}

std::string CandidateMatcher::start_text(const ReviewRecord& review) const {
  std::vector<std::string> lines = normalize_lines(review.raw_text);
  std::size_t first = 0;
  for (; first < lines.size(); ++first) {
    std::string& line = lines[first];
    const bool dropped_prefix =
        std::any_of(options_.drop_line_prefixes.begin(), options_.drop_line_prefixes.end(),
                    [&](const std::string& p) { return !p.empty() && starts_with(line, p); });
    if (dropped_prefix) continue;
    if (options_.heading_max_words == 0) break;
    const bool hashed = line.front() == '#';
    const auto body_start = line.find_first_not_of("# ");
    std::string body = body_start == std::string::npos ? std::string() : line.substr(body_start);
    const bool heading = hashed || (!body.empty() && body.back() == ':');
    if (!heading) break;
    if (body.empty()) continue;
    if (word_count(body) <= options_.heading_max_words && !match_start(body)) continue;
    line = std::move(body);
    break;
  }
  std::string text;
  for (std::size_t i = first; i < lines.size(); ++i) {
    if (!text.empty()) text += ' ';
    text += lines[i];
  }
  for (bool stripped = true; stripped;) {
    stripped = false;
    for (const auto& p : options_.strip_prefixes) {
      if (!p.empty() && starts_with(text, p)) {
        text.erase(0, p.size());
        if (!text.empty() && text.front() == ' ') text.erase(0, 1);
        stripped = true;
      }
    }
  }
  return text;
}

std::vector<std::uint32_t> CandidateMatcher::scan(const ReviewRecord& review) const {
  if (policy_ == PositionPolicy::Anywhere) return match_anywhere(review.normalized_text);
  if (const auto hit = match_start(start_text(review))) return {*hit};
  return {};
}

bool CandidateMatcher::present(const ReviewRecord& review, std::size_t index) const {
  const auto hits = scan(review);
  return std::binary_search(hits.begin(), hits.end(), static_cast<std::uint32_t>(index));
}

std::vector<std::uint32_t> scan_review(const ReviewRecord& review, const WatermarkSet& set,
                                       const ScanOptions& options) {
  return CandidateMatcher(set, options).scan(review);
}

OccurrenceMatrix::OccurrenceMatrix(std::vector<std::string> row_ids, std::size_t cols,
                                   std::vector<std::vector<std::uint32_t>> rows)
    : row_ids_(std::move(row_ids)), cols_(cols) {
  if (rows.size() != row_ids_.size())
    fail(ErrorCode::InvalidArgument, "row id count does not match row count");
  std::vector<std::size_t> col_counts(cols_, 0);
  row_ptr_.reserve(rows.size() + 1);
  for (auto& r : rows) {
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
    for (const auto j : r) {
      if (j >= cols_) fail(ErrorCode::InvalidArgument, "occurrence column out of range");
      ++col_counts[j];
      row_index_.push_back(j);
    }
    row_ptr_.push_back(row_index_.size());
  }
  col_ptr_.assign(cols_ + 1, 0);
  for (std::size_t j = 0; j < cols_; ++j) col_ptr_[j + 1] = col_ptr_[j] + col_counts[j];
  col_index_.resize(row_index_.size());
  std::vector<std::size_t> fill(col_ptr_.begin(), col_ptr_.end() - 1);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (const auto j : rows[i]) col_index_[fill[j]++] = static_cast<std::uint32_t>(i);
}

std::span<const std::uint32_t> OccurrenceMatrix::row(std::size_t i) const {
  return {row_index_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
}

std::span<const std::uint32_t> OccurrenceMatrix::col(std::size_t j) const {
  return {col_index_.data() + col_ptr_[j], col_ptr_[j + 1] - col_ptr_[j]};
}

bool OccurrenceMatrix::at(std::size_t i, std::size_t j) const {
  const auto r = row(i);
  return std::binary_search(r.begin(), r.end(), static_cast<std::uint32_t>(j));
}

bool OccurrenceMatrix::sums_consistent() const {
  std::vector<std::size_t> cols(cols_, 0);
  std::size_t total = 0;
  for (std::size_t i = 0; i < rows(); ++i) {
    for (const auto j : row(i)) ++cols[j];
    total += row(i).size();
  }
  for (std::size_t j = 0; j < cols_; ++j)
    if (cols[j] != col_sum(j)) return false;
  return total == col_index_.size() && total == row_index_.size();
}

OccurrenceMatrix build_occurrence_matrix(std::span<const ReviewRecord> reviews,
                                         const CandidateMatcher& matcher, unsigned threads) {
  std::vector<std::string> ids;
  ids.reserve(reviews.size());
  std::unordered_set<std::string_view> seen;
  for (const auto& r : reviews) {
    if (!seen.insert(r.review_id).second)
      fail(ErrorCode::DuplicateReviewId, fmt::format("duplicate review id '{}'", r.review_id));
    ids.push_back(r.review_id);
  }
  std::vector<std::vector<std::uint32_t>> rows(reviews.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, reviews.size() / 64)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < reviews.size(); ++i) rows[i] = matcher.scan(reviews[i]);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (reviews.size() + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t lo = t * chunk, hi = std::min(reviews.size(), lo + chunk);
      pool.emplace_back([&, lo, hi] {
        for (std::size_t i = lo; i < hi; ++i) rows[i] = matcher.scan(reviews[i]);
      });
    }
  }
  return OccurrenceMatrix(std::move(ids), matcher.set_size(), std::move(rows));
}

OccurrenceMatrix build_occurrence_matrix(std::span<const ReviewRecord> reviews,
                                         const WatermarkSet& set, const ScanOptions& options,
                                         unsigned threads) {
  return build_occurrence_matrix(reviews, CandidateMatcher(set, options), threads);
}

std::vector<CorpusEntry> load_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, fmt::format("cannot read '{}'", path));
  std::vector<CorpusEntry> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::ParseError, fmt::format("{}:{}: {}", path, lineno, e.what()));
    }
    if (!j.is_object() || !j.contains("review_id") || !j.contains("text") ||
        !j["review_id"].is_string() || !j["text"].is_string())
      fail(ErrorCode::ParseError,
           fmt::format("{}:{}: record needs string fields review_id and text", path, lineno));
    CorpusEntry e;
    e.review = ReviewRecord::make(j["review_id"].get<std::string>(), j["text"].get<std::string>());
    e.paper_id = j.value("paper_id", e.review.review_id);
    if (j.contains("review_slot") && j["review_slot"].is_string())
      e.review_slot = j["review_slot"].get<std::string>();
    out.push_back(std::move(e));
  }
  return out;
}

void save_corpus(const std::string& path, std::span<const CorpusEntry> entries) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, fmt::format("cannot write '{}'", path));
  for (const auto& e : entries) {
    nlohmann::json j{{"review_id", e.review.review_id}, {"text", e.review.raw_text}};
    if (e.paper_id != e.review.review_id) j["paper_id"] = e.paper_id;
    if (e.review_slot) j["review_slot"] = *e.review_slot;
    out << j.dump() << '\n';
  }
}

}  // namespace revmark
