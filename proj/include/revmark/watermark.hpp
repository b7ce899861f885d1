#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace revmark {

enum class SchemeKind { RandomStart, TechnicalTerm, RandomCitation };

// Where a watermark is expected to appear in a review.
enum class PositionPolicy { FixedStart, Anywhere };

constexpr PositionPolicy position_policy(SchemeKind kind) noexcept {
  return kind == SchemeKind::TechnicalTerm ? PositionPolicy::Anywhere
                                           : PositionPolicy::FixedStart;
}

std::string_view scheme_name(SchemeKind kind) noexcept;
// Accepts both "RandomStart" and the CLI spelling "random-start".
SchemeKind parse_scheme(std::string_view text);

// Ordered candidate set W. Indices are stable identifiers: the order is
// fixed by each builder and by line order in exported files.
class WatermarkSet {
 public:
  WatermarkSet(SchemeKind scheme, std::vector<std::string> candidates);

  SchemeKind scheme() const noexcept { return scheme_; }
  PositionPolicy policy() const noexcept { return position_policy(scheme_); }
  std::size_t size() const noexcept { return candidates_.size(); }
  bool empty() const noexcept { return candidates_.empty(); }
  const std::string& operator[](std::size_t i) const { return candidates_[i]; }
  const std::vector<std::string>& candidates() const noexcept { return candidates_; }

  // "<Scheme>-<size>-<16 hex digest of the candidate list>"
  const std::string& id() const noexcept { return id_; }

 private:
  SchemeKind scheme_;
  std::vector<std::string> candidates_;
  std::string id_;
};

struct Watermark {
  std::string set_id;
  std::size_t index = 0;
  std::string surface;

  friend bool operator==(const Watermark&, const Watermark&) = default;
};

struct KeywordFrequencyTable {
  std::vector<std::pair<std::string, std::uint64_t>> entries;
};

// Cartesian product of the five start-phrase positions, position 1 outermost.
WatermarkSet build_random_start_set();

// "{surname} et al. ({year})", surname-major, years ascending.
WatermarkSet build_citation_set(std::span<const std::string> surnames, int year_lo, int year_hi);

// The n rarest keywords; equal counts are ordered by keyword text.
WatermarkSet build_technical_term_set(const KeywordFrequencyTable& freq, std::size_t n);

Watermark sample_watermark(const WatermarkSet& set, std::uint64_t seed);
Watermark watermark_at(const WatermarkSet& set, std::size_t index);

std::string render_injection_prompt(const Watermark& w, SchemeKind scheme);

// Scheme encoded in a set id, if it has the builder's format.
SchemeKind scheme_of_set_id(std::string_view set_id);

// Candidate-set files: header "scheme=<kind>;size=<n>" then one candidate per line.
void write_watermark_set(std::ostream& out, const WatermarkSet& set);
WatermarkSet read_watermark_set(std::istream& in);
void save_watermark_set(const std::string& path, const WatermarkSet& set);
WatermarkSet load_watermark_set(const std::string& path);

// "keyword,count" lines; the count follows the last comma.
KeywordFrequencyTable read_keyword_table(std::istream& in);
KeywordFrequencyTable load_keyword_table(const std::string& path);

// One surname per line, blank lines and '#' comments ignored.
std::vector<std::string> load_surnames(const std::string& path);

}  // namespace revmark
