#pragma once

#include "revmark/pdf.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace revmark {

enum class InjectionMethod { WhiteText, SymbolFont, RemappedFont, TranslatedText };

std::string_view method_name(InjectionMethod m) noexcept;
InjectionMethod parse_method(std::string_view text);

struct Rgb {
  double r = 0.0, g = 0.0, b = 0.0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

inline constexpr std::size_t kEndPage = std::numeric_limits<std::size_t>::max();

struct InjectionSpec {
  InjectionMethod method = InjectionMethod::WhiteText;
  std::string payload;
  std::optional<std::string> display_text;  // RemappedFont only
  std::size_t page = kEndPage;              // 0-based; kEndPage is the last page
  std::optional<double> font_size;          // points
  std::optional<Rgb> color;
  std::string font_file;  // SymbolFont: TrueType file to embed instead of synthesized glyphs
};

double default_font_size(InjectionMethod m) noexcept;
Rgb default_color(InjectionMethod m) noexcept;

// Payload character -> displayed character.
struct RemapTable {
  std::map<char32_t, char32_t> pairs;
};
RemapTable read_remap_table(std::istream& in);
RemapTable load_remap_table(const std::string& path);

struct GlyphAudit {
  std::string font;  // resource name
  unsigned code = 0;
  std::string payload;    // text-layer mapping (ToUnicode)
  std::string displayed;  // what the glyph draws; U+FFFD for non-letter glyphs
  friend bool operator==(const GlyphAudit&, const GlyphAudit&) = default;
};

struct InjectionResult {
  std::string bytes;  // the incrementally updated file
  std::size_t page = 0;
  std::vector<std::string> fonts;  // resource names added to the page
  std::vector<GlyphAudit> audit;   // RemappedFont: one entry per distinct code
};

InjectionResult inject_white_text(const pdf::Document& doc, const InjectionSpec& spec);
InjectionResult inject_symbol_font(const pdf::Document& doc, const InjectionSpec& spec);
// Single-font remap: displayed text is map(payload); spec.display_text, if
// set, must agree with it.
InjectionResult inject_remapped_font(const pdf::Document& doc, const InjectionSpec& spec,
                                     const RemapTable& map);
// Remap derived position-wise from spec.display_text; positions that would
// make one font non-functional are placed in additional fonts.
InjectionResult inject_remapped_font(const pdf::Document& doc, const InjectionSpec& spec);
InjectionResult inject_translated(const pdf::Document& doc, const InjectionSpec& spec);
InjectionResult inject(const pdf::Document& doc, const InjectionSpec& spec,
                       const RemapTable* map = nullptr);

// Key=value spec files: method, page, font_size, color, payload / payload_file,
// display / display_file, remap_file, font_file. Relative paths resolve
// against the spec file's directory.
struct InjectionSpecFile {
  InjectionSpec spec;
  std::optional<RemapTable> remap;
};
InjectionSpecFile load_injection_spec(const std::string& path);

enum class FontKind { Standard, Composite, Type3Remap, Type3Symbol, EmbeddedSymbolic };

struct Glyph {
  unsigned code = 0;
  std::string text;       // via the text-layer mapping
  std::string displayed;  // via the glyph program
};

struct TextRun {
  std::size_t block = 0;  // BT/ET block index within the page
  std::string font;
  FontKind font_kind = FontKind::Standard;
  double size = 0.0;  // effective size in user space
  Rgb fill;
  int render_mode = 0;
  std::string separator;  // emitted before this run's text ("", " " or "\n")
  std::vector<Glyph> glyphs;

  std::string text() const;
  std::string displayed() const;
};

std::vector<TextRun> text_runs(const pdf::Document& doc, std::size_t page);
std::vector<std::string> extract_text(const pdf::Document& doc);
std::vector<std::string> displayed_text(const pdf::Document& doc);

enum class Stealth { None, WhiteOnWhite, SymbolGlyphs, Remapped, SmallFont };
std::string_view stealth_name(Stealth s) noexcept;
Stealth expected_stealth(InjectionMethod m) noexcept;

struct VerificationReport {
  bool payload_extractable = false;
  std::optional<std::size_t> page;
  std::size_t occurrences = 0;
  std::optional<Stealth> visual_stealth;
  bool preexisting_unchanged = false;
  std::vector<GlyphAudit> audit;
  std::vector<std::string> audit_diff;
  std::vector<std::string> notes;
};

VerificationReport verify_injection(const pdf::Document& doc, const InjectionSpec& spec);

}  // namespace revmark
