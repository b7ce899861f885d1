#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace revmark::pdf {

// WinAnsiEncoding: byte <-> Unicode, and the standard glyph names.
std::optional<unsigned char> winansi_encode(char32_t cp);
char32_t winansi_decode(unsigned char code);
std::string_view winansi_glyph_name(unsigned char code);
// Glyph name -> code point (standard Latin names, uniXXXX, uXXXX[XX]).
std::optional<char32_t> glyph_to_unicode(std::string_view name);

// Helvetica advance width (1000 units/em) for a WinAnsi code.
int helvetica_width(unsigned char code);

std::vector<char32_t> utf8_to_codepoints(std::string_view s);
std::string codepoints_to_utf8(const std::vector<char32_t>& cps);
std::string codepoint_to_utf8(char32_t cp);
std::string utf16be_to_utf8(std::string_view bytes);

// ToUnicode CMap over one-byte codes.
std::string build_tounicode_cmap(const std::map<unsigned, char32_t>& map);

struct ParsedCMap {
  std::map<std::uint32_t, std::string> to_unicode;  // code -> UTF-8
  int code_bytes = 0;                               // from codespacerange, 0 if absent
};
ParsedCMap parse_tounicode_cmap(std::string_view data);

struct TrueTypeMetrics {
  int units_per_em = 1000;
  int ascent = 800, descent = -200;
  int bbox[4] = {0, -200, 1000, 800};
  std::string postscript_name;
  // Advance width in 1000-unit space for each one-byte code, looked up via
  // the (3,0) symbol cmap at 0xF000+code, then (3,1) at the code itself.
  std::map<unsigned, int> code_widths;
};
// Throws FontResourceMissing if the data is not a usable TrueType font.
TrueTypeMetrics read_truetype_metrics(std::string_view data);

}  // namespace revmark::pdf
