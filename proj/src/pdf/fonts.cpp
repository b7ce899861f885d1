#include "fonts.hpp"

#include "revmark/error.hpp"
#include "revmark/pdf.hpp"

#include <fmt/format.h>

#include <array>
#include <charconv>
#include <unordered_map>

namespace revmark::pdf {

namespace {

// Unicode values for WinAnsi 0x80..0x9F; 0 marks an undefined code.
constexpr std::array<char32_t, 32> kWinAnsiHigh = {
    0x20AC, 0,      0x201A, 0x0192, 0x201E, 0x2026, 0x2020, 0x2021,
    0x02C6, 0x2030, 0x0160, 0x2039, 0x0152, 0,      0x017D, 0,
    0,      0x2018, 0x2019, 0x201C, 0x201D, 0x2022, 0x2013, 0x2014,
    0x02DC, 0x2122, 0x0161, 0x203A, 0x0153, 0,      0x017E, 0x0178};

constexpr std::array<std::string_view, 224> kWinAnsiNames = {
    // 0x20
    "space", "exclam", "quotedbl", "numbersign", "dollar", "percent", "ampersand", "quotesingle",
    "parenleft", "parenright", "asterisk", "plus", "comma", "hyphen", "period", "slash",
    "zero", "one", "two", "three", "four", "five", "six", "seven",
    "eight", "nine", "colon", "semicolon", "less", "equal", "greater", "question",
    // 0x40
    "at", "A", "B", "C", "D", "E", "F", "G", "H", "I", "J", "K", "L", "M", "N", "O",
    "P", "Q", "R", "S", "T", "U", "V", "W", "X", "Y", "Z",
    "bracketleft", "backslash", "bracketright", "asciicircum", "underscore",
    // 0x60
    "grave", "a", "b", "c", "d", "e", "f", "g", "h", "i", "j", "k", "l", "m", "n", "o",
    "p", "q", "r", "s", "t", "u", "v", "w", "x", "y", "z",
    "braceleft", "bar", "braceright", "asciitilde", "",
    // 0x80
    "Euro", "", "quotesinglbase", "florin", "quotedblbase", "ellipsis", "dagger", "daggerdbl",
    "circumflex", "perthousand", "Scaron", "guilsinglleft", "OE", "", "Zcaron", "",
    "", "quoteleft", "quoteright", "quotedblleft", "quotedblright", "bullet", "endash", "emdash",
    "tilde", "trademark", "scaron", "guilsinglright", "oe", "", "zcaron", "Ydieresis",
    // 0xA0
    "nbspace", "exclamdown", "cent", "sterling", "currency", "yen", "brokenbar", "section",
    "dieresis", "copyright", "ordfeminine", "guillemotleft", "logicalnot", "sfthyphen",
    "registered", "macron",
    "degree", "plusminus", "twosuperior", "threesuperior", "acute", "mu", "paragraph",
    "periodcentered", "cedilla", "onesuperior", "ordmasculine", "guillemotright", "onequarter",
    "onehalf", "threequarters", "questiondown",
    // 0xC0
    "Agrave", "Aacute", "Acircumflex", "Atilde", "Adieresis", "Aring", "AE", "Ccedilla",
    "Egrave", "Eacute", "Ecircumflex", "Edieresis", "Igrave", "Iacute", "Icircumflex",
    "Idieresis",
    "Eth", "Ntilde", "Ograve", "Oacute", "Ocircumflex", "Otilde", "Odieresis", "multiply",
    "Oslash", "Ugrave", "Uacute", "Ucircumflex", "Udieresis", "Yacute", "Thorn", "germandbls",
    // 0xE0
    "agrave", "aacute", "acircumflex", "atilde", "adieresis", "aring", "ae", "ccedilla",
    "egrave", "eacute", "ecircumflex", "edieresis", "igrave", "iacute", "icircumflex",
    "idieresis",
    "eth", "ntilde", "ograve", "oacute", "ocircumflex", "otilde", "odieresis", "divide",
    "oslash", "ugrave", "uacute", "ucircumflex", "udieresis", "yacute", "thorn", "ydieresis"};

constexpr std::array<short, 224> kHelveticaWidths = {
    // 0x20
    278, 278, 355, 556, 556, 889, 667, 191, 333, 333, 389, 584, 278, 333, 278, 278,
    556, 556, 556, 556, 556, 556, 556, 556, 556, 556, 278, 278, 584, 584, 584, 556,
    // 0x40
    1015, 667, 667, 722, 722, 667, 611, 778, 722, 278, 500, 667, 556, 833, 722, 778,
    667, 778, 722, 667, 611, 722, 667, 944, 667, 667, 611, 278, 278, 278, 469, 556,
    // 0x60
    333, 556, 556, 500, 556, 556, 278, 556, 556, 222, 222, 500, 222, 833, 556, 556,
    556, 556, 333, 500, 278, 556, 500, 722, 500, 500, 500, 334, 260, 334, 584, 0,
    // 0x80
    556, 0, 222, 556, 333, 1000, 556, 556, 333, 1000, 667, 333, 1000, 0, 611, 0,
    0, 222, 222, 333, 333, 350, 556, 1000, 333, 1000, 500, 333, 944, 0, 500, 667,
    // 0xA0
    278, 333, 556, 556, 556, 556, 260, 556, 333, 737, 370, 556, 584, 333, 737, 333,
    400, 584, 333, 333, 333, 556, 537, 278, 333, 333, 365, 556, 834, 834, 834, 611,
    // 0xC0
    667, 667, 667, 667, 667, 667, 1000, 722, 667, 667, 667, 667, 278, 278, 278, 278,
    722, 722, 778, 778, 778, 778, 778, 584, 778, 722, 722, 722, 722, 667, 667, 611,
    // 0xE0
    556, 556, 556, 556, 556, 556, 889, 500, 556, 556, 556, 556, 278, 278, 278, 278,
    556, 556, 556, 556, 556, 556, 556, 584, 611, 556, 556, 556, 556, 500, 556, 500};

const std::unordered_map<std::string_view, char32_t>& glyph_table() {
  static const auto table = [] {
    std::unordered_map<std::string_view, char32_t> t;
    for (unsigned c = 0x20; c <= 0xFF; ++c) {
      const auto name = kWinAnsiNames[c - 0x20];
      const char32_t cp = winansi_decode(static_cast<unsigned char>(c));
      if (!name.empty() && cp) t.emplace(name, cp);
    }
    t["nbspace"] = 0xA0;
    t["space"] = 0x20;
    t["minus"] = 0x2212;
    t["fi"] = 0xFB01;
    t["fl"] = 0xFB02;
    t["ff"] = 0xFB00;
    t["ffi"] = 0xFB03;
    t["ffl"] = 0xFB04;
    t["dotlessi"] = 0x0131;
    t["fraction"] = 0x2044;
    t["quoteright"] = 0x2019;
    t["quoteleft"] = 0x2018;
    return t;
  }();
  return table;
}

std::optional<char32_t> parse_hex_cp(std::string_view hex) {
  std::uint32_t v = 0;
  const auto [p, ec] = std::from_chars(hex.data(), hex.data() + hex.size(), v, 16);
  if (ec != std::errc{} || p != hex.data() + hex.size() || v > 0x10FFFF) return std::nullopt;
  return static_cast<char32_t>(v);
}

std::uint16_t be16(std::string_view d, std::size_t p) {
  if (p + 2 > d.size()) fail(ErrorCode::FontResourceMissing, "truncated TrueType data");
  return static_cast<std::uint16_t>((static_cast<unsigned char>(d[p]) << 8) |
                                    static_cast<unsigned char>(d[p + 1]));
}

std::int16_t be16s(std::string_view d, std::size_t p) { return static_cast<std::int16_t>(be16(d, p)); }

std::uint32_t be32(std::string_view d, std::size_t p) {
  return (static_cast<std::uint32_t>(be16(d, p)) << 16) | be16(d, p + 2);
}

std::uint64_t bytes_to_code(std::string_view b) {
  std::uint64_t v = 0;
  for (const unsigned char c : b) v = (v << 8) | c;
  return v;
}

}  // namespace

std::optional<unsigned char> winansi_encode(char32_t cp) {
  if (cp >= 0x20 && cp < 0x7F) return static_cast<unsigned char>(cp);
  if (cp >= 0xA0 && cp <= 0xFF) return static_cast<unsigned char>(cp);
  for (std::size_t i = 0; i < kWinAnsiHigh.size(); ++i)
    if (kWinAnsiHigh[i] && kWinAnsiHigh[i] == cp) return static_cast<unsigned char>(0x80 + i);
  return std::nullopt;
}

char32_t winansi_decode(unsigned char code) {
  if (code >= 0x80 && code <= 0x9F) return kWinAnsiHigh[code - 0x80];
  if (code == 0x7F) return 0;
  return code;
}

std::string_view winansi_glyph_name(unsigned char code) {
  return code < 0x20 ? std::string_view() : kWinAnsiNames[code - 0x20];
}

std::optional<char32_t> glyph_to_unicode(std::string_view name) {
  const auto dot = name.find('.');
  if (dot != std::string_view::npos && dot > 0) name = name.substr(0, dot);
  const auto& t = glyph_table();
  if (const auto it = t.find(name); it != t.end()) return it->second;
  if (name.size() == 7 && name.substr(0, 3) == "uni") return parse_hex_cp(name.substr(3));
  if (name.size() >= 5 && name.size() <= 7 && name[0] == 'u') return parse_hex_cp(name.substr(1));
  return std::nullopt;
}

int helvetica_width(unsigned char code) {
  return code < 0x20 ? 0 : kHelveticaWidths[code - 0x20];
}

std::vector<char32_t> utf8_to_codepoints(std::string_view s) {
  std::vector<char32_t> out;
  for (std::size_t i = 0; i < s.size();) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    int len = b0 < 0x80 ? 1 : (b0 >> 5) == 6 ? 2 : (b0 >> 4) == 14 ? 3 : (b0 >> 3) == 30 ? 4 : 0;
    if (len == 0 || i + static_cast<std::size_t>(len) > s.size()) {
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    char32_t cp = len == 1 ? b0 : len == 2 ? (b0 & 0x1F) : len == 3 ? (b0 & 0x0F) : (b0 & 0x07);
    bool ok = true;
    for (int k = 1; k < len; ++k) {
      const auto b = static_cast<unsigned char>(s[i + static_cast<std::size_t>(k)]);
      if ((b & 0xC0) != 0x80) ok = false;
      cp = (cp << 6) | (b & 0x3F);
    }
    if (!ok) {
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += static_cast<std::size_t>(len);
  }
  return out;
}

std::string codepoint_to_utf8(char32_t cp) {
  std::string out;
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
  return out;
}

std::string codepoints_to_utf8(const std::vector<char32_t>& cps) {
  std::string out;
  for (const auto cp : cps) out += codepoint_to_utf8(cp);
  return out;
}

std::string utf16be_to_utf8(std::string_view bytes) {
  std::string out;
  for (std::size_t i = 0; i + 1 < bytes.size(); i += 2) {
    char32_t u = (static_cast<unsigned char>(bytes[i]) << 8) | static_cast<unsigned char>(bytes[i + 1]);
    if (u >= 0xD800 && u <= 0xDBFF && i + 3 < bytes.size()) {
      const char32_t lo =
          (static_cast<unsigned char>(bytes[i + 2]) << 8) | static_cast<unsigned char>(bytes[i + 3]);
      if (lo >= 0xDC00 && lo <= 0xDFFF) {
        u = 0x10000 + ((u - 0xD800) << 10) + (lo - 0xDC00);
        i += 2;
      }
    }
    out += codepoint_to_utf8(u);
  }
  return out;
}

std::string build_tounicode_cmap(const std::map<unsigned, char32_t>& map) {
  std::string out =
      "/CIDInit /ProcSet findresource begin\n"
      "12 dict begin\n"
      "begincmap\n"
      "/CIDSystemInfo << /Registry (Adobe) /Ordering (UCS) /Supplement 0 >> def\n"
      "/CMapName /Adobe-Identity-UCS def\n"
      "/CMapType 2 def\n"
      "1 begincodespacerange\n<00> <FF>\nendcodespacerange\n";
  auto it = map.begin();
  while (it != map.end()) {
    std::size_t n = 0;
    std::string block;
    for (; it != map.end() && n < 100; ++it, ++n) {
      char32_t cp = it->second;
      std::string dst;
      if (cp >= 0x10000) {
        cp -= 0x10000;
        dst = fmt::format("{:04X}{:04X}", 0xD800 + (cp >> 10), 0xDC00 + (cp & 0x3FF));
      } else {
        dst = fmt::format("{:04X}", static_cast<unsigned>(cp));
      }
      block += fmt::format("<{:02X}> <{}>\n", it->first, dst);
    }
    out += fmt::format("{} beginbfchar\n{}endbfchar\n", n, block);
  }
  out +=
      "endcmap\n"
      "CMapName currentdict /CMap defineresource pop\n"
      "end\n"
      "end\n";
  return out;
}

ParsedCMap parse_tounicode_cmap(std::string_view data) {
  ParsedCMap out;
  Lexer lx(data);
  std::vector<Object> operands;
  auto dst_text = [](const Object& o) -> std::string {
    if (const auto* s = o.get_if<String>()) return utf16be_to_utf8(s->bytes);
    if (const auto* n = o.name())
      if (const auto cp = glyph_to_unicode(*n)) return codepoint_to_utf8(*cp);
    return {};
  };
  while (!lx.at_end()) {
    std::optional<Object> obj;
    try {
      obj = lx.parse_object();
    } catch (const Error&) {
      break;
    }
    if (obj) {
      operands.push_back(std::move(*obj));
      continue;
    }
    const std::string kw = lx.read_keyword();
    if (kw == "endcodespacerange") {
      for (const auto& o : operands)
        if (const auto* s = o.get_if<String>(); s && !s->bytes.empty())
          out.code_bytes = std::max(out.code_bytes, static_cast<int>(s->bytes.size()));
    } else if (kw == "endbfchar") {
      for (std::size_t i = 0; i + 1 < operands.size(); i += 2) {
        const auto* src = operands[i].get_if<String>();
        if (!src) continue;
        out.to_unicode[static_cast<std::uint32_t>(bytes_to_code(src->bytes))] =
            dst_text(operands[i + 1]);
      }
    } else if (kw == "endbfrange") {
      for (std::size_t i = 0; i + 2 < operands.size(); i += 3) {
        const auto* lo = operands[i].get_if<String>();
        const auto* hi = operands[i + 1].get_if<String>();
        if (!lo || !hi) continue;
        const auto a = bytes_to_code(lo->bytes), b = bytes_to_code(hi->bytes);
        if (b < a || b - a > 65535) continue;
        if (const auto* arr = operands[i + 2].get_if<Array>()) {
          for (std::uint64_t c = a; c <= b && c - a < arr->size(); ++c)
            out.to_unicode[static_cast<std::uint32_t>(c)] = dst_text((*arr)[c - a]);
        } else if (const auto* dst = operands[i + 2].get_if<String>()) {
          std::string base = dst->bytes;
          for (std::uint64_t c = a; c <= b; ++c) {
            out.to_unicode[static_cast<std::uint32_t>(c)] = utf16be_to_utf8(base);
            if (!base.empty()) {
              // Increment the last UTF-16 code unit.
              std::size_t k = base.size();
              while (k > 0) {
                --k;
                base[k] = static_cast<char>(static_cast<unsigned char>(base[k]) + 1);
                if (base[k] != 0) break;
              }
            }
          }
        }
      }
    }
    operands.clear();
  }
  return out;
}

TrueTypeMetrics read_truetype_metrics(std::string_view d) {
  if (d.size() < 12) fail(ErrorCode::FontResourceMissing, "font file too small");
  const std::uint32_t version = be32(d, 0);
  if (version != 0x00010000 && version != 0x74727565)
    fail(ErrorCode::FontResourceMissing, "not a TrueType font file");
  const std::uint16_t num_tables = be16(d, 4);
  std::map<std::string, std::pair<std::size_t, std::size_t>> tables;
  for (std::uint16_t i = 0; i < num_tables; ++i) {
    const std::size_t rec = 12 + 16 * static_cast<std::size_t>(i);
    const std::string tag(d.substr(rec, 4));
    const std::size_t off = be32(d, rec + 8), len = be32(d, rec + 12);
    if (off + len > d.size()) fail(ErrorCode::FontResourceMissing, "TrueType table out of range");
    tables[tag] = {off, len};
  }
  for (const char* required : {"head", "hhea", "hmtx", "cmap"})
    if (!tables.count(required))
      fail(ErrorCode::FontResourceMissing, fmt::format("TrueType font lacks '{}' table", required));

  TrueTypeMetrics m;
  const std::size_t head = tables["head"].first;
  m.units_per_em = be16(d, head + 18);
  if (m.units_per_em == 0) fail(ErrorCode::FontResourceMissing, "bad unitsPerEm");
  const double scale = 1000.0 / m.units_per_em;
  for (int k = 0; k < 4; ++k)
    m.bbox[k] = static_cast<int>(be16s(d, head + 36 + 2 * static_cast<std::size_t>(k)) * scale);
  const std::size_t hhea = tables["hhea"].first;
  m.ascent = static_cast<int>(be16s(d, hhea + 4) * scale);
  m.descent = static_cast<int>(be16s(d, hhea + 6) * scale);
  const std::uint16_t n_metrics = be16(d, hhea + 34);
  const std::size_t hmtx = tables["hmtx"].first;
  auto advance = [&](std::uint32_t gid) {
    if (n_metrics == 0) return 0;
    const std::uint32_t g = std::min<std::uint32_t>(gid, n_metrics - 1u);
    return static_cast<int>(be16(d, hmtx + 4 * static_cast<std::size_t>(g)) * scale + 0.5);
  };

  if (const auto it = tables.find("name"); it != tables.end()) {
    const std::size_t base = it->second.first;
    const std::uint16_t count = be16(d, base + 2);
    const std::size_t strings = base + be16(d, base + 4);
    for (std::uint16_t i = 0; i < count; ++i) {
      const std::size_t rec = base + 6 + 12 * static_cast<std::size_t>(i);
      if (be16(d, rec + 6) != 6) continue;
      const std::size_t len = be16(d, rec + 8), off = strings + be16(d, rec + 10);
      if (off + len > d.size()) continue;
      std::string name;
      const bool utf16 = be16(d, rec) == 3 || be16(d, rec) == 0;
      for (std::size_t k = utf16 ? 1 : 0; k < len; k += utf16 ? 2 : 1) {
        const char c = d[off + k];
        if (c > 32 && c < 127 && c != '/' && c != '(' && c != ')') name += c;
      }
      if (!name.empty()) {
        m.postscript_name = name;
        break;
      }
    }
  }

  // Format-4 subtables: (platform, encoding) -> segment lookup.
  const std::size_t cmap = tables["cmap"].first;
  std::map<std::pair<int, int>, std::size_t> subtables;
  const std::uint16_t n_sub = be16(d, cmap + 2);
  for (std::uint16_t i = 0; i < n_sub; ++i) {
    const std::size_t rec = cmap + 4 + 8 * static_cast<std::size_t>(i);
    const std::size_t off = cmap + be32(d, rec + 4);
    if (off + 4 <= d.size() && be16(d, off) == 4) subtables[{be16(d, rec), be16(d, rec + 2)}] = off;
  }
  auto lookup4 = [&](std::size_t sub, std::uint32_t cp) -> std::uint32_t {
    if (cp > 0xFFFF) return 0;
    const std::size_t seg_x2 = be16(d, sub + 6);
    const std::size_t ends = sub + 14, starts = ends + seg_x2 + 2, deltas = starts + seg_x2,
                      ranges = deltas + seg_x2;
    for (std::size_t s = 0; s < seg_x2; s += 2) {
      const std::uint16_t end = be16(d, ends + s);
      if (cp > end) continue;
      const std::uint16_t start = be16(d, starts + s);
      if (cp < start) return 0;
      const std::uint16_t delta = be16(d, deltas + s);
      const std::uint16_t range = be16(d, ranges + s);
      if (range == 0) return static_cast<std::uint16_t>(cp + delta);
      const std::size_t gp = ranges + s + range + 2 * (cp - start);
      const std::uint16_t g = be16(d, gp);
      return g == 0 ? 0 : static_cast<std::uint16_t>(g + delta);
    }
    return 0;
  };
  const auto sym = subtables.find({3, 0});
  const auto uni = subtables.find({3, 1});
  if (sym == subtables.end() && uni == subtables.end())
    fail(ErrorCode::FontResourceMissing, "TrueType font has no usable cmap");
  for (unsigned code = 0x20; code <= 0xFF; ++code) {
    std::uint32_t gid = 0;
    if (sym != subtables.end()) {
      gid = lookup4(sym->second, 0xF000 + code);
      if (!gid) gid = lookup4(sym->second, code);
    }
    if (!gid && uni != subtables.end()) {
      const char32_t cp = winansi_decode(static_cast<unsigned char>(code));
      gid = lookup4(uni->second, cp ? cp : code);
    }
    m.code_widths[code] = advance(gid);
  }
  return m;
}

}  // namespace revmark::pdf
