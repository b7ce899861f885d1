#include "revmark/inject.hpp"

#include "pdf/fonts.hpp"
#include "revmark/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace revmark {

using namespace pdf;

namespace {

std::string lower(std::string_view s) {
  std::string out;
  for (const char c : s)
    if (c != '_' && c != '-' && c != ' ') out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string num(double v) { return serialize(Object(v)); }

std::string hex_string(std::string_view bytes) { return serialize(Object(String{std::string(bytes), true})); }

Array numbers(std::initializer_list<double> v) {
  Array out;
  for (const double d : v) out.emplace_back(d);
  return out;
}

Object stream_object(Dict dict, std::string_view content) {
  dict.set("Filter", make_name("FlateDecode"));
  return Stream{std::move(dict), flate_compress(content)};
}

std::string encode_winansi(const std::vector<char32_t>& cps, std::string_view what) {
  std::string out;
  for (const char32_t cp : cps) {
    const auto b = winansi_encode(cp);
    if (!b)
      fail(ErrorCode::UnencodablePayload,
           fmt::format("{} character U+{:04X} has no WinAnsi code", what, static_cast<unsigned>(cp)));
    out += static_cast<char>(*b);
  }
  return out;
}

// One font plus the codes drawn with it, in drawing order.
struct Segment {
  std::string font;
  std::string codes;
};

class PageEditor {
 public:
  PageEditor(const Document& doc, std::size_t page) : doc_(doc) {
    const auto& pages = doc.pages();
    if (pages.empty()) fail(ErrorCode::MalformedPdf, "document has no pages");
    if (page == kEndPage) page = pages.size() - 1;
    if (page >= pages.size())
      fail(ErrorCode::PageOutOfRange,
           fmt::format("page {} out of range (document has {} pages)", page + 1, pages.size()));
    index_ = page;
    page_ = &pages[page];
    if (const auto* f = page_->resources.find("Font"))
      if (const Dict* d = doc.resolve_dict(*f)) fonts_ = *d;
  }

  std::size_t index() const { return index_; }

  std::string new_font_name() {
    for (int n = 1;; ++n) {
      std::string name = fmt::format("RvmF{}", n);
      if (!fonts_.contains(name)) {
        fonts_.set(name, Null{});
        added_.push_back(name);
        return name;
      }
    }
  }

  void set_font(const std::string& name, Ref ref) { fonts_.set(name, ref); }

  Ref add(Object obj) { return doc_.add_object(std::move(obj)); }

  InjectionResult finish(const std::vector<Segment>& segments, double size, const Rgb& color) {
    std::vector<double> box = page_->media_box.value_or(std::vector<double>{0, 0, 612, 792});
    if (box.size() < 4) box = {0, 0, 612, 792};
    const double x = std::min(box[0], box[2]) + 36.0;
    const double y = std::min(box[1], box[3]) + std::max(size, 2.0) + 2.0;

    std::string content = "Q\nq\n";
    bool any = false;
    for (const auto& s : segments) any = any || !s.codes.empty();
    if (any) {
      content += fmt::format("BT\n{} {} {} rg\n{} {} Td\n", num(color.r), num(color.g), num(color.b), num(x), num(y));
      for (const auto& s : segments) {
        if (s.codes.empty()) continue;
        content += fmt::format("{} {} Tf\n{} Tj\n", serialize_name(s.font), num(size), hex_string(s.codes));
      }
      content += "ET\n";
    }
    content += "Q\n";

    Array contents;
    contents.emplace_back(add(stream_object(Dict{}, "q\n")));
    for (const Ref r : doc_.content_refs(*page_)) contents.emplace_back(r);
    contents.emplace_back(add(stream_object(Dict{}, content)));

    Dict resources = page_->resources;
    resources.set("Font", fonts_);
    Dict page_dict = page_->dict;
    page_dict.set("Contents", std::move(contents));
    page_dict.set("Resources", std::move(resources));
    doc_.replace_object(page_->ref, std::move(page_dict));

    InjectionResult out;
    out.bytes = doc_.save_incremental();
    out.page = index_;
    out.fonts = added_;
    return out;
  }

 private:
  Document doc_;
  const Page* page_ = nullptr;
  std::size_t index_ = 0;
  Dict fonts_;
  std::vector<std::string> added_;
};

Ref add_tounicode(PageEditor& ed, const std::map<unsigned, char32_t>& map) {
  return ed.add(stream_object(Dict{}, build_tounicode_cmap(map)));
}

Ref add_helvetica(PageEditor& ed, std::optional<Ref> to_unicode) {
  Dict f;
  f.set("Type", make_name("Font"));
  f.set("Subtype", make_name("Type1"));
  f.set("BaseFont", make_name("Helvetica"));
  f.set("Encoding", make_name("WinAnsiEncoding"));
  if (to_unicode) f.set("ToUnicode", *to_unicode);
  return ed.add(std::move(f));
}

InjectionResult inject_standard(const Document& doc, const InjectionSpec& spec) {
  const auto cps = utf8_to_codepoints(spec.payload);
  const std::string codes = encode_winansi(cps, "payload");
  PageEditor ed(doc, spec.page);
  const std::string font = ed.new_font_name();
  std::map<unsigned, char32_t> tu;
  for (std::size_t i = 0; i < codes.size(); ++i) tu[static_cast<unsigned char>(codes[i])] = cps[i];
  std::optional<Ref> tu_ref;
  if (!tu.empty()) tu_ref = add_tounicode(ed, tu);
  ed.set_font(font, add_helvetica(ed, tu_ref));
  return ed.finish({Segment{font, codes}}, spec.font_size.value_or(default_font_size(spec.method)),
                   spec.color.value_or(default_color(spec.method)));
}

Dict type3_font_dict(const std::map<unsigned, std::pair<std::string, int>>& glyphs,
                     const Dict& char_procs, Ref to_unicode, Dict resources) {
  Array diffs;
  Array widths;
  const unsigned first = glyphs.begin()->first, last = glyphs.rbegin()->first;
  for (unsigned c = first; c <= last; ++c) {
    const auto it = glyphs.find(c);
    widths.emplace_back(it == glyphs.end() ? 0 : it->second.second);
    if (it != glyphs.end()) {
      diffs.emplace_back(static_cast<int>(c));
      diffs.emplace_back(make_name(it->second.first));
    }
  }
  Dict enc;
  enc.set("Type", make_name("Encoding"));
  enc.set("Differences", std::move(diffs));
  Dict f;
  f.set("Type", make_name("Font"));
  f.set("Subtype", make_name("Type3"));
  f.set("FontBBox", numbers({0, -250, 1100, 1000}));
  f.set("FontMatrix", numbers({0.001, 0, 0, 0.001, 0, 0}));
  f.set("CharProcs", char_procs);
  f.set("Encoding", std::move(enc));
  f.set("FirstChar", static_cast<int>(first));
  f.set("LastChar", static_cast<int>(last));
  f.set("Widths", std::move(widths));
  f.set("ToUnicode", to_unicode);
  f.set("Resources", std::move(resources));
  return f;
}

std::string symbol_glyph(unsigned code) {
  // Geometric shapes; the variant and proportions depend on the code.
  const int w = 600;
  const int a = 80 + static_cast<int>(code * 37 % 120);
  const int b = 520 - static_cast<int>(code * 53 % 140);
  std::string out = fmt::format("{} 0 0 -10 {} 710 d1\n", w, w);
  switch (code % 4) {
    case 0:
      out += fmt::format("{} 0 m {} 0 l {} 700 l {} 700 l h f\n", a, b, b, a);
      break;
    case 1:
      out += fmt::format("{} 0 m {} 0 l 300 700 l h f\n", a, b);
      break;
    case 2:
      out += fmt::format("300 0 m {} 350 l 300 700 l {} 350 l h f\n", b, a);
      break;
    default:
      out += fmt::format("{} 150 m {} 150 l {} 550 l {} 550 l h f\n", a, b, b, a);
      out += fmt::format("300 {} m 300 {} l 0 0 l h f\n", a, b);
      break;
  }
  return out;
}

InjectionResult inject_symbol_type3(const Document& doc, const InjectionSpec& spec) {
  const auto cps = utf8_to_codepoints(spec.payload);
  std::map<char32_t, unsigned> code_of;
  std::string codes;
  for (const char32_t cp : cps) {
    auto it = code_of.find(cp);
    if (it == code_of.end()) {
      if (code_of.size() >= 255)
        fail(ErrorCode::UnencodablePayload, "payload uses more than 255 distinct characters");
      it = code_of.emplace(cp, static_cast<unsigned>(code_of.size() + 1)).first;
    }
    codes += static_cast<char>(it->second);
  }
  PageEditor ed(doc, spec.page);
  const std::string font = ed.new_font_name();
  if (!code_of.empty()) {
    Dict procs;
    std::map<unsigned, std::pair<std::string, int>> glyphs;
    std::map<unsigned, char32_t> tu;
    for (const auto& [cp, code] : code_of) {
      const std::string name = fmt::format("sym{:02X}", code);
      procs.set(name, ed.add(stream_object(Dict{}, symbol_glyph(code))));
      glyphs[code] = {name, 600};
      tu[code] = cp;
    }
    ed.set_font(font, ed.add(type3_font_dict(glyphs, procs, add_tounicode(ed, tu), Dict{})));
  } else {
    ed.set_font(font, add_helvetica(ed, std::nullopt));
  }
  return ed.finish({Segment{font, codes}}, spec.font_size.value_or(default_font_size(spec.method)),
                   spec.color.value_or(default_color(spec.method)));
}

std::string read_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::FontResourceMissing, "cannot read font file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

InjectionResult inject_symbol_truetype(const Document& doc, const InjectionSpec& spec) {
  const std::string data = read_binary(spec.font_file);
  const TrueTypeMetrics m = read_truetype_metrics(data);
  const auto cps = utf8_to_codepoints(spec.payload);
  const std::string codes = encode_winansi(cps, "payload");

  PageEditor ed(doc, spec.page);
  const std::string font = ed.new_font_name();
  Dict file_dict;
  file_dict.set("Length1", data.size());
  const Ref file = ed.add(stream_object(std::move(file_dict), data));
  const std::string base = m.postscript_name.empty() ? "EmbeddedSymbol" : m.postscript_name;

  Dict fd;
  fd.set("Type", make_name("FontDescriptor"));
  fd.set("FontName", make_name(base));
  fd.set("Flags", 4);
  fd.set("FontBBox", numbers({double(m.bbox[0]), double(m.bbox[1]), double(m.bbox[2]), double(m.bbox[3])}));
  fd.set("ItalicAngle", 0);
  fd.set("Ascent", m.ascent);
  fd.set("Descent", m.descent);
  fd.set("CapHeight", m.ascent);
  fd.set("StemV", 80);
  fd.set("FontFile2", file);
  const Ref fd_ref = ed.add(std::move(fd));

  std::map<unsigned, char32_t> tu;
  for (std::size_t i = 0; i < codes.size(); ++i) tu[static_cast<unsigned char>(codes[i])] = cps[i];
  Array widths;
  for (unsigned c = 32; c <= 255; ++c) {
    const auto it = m.code_widths.find(c);
    widths.emplace_back(it == m.code_widths.end() ? 0 : it->second);
  }
  Dict f;
  f.set("Type", make_name("Font"));
  f.set("Subtype", make_name("TrueType"));
  f.set("BaseFont", make_name(base));
  f.set("FirstChar", 32);
  f.set("LastChar", 255);
  f.set("Widths", std::move(widths));
  f.set("FontDescriptor", fd_ref);
  if (!tu.empty()) f.set("ToUnicode", add_tounicode(ed, tu));
  ed.set_font(font, ed.add(std::move(f)));
  return ed.finish({Segment{font, codes}}, spec.font_size.value_or(default_font_size(spec.method)),
                   spec.color.value_or(default_color(spec.method)));
}

// Functional payload -> display map realized as one Type3 font.
struct RemapFont {
  std::map<char32_t, char32_t> pairs;
  std::map<char32_t, unsigned> code_of;
};

InjectionResult emit_remap(const Document& doc, const InjectionSpec& spec,
                           const std::vector<char32_t>& payload, std::vector<RemapFont> fonts, const std::vector<std::size_t>& font_of) {
  PageEditor ed(doc, spec.page);
  const Ref helv = add_helvetica(ed, std::nullopt);
  std::vector<std::string> names;
  std::vector<GlyphAudit> audit;
  for (auto& rf : fonts) {
    const std::string name = ed.new_font_name();
    names.push_back(name);
    Dict procs;
    std::map<unsigned, std::pair<std::string, int>> glyphs;
    std::map<unsigned, char32_t> tu;
    for (const auto& [p, code] : rf.code_of) {
      const char32_t d = rf.pairs.at(p);
      const std::string shown = encode_winansi({d}, "display");
      const int w = helvetica_width(static_cast<unsigned char>(shown[0]));
      const std::string glyph_name = fmt::format("g{:02X}", code);
      const std::string proc =
          fmt::format("{} 0 d0\nBT\n/H 1000 Tf\n0 0 Td\n{} Tj\nET\n", w, hex_string(shown));
      procs.set(glyph_name, ed.add(stream_object(Dict{}, proc)));
      glyphs[code] = {glyph_name, w};
      tu[code] = p;
      audit.push_back(GlyphAudit{name, code, codepoint_to_utf8(p), codepoint_to_utf8(d)});
    }
    Dict font_res;
    font_res.set("H", helv);
    Dict res;
    res.set("Font", std::move(font_res));
    ed.set_font(name, ed.add(type3_font_dict(glyphs, procs, add_tounicode(ed, tu), std::move(res))));
  }
  std::vector<Segment> segments;
  for (std::size_t i = 0; i < payload.size(); ++i) {
    const std::size_t f = font_of[i];
    if (segments.empty() || segments.back().font != names[f]) segments.push_back(Segment{names[f], ""});
    segments.back().codes += static_cast<char>(fonts[f].code_of.at(payload[i]));
  }
  auto out = ed.finish(segments, spec.font_size.value_or(default_font_size(spec.method)),
                       spec.color.value_or(default_color(spec.method)));
  out.audit = std::move(audit);
  return out;
}

bool assign_code(RemapFont& f, char32_t p) {
  if (f.code_of.count(p)) return true;
  if (f.code_of.size() >= 254) return false;
  f.code_of[p] = static_cast<unsigned>(0x21 + f.code_of.size());
  return true;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string s = ss.str();
  if (!s.empty() && s.back() == '\n') s.pop_back();
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

}  // namespace

std::string_view method_name(InjectionMethod m) noexcept {
  switch (m) {
    case InjectionMethod::WhiteText: return "white_text";
    case InjectionMethod::SymbolFont: return "symbol_font";
    case InjectionMethod::RemappedFont: return "remapped_font";
    case InjectionMethod::TranslatedText: return "translated_text";
  }
  return "unknown";
}

InjectionMethod parse_method(std::string_view text) {
  const std::string t = lower(text);
  if (t == "whitetext" || t == "white") return InjectionMethod::WhiteText;
  if (t == "symbolfont" || t == "symbol") return InjectionMethod::SymbolFont;
  if (t == "remappedfont" || t == "remap" || t == "remapped") return InjectionMethod::RemappedFont;
  if (t == "translatedtext" || t == "translated") return InjectionMethod::TranslatedText;
  fail(ErrorCode::InvalidArgument, "unknown injection method '" + std::string(text) + "'");
}

double default_font_size(InjectionMethod m) noexcept {
  return m == InjectionMethod::TranslatedText ? 2.0 : 10.0;
}

Rgb default_color(InjectionMethod m) noexcept {
  return m == InjectionMethod::WhiteText ? Rgb{1, 1, 1} : Rgb{0, 0, 0};
}

InjectionResult inject_white_text(const Document& doc, const InjectionSpec& spec) {
  return inject_standard(doc, spec);
}

InjectionResult inject_translated(const Document& doc, const InjectionSpec& spec) {
  return inject_standard(doc, spec);
}

InjectionResult inject_symbol_font(const Document& doc, const InjectionSpec& spec) {
  if (!spec.font_file.empty()) {
    if (!std::filesystem::exists(spec.font_file))
      fail(ErrorCode::FontResourceMissing, "font file not found: " + spec.font_file);
    return inject_symbol_truetype(doc, spec);
  }
  return inject_symbol_type3(doc, spec);
}

InjectionResult inject_remapped_font(const Document& doc, const InjectionSpec& spec, const RemapTable& map) {
  const auto payload = utf8_to_codepoints(spec.payload);
  RemapFont font;
  std::vector<char32_t> display;
  for (const char32_t p : payload) {
    const auto it = map.pairs.find(p);
    if (it == map.pairs.end())
      fail(ErrorCode::IncompleteRemap,
           fmt::format("remap table does not cover U+{:04X}", static_cast<unsigned>(p)));
    font.pairs[p] = it->second;
    display.push_back(it->second);
    if (!assign_code(font, p))
      fail(ErrorCode::UnencodablePayload, "payload uses more than 254 distinct characters");
  }
  if (spec.display_text) {
    const auto given = utf8_to_codepoints(*spec.display_text);
    if (given.size() != payload.size())
      fail(ErrorCode::LengthMismatch, fmt::format("display text has {} characters, payload has {}",
                                                  given.size(), payload.size()));
    if (given != display)
      fail(ErrorCode::DisplayMismatch, "display text differs from the remapped payload");
  }
  return emit_remap(doc, spec, payload, {std::move(font)},
                    std::vector<std::size_t>(payload.size(), 0));
}

InjectionResult inject_remapped_font(const Document& doc, const InjectionSpec& spec) {
  const auto payload = utf8_to_codepoints(spec.payload);
  const auto display = spec.display_text ? utf8_to_codepoints(*spec.display_text) : payload;
  if (display.size() != payload.size())
    fail(ErrorCode::LengthMismatch, fmt::format("display text has {} characters, payload has {}",
                                                display.size(), payload.size()));
  std::vector<RemapFont> fonts;
  std::vector<std::size_t> font_of;
  for (std::size_t i = 0; i < payload.size(); ++i) {
    const char32_t p = payload[i], d = display[i];
    std::size_t f = 0;
    for (; f < fonts.size(); ++f) {
      const auto it = fonts[f].pairs.find(p);
      if (it != fonts[f].pairs.end() ? it->second == d : fonts[f].code_of.size() < 254) break;
    }
    if (f == fonts.size()) fonts.emplace_back();
    fonts[f].pairs[p] = d;
    assign_code(fonts[f], p);
    font_of.push_back(f);
  }
  return emit_remap(doc, spec, payload, std::move(fonts), font_of);
}

InjectionResult inject(const Document& doc, const InjectionSpec& spec, const RemapTable* map) {
  switch (spec.method) {
    case InjectionMethod::WhiteText: return inject_white_text(doc, spec);
    case InjectionMethod::SymbolFont: return inject_symbol_font(doc, spec);
    case InjectionMethod::RemappedFont:
      return map ? inject_remapped_font(doc, spec, *map) : inject_remapped_font(doc, spec);
    case InjectionMethod::TranslatedText: return inject_translated(doc, spec);
  }
  fail(ErrorCode::InvalidArgument, "unknown injection method");
}

RemapTable read_remap_table(std::istream& in) {
  RemapTable t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) fail(ErrorCode::ParseError, fmt::format("remap line {}: missing tab", lineno));
    const auto p = utf8_to_codepoints(line.substr(0, tab));
    const auto d = utf8_to_codepoints(line.substr(tab + 1));
    if (p.size() != 1 || d.size() != 1)
      fail(ErrorCode::ParseError, fmt::format("remap line {}: expected one character per side", lineno));
    const auto [it, inserted] = t.pairs.emplace(p[0], d[0]);
    if (!inserted && it->second != d[0])
      fail(ErrorCode::ParseError, fmt::format("remap line {}: character mapped twice", lineno));
  }
  return t;
}

RemapTable load_remap_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot read " + path);
  return read_remap_table(in);
}

InjectionSpecFile load_injection_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot read " + path);
  const std::filesystem::path dir = std::filesystem::path(path).parent_path();
  auto resolve = [&](const std::string& p) {
    const std::filesystem::path fp(p);
    return fp.is_absolute() ? fp : dir / fp;
  };
  InjectionSpecFile out;
  bool have_method = false;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) fail(ErrorCode::ParseError, fmt::format("{}:{}: expected key=value", path, lineno));
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    try {
      if (key == "method") {
        out.spec.method = parse_method(value);
        have_method = true;
      } else if (key == "page") {
        if (lower(value) == "end") {
          out.spec.page = kEndPage;
        } else {
          const long n = std::stol(value);
          if (n < 1) fail(ErrorCode::ParseError, "page numbers start at 1");
          out.spec.page = static_cast<std::size_t>(n - 1);
        }
      } else if (key == "font_size") {
        out.spec.font_size = std::stod(value);
      } else if (key == "color") {
        std::string v = value;
        std::replace(v.begin(), v.end(), ',', ' ');
        std::istringstream ss(v);
        Rgb c;
        if (!(ss >> c.r >> c.g >> c.b)) fail(ErrorCode::ParseError, "color needs three components");
        for (const double x : {c.r, c.g, c.b})
          if (x < 0.0 || x > 1.0) fail(ErrorCode::ParseError, "color components must lie in [0,1]");
        out.spec.color = c;
      } else if (key == "payload") {
        out.spec.payload = value;
      } else if (key == "payload_file") {
        out.spec.payload = read_text_file(resolve(value));
      } else if (key == "display") {
        out.spec.display_text = value;
      } else if (key == "display_file") {
        out.spec.display_text = read_text_file(resolve(value));
      } else if (key == "remap_file") {
        out.remap = load_remap_table(resolve(value).string());
      } else if (key == "font_file") {
        out.spec.font_file = resolve(value).string();
      } else {
        fail(ErrorCode::ParseError, "unknown key '" + key + "'");
      }
    } catch (const std::logic_error&) {
      fail(ErrorCode::ParseError, fmt::format("{}:{}: bad value for {}", path, lineno, key));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::IoError) throw;
      fail(e.code() == ErrorCode::InvalidArgument ? ErrorCode::ParseError : e.code(),
           fmt::format("{}:{}: {}", path, lineno, e.what()));
    }
  }
  if (!have_method) fail(ErrorCode::ParseError, path + ": missing method");
  return out;
}

}  // namespace revmark
