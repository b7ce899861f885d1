#include "fonts.hpp"
#include "revmark/error.hpp"
#include "revmark/inject.hpp"

#include <array>
#include <cmath>
#include <map>
#include <memory>

namespace revmark {

using namespace pdf;

namespace {

constexpr std::string_view kReplacement = "\xEF\xBF\xBD";
constexpr int kMaxFormDepth = 8;

using Matrix = std::array<double, 6>;
constexpr Matrix kIdentity = {1, 0, 0, 1, 0, 0};

Matrix multiply(const Matrix& a, const Matrix& b) {
  return {a[0] * b[0] + a[1] * b[2],        a[0] * b[1] + a[1] * b[3],
          a[2] * b[0] + a[3] * b[2],        a[2] * b[1] + a[3] * b[3],
          a[4] * b[0] + a[5] * b[2] + b[4], a[4] * b[1] + a[5] * b[3] + b[5]};
}

std::optional<Matrix> matrix_from(const std::vector<Object>& ops, std::size_t first = 0) {
  if (ops.size() < first + 6) return std::nullopt;
  Matrix m{};
  for (std::size_t i = 0; i < 6; ++i) {
    const auto v = ops[first + i].number();
    if (!v) return std::nullopt;
    m[i] = *v;
  }
  return m;
}

struct FontInfo {
  FontKind kind = FontKind::Standard;
  int code_bytes = 1;
  std::map<std::uint32_t, std::string> to_unicode;
  std::array<std::string, 256> encoding;  // code -> UTF-8 via the font encoding
  std::map<unsigned, std::string> type3_displayed;
  double matrix_scale = 1.0;  // Type3 FontMatrix relative to 1/1000

  std::string text_of(std::uint32_t code) const {
    if (const auto it = to_unicode.find(code); it != to_unicode.end()) return it->second;
    if (code_bytes == 1 && code < 256 && !encoding[code].empty()) return encoding[code];
    return std::string(kReplacement);
  }

  std::string displayed_of(std::uint32_t code) const {
    switch (kind) {
      case FontKind::Standard:
        return code < 256 && !encoding[code].empty() ? encoding[code] : std::string(kReplacement);
      case FontKind::Composite:
        return text_of(code);
      case FontKind::Type3Remap:
      case FontKind::Type3Symbol:
        if (const auto it = type3_displayed.find(code); it != type3_displayed.end()) return it->second;
        return std::string(kReplacement);
      case FontKind::EmbeddedSymbolic:
        return std::string(kReplacement);
    }
    return std::string(kReplacement);
  }
};

void apply_encoding(const Document& doc, const Object* enc, std::array<std::string, 256>& out) {
  for (unsigned c = 0; c < 256; ++c) {
    const char32_t cp = winansi_decode(static_cast<unsigned char>(c));
    out[c] = cp >= 0x20 ? codepoint_to_utf8(cp) : std::string();
  }
  if (!enc) return;
  const Dict* d = doc.resolve_dict(*enc);
  if (!d) return;
  const auto* diffs = d->find("Differences");
  if (!diffs) return;
  const auto* arr = doc.resolve(*diffs).get_if<Array>();
  if (!arr) return;
  std::int64_t code = 0;
  for (const auto& item : *arr) {
    if (const auto n = item.integer()) {
      code = *n;
    } else if (const auto* name = item.name()) {
      if (code >= 0 && code < 256) {
        const auto cp = glyph_to_unicode(*name);
        out[static_cast<std::size_t>(code)] = cp ? codepoint_to_utf8(*cp) : std::string(kReplacement);
      }
      ++code;
    }
  }
}

class FontCache {
 public:
  explicit FontCache(const Document& doc) : doc_(doc) {}
  const FontInfo& get(const Dict& font);

 private:
  std::string type3_glyph_text(const Dict& font, const Stream& proc);

  const Document& doc_;
  std::map<const Dict*, std::unique_ptr<FontInfo>> cache_;
};

// Interprets one content stream tree (page plus forms) and collects runs.
class Interpreter {
 public:
  Interpreter(const Document& doc, FontCache& fonts) : doc_(doc), fonts_(fonts) {}

  void run(std::string_view content, const Dict& resources, const Matrix& ctm, int depth);
  std::vector<TextRun> take() { return std::move(runs_); }

 private:
  enum class Pending { None, Space, Newline };

  struct GState {
    Matrix ctm = kIdentity;
    Rgb fill;
    std::string font;
    const Dict* font_dict = nullptr;
    double font_size = 0.0;
    int render_mode = 0;
    double leading = 0.0;
  };

  void show(const std::string& bytes);
  void move_line(double tx, double ty);
  void request(Pending p) {
    if (static_cast<int>(p) > static_cast<int>(pending_)) pending_ = p;
  }

  const Document& doc_;
  FontCache& fonts_;
  std::vector<TextRun> runs_;
  GState gs_;
  std::vector<GState> stack_;
  Matrix tm_ = kIdentity, tlm_ = kIdentity;
  std::size_t block_ = 0;
  bool any_block_ = false;
  bool emitted_ = false;
  Pending pending_ = Pending::None;
};

void Interpreter::move_line(double tx, double ty) {
  tlm_ = multiply(Matrix{1, 0, 0, 1, tx, ty}, tlm_);
  tm_ = tlm_;
  if (ty != 0.0)
    request(Pending::Newline);
  else if (tx > 0.0)
    request(Pending::Space);
}

void Interpreter::show(const std::string& bytes) {
  if (!gs_.font_dict || bytes.empty()) return;
  const FontInfo& font = fonts_.get(*gs_.font_dict);
  TextRun run;
  run.block = block_;
  run.font = gs_.font;
  run.font_kind = font.kind;
  run.fill = gs_.fill;
  run.render_mode = gs_.render_mode;
  const Matrix trm = multiply(tm_, gs_.ctm);
  run.size = gs_.font_size * std::sqrt(std::abs(trm[0] * trm[3] - trm[1] * trm[2])) * font.matrix_scale;
  const std::size_t step = static_cast<std::size_t>(font.code_bytes);
  for (std::size_t i = 0; i + step <= bytes.size(); i += step) {
    std::uint32_t code = 0;
    for (std::size_t k = 0; k < step; ++k) code = (code << 8) | static_cast<unsigned char>(bytes[i + k]);
    run.glyphs.push_back(Glyph{code, font.text_of(code), font.displayed_of(code)});
  }
  if (run.glyphs.empty()) return;
  if (emitted_) {
    if (pending_ == Pending::Newline)
      run.separator = "\n";
    else if (pending_ == Pending::Space)
      run.separator = " ";
  }
  pending_ = Pending::None;
  emitted_ = true;
  runs_.push_back(std::move(run));
}

void Interpreter::run(std::string_view content, const Dict& resources, const Matrix& ctm, int depth) {
  gs_.ctm = ctm;
  const Dict* font_res = nullptr;
  const Dict* xobj_res = nullptr;
  if (const auto* f = resources.find("Font")) font_res = doc_.resolve_dict(*f);
  if (const auto* x = resources.find("XObject")) xobj_res = doc_.resolve_dict(*x);

  for (const auto& op : parse_content(content)) {
    const auto& a = op.operands;
    const std::string& o = op.op;
    if (o == "q") {
      stack_.push_back(gs_);
    } else if (o == "Q") {
      if (!stack_.empty()) {
        gs_ = stack_.back();
        stack_.pop_back();
      }
    } else if (o == "cm") {
      if (const auto m = matrix_from(a)) gs_.ctm = multiply(*m, gs_.ctm);
    } else if (o == "g" && a.size() == 1) {
      const double v = a[0].number().value_or(0.0);
      gs_.fill = Rgb{v, v, v};
    } else if (o == "rg" && a.size() == 3) {
      gs_.fill = Rgb{a[0].number().value_or(0.0), a[1].number().value_or(0.0), a[2].number().value_or(0.0)};
    } else if (o == "k" && a.size() == 4) {
      const double c = a[0].number().value_or(0), m = a[1].number().value_or(0),
                   y = a[2].number().value_or(0), k = a[3].number().value_or(0);
      gs_.fill = Rgb{(1 - c) * (1 - k), (1 - m) * (1 - k), (1 - y) * (1 - k)};
    } else if (o == "sc" || o == "scn") {
      std::vector<double> v;
      for (const auto& x : a)
        if (const auto n = x.number()) v.push_back(*n);
      if (v.size() == 1) gs_.fill = Rgb{v[0], v[0], v[0]};
      if (v.size() == 3) gs_.fill = Rgb{v[0], v[1], v[2]};
      if (v.size() == 4)
        gs_.fill = Rgb{(1 - v[0]) * (1 - v[3]), (1 - v[1]) * (1 - v[3]), (1 - v[2]) * (1 - v[3])};
    } else if (o == "BT") {
      tm_ = tlm_ = kIdentity;
      if (any_block_) ++block_;
      any_block_ = true;
      request(Pending::Newline);
    } else if (o == "Tf" && a.size() == 2) {
      gs_.font_dict = nullptr;
      if (const auto* n = a[0].name()) {
        gs_.font = *n;
        if (font_res)
          if (const auto* f = font_res->find(*n)) gs_.font_dict = doc_.resolve_dict(*f);
      }
      gs_.font_size = a[1].number().value_or(0.0);
    } else if (o == "Tr" && a.size() == 1) {
      gs_.render_mode = static_cast<int>(a[0].integer().value_or(0));
    } else if (o == "TL" && a.size() == 1) {
      gs_.leading = a[0].number().value_or(0.0);
    } else if (o == "Td" && a.size() == 2) {
      move_line(a[0].number().value_or(0.0), a[1].number().value_or(0.0));
    } else if (o == "TD" && a.size() == 2) {
      gs_.leading = -a[1].number().value_or(0.0);
      move_line(a[0].number().value_or(0.0), a[1].number().value_or(0.0));
    } else if (o == "Tm") {
      if (const auto m = matrix_from(a)) {
        const Matrix prev = tm_;
        tm_ = tlm_ = *m;
        if ((*m)[5] != prev[5])
          request(Pending::Newline);
        else if ((*m)[4] > prev[4])
          request(Pending::Space);
      }
    } else if (o == "T*") {
      move_line(0.0, -gs_.leading);
    } else if (o == "Tj" && a.size() == 1) {
      if (const auto* s = a[0].get_if<String>()) show(s->bytes);
    } else if (o == "'" && a.size() == 1) {
      move_line(0.0, -gs_.leading);
      if (const auto* s = a[0].get_if<String>()) show(s->bytes);
    } else if (o == "\"" && a.size() == 3) {
      move_line(0.0, -gs_.leading);
      if (const auto* s = a[2].get_if<String>()) show(s->bytes);
    } else if (o == "TJ" && a.size() == 1) {
      if (const auto* arr = a[0].get_if<Array>()) {
        for (const auto& item : *arr) {
          if (const auto* s = item.get_if<String>())
            show(s->bytes);
          else if (const auto n = item.number(); n && *n <= -250.0)
            request(Pending::Space);
        }
      }
    } else if (o == "Do" && a.size() == 1 && depth < kMaxFormDepth && xobj_res) {
      const auto* n = a[0].name();
      const Object* ref = n ? xobj_res->find(*n) : nullptr;
      const Stream* form = ref ? doc_.resolve_stream(*ref) : nullptr;
      if (!form) continue;
      const auto* subtype = form->dict.find("Subtype");
      if (!subtype || !subtype->name() || *subtype->name() != "Form") continue;
      Matrix m = kIdentity;
      if (const auto* mo = form->dict.find("Matrix"))
        if (const auto* arr = doc_.resolve(*mo).get_if<Array>())
          if (const auto mm = matrix_from(*arr)) m = *mm;
      const Dict* form_res = &resources;
      if (const auto* r = form->dict.find("Resources"))
        if (const Dict* d = doc_.resolve_dict(*r)) form_res = d;
      std::string data;
      try {
        data = decode_stream(*form);
      } catch (const Error&) {
        continue;
      }
      const GState saved = gs_;
      const auto saved_stack = stack_.size();
      run(data, *form_res, multiply(m, gs_.ctm), depth + 1);
      stack_.resize(std::min(stack_.size(), saved_stack));
      gs_ = saved;
    }
  }
}

std::string FontCache::type3_glyph_text(const Dict& font, const Stream& proc) {
  std::string data;
  try {
    data = decode_stream(proc);
  } catch (const Error&) {
    return {};
  }
  const Dict* res = nullptr;
  if (const auto* r = font.find("Resources")) res = doc_.resolve_dict(*r);
  const Dict* fonts = nullptr;
  if (res)
    if (const auto* f = res->find("Font")) fonts = doc_.resolve_dict(*f);
  std::string out;
  const Dict* current = nullptr;
  for (const auto& op : parse_content(data)) {
    if (op.op == "Tf" && op.operands.size() == 2) {
      current = nullptr;
      if (const auto* n = op.operands[0].name(); n && fonts)
        if (const auto* f = fonts->find(*n)) current = doc_.resolve_dict(*f);
    } else if ((op.op == "Tj" || op.op == "TJ") && current && current != &font) {
      std::array<std::string, 256> enc;
      apply_encoding(doc_, current->find("Encoding"), enc);
      auto add = [&](const std::string& bytes) {
        for (const unsigned char c : bytes) out += enc[c].empty() ? std::string(kReplacement) : enc[c];
      };
      if (const auto* s = op.operands.empty() ? nullptr : op.operands[0].get_if<String>()) add(s->bytes);
      if (const auto* arr = op.operands.empty() ? nullptr : op.operands[0].get_if<Array>())
        for (const auto& item : *arr)
          if (const auto* s = item.get_if<String>()) add(s->bytes);
    }
  }
  return out;
}

const FontInfo& FontCache::get(const Dict& font) {
  auto& slot = cache_[&font];
  if (slot) return *slot;
  slot = std::make_unique<FontInfo>();
  FontInfo& info = *slot;
  const auto* subtype_obj = font.find("Subtype");
  const std::string subtype = subtype_obj && subtype_obj->name() ? *subtype_obj->name() : "";

  if (const auto* tu = font.find("ToUnicode")) {
    if (const Stream* s = doc_.resolve_stream(*tu)) {
      try {
        auto cmap = parse_tounicode_cmap(decode_stream(*s));
        info.to_unicode = std::move(cmap.to_unicode);
        if (subtype == "Type0" && cmap.code_bytes > 0) info.code_bytes = cmap.code_bytes;
      } catch (const Error&) {
      }
    }
  }

  if (subtype == "Type0") {
    info.kind = FontKind::Composite;
    if (info.code_bytes == 1) info.code_bytes = 2;
    return info;
  }

  apply_encoding(doc_, font.find("Encoding"), info.encoding);

  if (subtype == "Type3") {
    if (const auto* fm = font.find("FontMatrix"))
      if (const auto* arr = doc_.resolve(*fm).get_if<Array>(); arr && arr->size() == 6) {
        const double a = (*arr)[0].number().value_or(0.001), b = (*arr)[1].number().value_or(0),
                     c = (*arr)[2].number().value_or(0), d = (*arr)[3].number().value_or(0.001);
        info.matrix_scale = std::sqrt(std::abs(a * d - b * c)) / 0.001;
      }
    const Dict* procs = nullptr;
    if (const auto* cp = font.find("CharProcs")) procs = doc_.resolve_dict(*cp);
    std::array<std::string, 256> glyph_names;
    if (const auto* enc = font.find("Encoding"))
      if (const Dict* ed = doc_.resolve_dict(*enc))
        if (const auto* diffs = ed->find("Differences"))
          if (const auto* arr = doc_.resolve(*diffs).get_if<Array>()) {
            std::int64_t code = 0;
            for (const auto& item : *arr) {
              if (const auto n = item.integer()) {
                code = *n;
              } else if (const auto* name = item.name()) {
                if (code >= 0 && code < 256) glyph_names[static_cast<std::size_t>(code)] = *name;
                ++code;
              }
            }
          }
    bool any_letter = false;
    for (unsigned code = 0; code < 256; ++code) {
      if (glyph_names[code].empty() || !procs) continue;
      const auto* p = procs->find(glyph_names[code]);
      const Stream* proc = p ? doc_.resolve_stream(*p) : nullptr;
      if (!proc) continue;
      std::string shown = type3_glyph_text(font, *proc);
      if (shown.empty()) {
        info.type3_displayed[code] = std::string(kReplacement);
      } else {
        any_letter = true;
        info.type3_displayed[code] = std::move(shown);
      }
    }
    info.kind = any_letter ? FontKind::Type3Remap : FontKind::Type3Symbol;
    return info;
  }

  if (const auto* fd_obj = font.find("FontDescriptor")) {
    if (const Dict* fd = doc_.resolve_dict(*fd_obj)) {
      const auto flags = fd->find("Flags") ? doc_.resolve(*fd->find("Flags")).integer().value_or(0) : 0;
      const bool embedded = fd->contains("FontFile") || fd->contains("FontFile2") || fd->contains("FontFile3");
      if ((flags & 4) && embedded) info.kind = FontKind::EmbeddedSymbolic;
    }
  }
  return info;
}

std::vector<TextRun> runs_for_page(const Document& doc, const Page& page, FontCache& fonts) {
  Interpreter interp(doc, fonts);
  interp.run(doc.page_content(page), page.resources, kIdentity, 0);
  return interp.take();
}

template <typename F>
std::string join_runs(const std::vector<TextRun>& runs, F&& part) {
  std::string out;
  for (const auto& r : runs) {
    out += r.separator;
    out += part(r);
  }
  return out;
}

}  // namespace

std::string TextRun::text() const {
  std::string out;
  for (const auto& g : glyphs) out += g.text;
  return out;
}

std::string TextRun::displayed() const {
  std::string out;
  for (const auto& g : glyphs) out += g.displayed;
  return out;
}

std::vector<TextRun> text_runs(const Document& doc, std::size_t page) {
  const auto& pages = doc.pages();
  if (page >= pages.size())
    fail(ErrorCode::PageOutOfRange, "page " + std::to_string(page) + " out of range");
  FontCache fonts(doc);
  return runs_for_page(doc, pages[page], fonts);
}

std::vector<std::string> extract_text(const Document& doc) {
  FontCache fonts(doc);
  std::vector<std::string> out;
  for (const auto& page : doc.pages())
    out.push_back(join_runs(runs_for_page(doc, page, fonts), [](const TextRun& r) { return r.text(); }));
  return out;
}

std::vector<std::string> displayed_text(const Document& doc) {
  FontCache fonts(doc);
  std::vector<std::string> out;
  for (const auto& page : doc.pages())
    out.push_back(
        join_runs(runs_for_page(doc, page, fonts), [](const TextRun& r) { return r.displayed(); }));
  return out;
}

}  // namespace revmark
