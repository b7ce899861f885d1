#include "pdf/fonts.hpp"
#include "revmark/error.hpp"
#include "revmark/inject.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <set>

namespace revmark {

using namespace pdf;

namespace {

struct Block {
  std::size_t page = 0;
  std::vector<const TextRun*> runs;
  std::string text;
};

std::size_t count_occurrences(std::string_view hay, std::string_view needle) {
  std::size_t n = 0;
  for (std::size_t p = hay.find(needle); p != std::string_view::npos; p = hay.find(needle, p + needle.size())) ++n;
  return n;
}

bool is_white(const Rgb& c) {
  constexpr double eps = 1e-3;
  return c.r >= 1 - eps && c.g >= 1 - eps && c.b >= 1 - eps;
}

Stealth classify(const Block& b) {
  bool all_white = true, remap = false, symbol = false;
  double max_size = 0.0;
  for (const auto* r : b.runs) {
    all_white = all_white && is_white(r->fill);
    remap = remap || r->font_kind == FontKind::Type3Remap;
    symbol = symbol || r->font_kind == FontKind::Type3Symbol || r->font_kind == FontKind::EmbeddedSymbolic;
    max_size = std::max(max_size, r->size);
  }
  if (all_white) return Stealth::WhiteOnWhite;
  if (remap) return Stealth::Remapped;
  if (symbol) return Stealth::SymbolGlyphs;
  if (max_size <= 4.0) return Stealth::SmallFont;
  return Stealth::None;
}

std::vector<GlyphAudit> audit_block(const Block& b) {
  std::vector<GlyphAudit> out;
  std::set<std::pair<std::string, unsigned>> seen;
  for (const auto* r : b.runs) {
    if (r->font_kind != FontKind::Type3Remap && r->font_kind != FontKind::Type3Symbol) continue;
    for (const auto& g : r->glyphs)
      if (seen.emplace(r->font, g.code).second) out.push_back(GlyphAudit{r->font, g.code, g.text, g.displayed});
  }
  return out;
}

bool contiguous_subsequence(const std::vector<Ref>& inner, const std::vector<Ref>& outer) {
  if (inner.empty()) return true;
  return std::search(outer.begin(), outer.end(), inner.begin(), inner.end()) != outer.end();
}

bool preexisting_unchanged(const Document& doc, std::vector<std::string>& notes) {
  const auto& sections = doc.sections();
  if (sections.size() < 2) return true;
  std::optional<Document> prev;
  try {
    prev = Document::parse_revision(doc.bytes(), sections[1].offset);
  } catch (const Error& e) {
    notes.push_back(std::string("previous revision unreadable: ") + e.what());
    return false;
  }
  std::map<std::uint32_t, const Page*> old_pages, new_pages;
  for (const auto& p : prev->pages()) old_pages[p.ref.num] = &p;
  for (const auto& p : doc.pages()) new_pages[p.ref.num] = &p;

  bool ok = true;
  for (const auto& [num, entry] : sections.front().entries) {
    if (!prev->has_object(num)) continue;
    if (entry.kind == XrefEntry::Kind::Free) {
      notes.push_back(fmt::format("object {} freed by the last update", num));
      ok = false;
      continue;
    }
    const auto op = old_pages.find(num);
    const auto np = new_pages.find(num);
    if (op == old_pages.end() || np == new_pages.end()) {
      notes.push_back(fmt::format("object {} redefined by the last update", num));
      ok = false;
      continue;
    }
    if (!contiguous_subsequence(prev->content_refs(*op->second), doc.content_refs(*np->second))) {
      notes.push_back(fmt::format("page object {} lost original content streams", num));
      ok = false;
    }
    const auto fonts_of = [](const Document& d, const Page& p) {
      std::set<std::string> names;
      if (const auto* f = p.resources.find("Font"))
        if (const Dict* fd = d.resolve_dict(*f))
          for (const auto& [k, v] : *fd) names.insert(k);
      return names;
    };
    const auto old_fonts = fonts_of(*prev, *op->second);
    const auto new_fonts = fonts_of(doc, *np->second);
    if (!std::includes(new_fonts.begin(), new_fonts.end(), old_fonts.begin(), old_fonts.end())) {
      notes.push_back(fmt::format("page object {} dropped font resources", num));
      ok = false;
    }
  }
  return ok;
}

}  // namespace

std::string_view stealth_name(Stealth s) noexcept {
  switch (s) {
    case Stealth::None: return "none";
    case Stealth::WhiteOnWhite: return "white-on-white";
    case Stealth::SymbolGlyphs: return "symbol-glyphs";
    case Stealth::Remapped: return "remapped";
    case Stealth::SmallFont: return "small-font";
  }
  return "none";
}

Stealth expected_stealth(InjectionMethod m) noexcept {
  switch (m) {
    case InjectionMethod::WhiteText: return Stealth::WhiteOnWhite;
    case InjectionMethod::SymbolFont: return Stealth::SymbolGlyphs;
    case InjectionMethod::RemappedFont: return Stealth::Remapped;
    case InjectionMethod::TranslatedText: return Stealth::SmallFont;
  }
  return Stealth::None;
}

VerificationReport verify_injection(const Document& doc, const InjectionSpec& spec) {
  VerificationReport rep;
  std::vector<std::vector<TextRun>> page_runs;
  try {
    for (std::size_t p = 0; p < doc.page_count(); ++p) page_runs.push_back(text_runs(doc, p));
    rep.preexisting_unchanged = preexisting_unchanged(doc, rep.notes);
  } catch (const Error& e) {
    rep.notes.push_back(std::string("unreadable document: ") + e.what());
    return rep;
  }

  std::vector<Block> blocks;
  for (std::size_t p = 0; p < page_runs.size(); ++p) {
    std::string page_text;
    for (const auto& r : page_runs[p]) {
      page_text += r.separator;
      page_text += r.text();
      if (blocks.empty() || blocks.back().page != p || blocks.back().runs.front()->block != r.block) {
        blocks.push_back(Block{p, {}, {}});
      } else {
        blocks.back().text += r.separator;
      }
      blocks.back().runs.push_back(&r);
      blocks.back().text += r.text();
    }
    if (spec.payload.empty()) continue;
    const std::size_t n = count_occurrences(page_text, spec.payload);
    if (n > 0 && !rep.page) rep.page = p;
    rep.occurrences += n;
  }
  if (spec.payload.empty()) {
    rep.notes.push_back("empty payload");
    return rep;
  }
  rep.payload_extractable = rep.occurrences > 0;

  const Block* hit = nullptr;
  for (const auto& b : blocks)
    if (b.text.find(spec.payload) != std::string::npos) {
      hit = &b;
      break;
    }
  if (hit) {
    rep.visual_stealth = classify(*hit);
    rep.audit = audit_block(*hit);
    return rep;
  }
  if (rep.payload_extractable) rep.notes.push_back("payload spans several text blocks");

  const auto want = utf8_to_codepoints(spec.payload);
  const Block* best = nullptr;
  std::size_t best_mismatch = want.size() + 1;
  for (const auto& b : blocks) {
    const auto got = utf8_to_codepoints(b.text);
    if (got.size() != want.size()) continue;
    std::size_t mismatch = 0;
    for (std::size_t i = 0; i < want.size(); ++i) mismatch += got[i] != want[i];
    if (mismatch < best_mismatch) {
      best_mismatch = mismatch;
      best = &b;
    }
  }
  if (!best) return rep;
  rep.page = best->page;
  rep.visual_stealth = classify(*best);
  rep.audit = audit_block(*best);
  const auto got = utf8_to_codepoints(best->text);
  for (std::size_t i = 0; i < want.size(); ++i)
    if (got[i] != want[i])
      rep.audit_diff.push_back(fmt::format("position {}: expected '{}' extracted '{}'", i,
                                           codepoint_to_utf8(want[i]), codepoint_to_utf8(got[i])));
  return rep;
}

}  // namespace revmark
