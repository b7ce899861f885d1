#include "revmark/error.hpp"
#include "revmark/pdf.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <iterator>
#include <set>

namespace revmark::pdf {

namespace {

const Object& null_object() {
  static const Object n;
  return n;
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

std::size_t skip_eol(std::string_view data, std::size_t p) {
  if (p < data.size() && data[p] == '\r') ++p;
  if (p < data.size() && data[p] == '\n') ++p;
  return p;
}

std::uint64_t read_be(std::string_view data, std::size_t pos, int width) {
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i)
    v = (v << 8) | static_cast<unsigned char>(pos + i < data.size() ? data[pos + i] : 0);
  return v;
}

std::int64_t int_or(const Dict& d, std::string_view key, std::int64_t def) {
  const Object* o = d.find(key);
  const auto v = o ? o->integer() : std::nullopt;
  return v ? *v : def;
}

}  // namespace

Document Document::parse(std::string bytes) {
  Document doc;
  doc.bytes_ = std::move(bytes);
  const std::string_view data = doc.bytes_;
  if (data.substr(0, 1024).find("%PDF-") == std::string_view::npos)
    fail(ErrorCode::MalformedPdf, "missing %PDF header");
  const std::size_t sx = data.rfind("startxref");
  bool loaded = false;
  if (sx != std::string_view::npos) {
    Lexer lx(data, sx + 9);
    try {
      const auto off = lx.parse_object();
      const auto v = off ? off->integer() : std::nullopt;
      if (v && *v >= 0 && static_cast<std::size_t>(*v) < data.size()) {
        doc.load_from(static_cast<std::size_t>(*v));
        loaded = doc.trailer_.contains("Root");
      }
    } catch (const Error&) {
      loaded = false;
    }
  }
  if (!loaded) doc.reconstruct();
  if (doc.trailer_.contains("Encrypt"))
    fail(ErrorCode::MalformedPdf, "encrypted documents are not supported");
  return doc;
}

Document Document::parse_revision(std::string bytes, std::size_t xref_offset) {
  Document doc;
  doc.bytes_ = std::move(bytes);
  doc.load_from(xref_offset);
  return doc;
}

void Document::load_from(std::size_t xref_offset) {
  sections_.clear();
  xref_.clear();
  trailer_ = Dict{};
  startxref_ = xref_offset;
  read_xref_chain(xref_offset);
  for (const auto& s : sections_) {
    for (const auto& [num, e] : s.entries) xref_.emplace(num, e);
    for (const auto& [k, v] : s.trailer)
      if (!trailer_.contains(k) && k != "Prev" && k != "XRefStm") trailer_.set(k, v);
  }
  next_num_ = max_object_number() + 1;
}

void Document::read_xref_chain(std::size_t first_offset) {
  std::set<std::size_t> visited;
  std::optional<std::size_t> offset = first_offset;
  while (offset && visited.insert(*offset).second) {
    const std::size_t count = sections_.size();
    read_xref_at(*offset);
    if (sections_.size() == count) break;
    const Dict& t = sections_.back().trailer;
    const auto prev = int_or(t, "Prev", -1);
    offset = prev >= 0 && static_cast<std::size_t>(prev) < bytes_.size()
                 ? std::optional<std::size_t>(static_cast<std::size_t>(prev))
                 : std::nullopt;
  }
}

std::size_t Document::read_xref_at(std::size_t offset) {
  const std::string_view data = bytes_;
  Lexer lx(data, offset);
  XrefSection sec;
  sec.offset = offset;
  if (lx.peek_keyword() == "xref") {
    lx.read_keyword();
    for (;;) {
      if (lx.peek_keyword() == "trailer") {
        lx.read_keyword();
        break;
      }
      const auto start = lx.parse_object();
      const auto count = lx.parse_object();
      const std::int64_t first_num = start ? start->integer().value_or(-1) : -1;
      const std::int64_t entry_count = count ? count->integer().value_or(-1) : -1;
      if (first_num < 0 || entry_count < 0) fail(ErrorCode::MalformedPdf, "bad xref subsection");
      for (std::int64_t i = 0; i < entry_count; ++i) {
        const auto off = lx.parse_object();
        const auto gen = lx.parse_object();
        const std::string kind = lx.read_keyword();
        if (!off || !gen || (kind != "n" && kind != "f"))
          fail(ErrorCode::MalformedPdf, "bad xref entry");
        XrefEntry e;
        e.kind = kind == "n" ? XrefEntry::Kind::Offset : XrefEntry::Kind::Free;
        e.offset = static_cast<std::uint64_t>(off->integer().value_or(0));
        e.gen = static_cast<std::uint16_t>(gen->integer().value_or(0));
        const auto num = static_cast<std::uint32_t>(first_num + i);
        if (e.kind == XrefEntry::Kind::Offset && e.offset == 0) e.kind = XrefEntry::Kind::Free;
        sec.entries.emplace(num, e);
      }
    }
    auto t = lx.parse_object();
    if (!t || !t->is<Dict>()) fail(ErrorCode::MalformedPdf, "missing trailer dictionary");
    sec.trailer = std::move(*t->get_if<Dict>());
    // Hybrid file: companion xref stream.
    if (const auto stm = int_or(sec.trailer, "XRefStm", -1); stm >= 0) {
      const std::size_t before = sections_.size();
      read_xref_at(static_cast<std::size_t>(stm));
      if (sections_.size() > before) {
        for (const auto& [num, e] : sections_.back().entries) sec.entries.emplace(num, e);
        sections_.pop_back();
      }
    }
    sections_.push_back(std::move(sec));
    return 0;
  }

  const Object obj = parse_indirect_at(offset, 0);
  const Stream* s = obj.get_if<Stream>();
  if (!s) fail(ErrorCode::MalformedPdf, "xref offset does not point to an xref section");
  const Object* type = s->dict.find("Type");
  if (!type || !type->name() || *type->name() != "XRef")
    fail(ErrorCode::MalformedPdf, "xref stream lacks /Type /XRef");
  const std::string raw = decode_stream(*s);
  const Array* w = s->dict.find("W") ? s->dict.find("W")->get_if<Array>() : nullptr;
  if (!w || w->size() != 3) fail(ErrorCode::MalformedPdf, "xref stream lacks /W");
  int widths[3];
  for (int i = 0; i < 3; ++i) {
    const auto v = (*w)[static_cast<std::size_t>(i)].integer();
    if (!v || *v < 0 || *v > 8) fail(ErrorCode::MalformedPdf, "bad /W entry");
    widths[i] = static_cast<int>(*v);
  }
  const std::size_t row = static_cast<std::size_t>(widths[0] + widths[1] + widths[2]);
  if (row == 0) fail(ErrorCode::MalformedPdf, "empty xref stream row");
  std::vector<std::pair<std::int64_t, std::int64_t>> ranges;
  if (const Object* idx = s->dict.find("Index"); idx && idx->is<Array>()) {
    const Array& a = *idx->get_if<Array>();
    for (std::size_t i = 0; i + 1 < a.size(); i += 2)
      ranges.emplace_back(a[i].integer().value_or(0), a[i + 1].integer().value_or(0));
  } else {
    ranges.emplace_back(0, int_or(s->dict, "Size", 0));
  }
  std::size_t pos = 0;
  for (const auto& [start, count] : ranges) {
    for (std::int64_t i = 0; i < count && pos + row <= raw.size(); ++i, pos += row) {
      const std::uint64_t t = widths[0] ? read_be(raw, pos, widths[0]) : 1;
      const std::uint64_t f2 = read_be(raw, pos + widths[0], widths[1]);
      const std::uint64_t f3 = read_be(raw, pos + widths[0] + widths[1], widths[2]);
      XrefEntry e;
      if (t == 1) {
        e.kind = XrefEntry::Kind::Offset;
        e.offset = f2;
        e.gen = static_cast<std::uint16_t>(f3);
      } else if (t == 2) {
        e.kind = XrefEntry::Kind::Compressed;
        e.offset = f2;
        e.index = static_cast<std::uint32_t>(f3);
      }
      sec.entries.emplace(static_cast<std::uint32_t>(start + i), e);
    }
  }
  sec.is_stream = true;
  sec.trailer = s->dict;
  sections_.push_back(std::move(sec));
  return 0;
}

const std::map<std::uint32_t, std::size_t>& Document::scanned_offsets() const {
  if (scanned_) return *scanned_;
  scanned_.emplace();
  const std::string_view data = bytes_;
  std::size_t p = 0;
  while ((p = data.find("obj", p)) != std::string_view::npos) {
    const std::size_t kw = p;
    p += 3;
    if (p < data.size() && !is_pdf_whitespace(static_cast<unsigned char>(data[p])) &&
        !is_pdf_delimiter(static_cast<unsigned char>(data[p])))
      continue;
    std::size_t q = kw;
    while (q > 0 && is_pdf_whitespace(static_cast<unsigned char>(data[q - 1]))) --q;
    std::size_t g = q;
    while (g > 0 && is_digit(data[g - 1])) --g;
    if (g == q || g == 0) continue;
    std::size_t r = g;
    while (r > 0 && is_pdf_whitespace(static_cast<unsigned char>(data[r - 1]))) --r;
    std::size_t n = r;
    while (n > 0 && is_digit(data[n - 1])) --n;
    if (n == r || r == g) continue;
    std::uint32_t num = 0;
    for (std::size_t k = n; k < r; ++k) num = num * 10 + static_cast<std::uint32_t>(data[k] - '0');
    (*scanned_)[num] = n;
  }
  return *scanned_;
}

void Document::reconstruct() {
  reconstructed_ = true;
  sections_.clear();
  xref_.clear();
  trailer_ = Dict{};
  for (const auto& [num, off] : scanned_offsets()) {
    XrefEntry e;
    e.kind = XrefEntry::Kind::Offset;
    e.offset = off;
    xref_[num] = e;
  }
  for (const auto& [num, off] : scanned_offsets()) {
    Object o;
    try {
      o = parse_indirect_at(off, num);
    } catch (const Error&) {
      continue;
    }
    const Stream* s = o.get_if<Stream>();
    if (!s) continue;
    const Object* type = s->dict.find("Type");
    if (!type || !type->name()) continue;
    if (*type->name() == "ObjStm") {
      std::string raw;
      try {
        raw = decode_stream(*s);
      } catch (const Error&) {
        continue;
      }
      Lexer lx(raw);
      const auto n = int_or(s->dict, "N", 0);
      for (std::int64_t i = 0; i < n; ++i) {
        const auto a = lx.parse_object();
        const auto b = lx.parse_object();
        if (!a || !b) break;
        const auto inner = static_cast<std::uint32_t>(a->integer().value_or(0));
        if (xref_.count(inner)) continue;
        XrefEntry e;
        e.kind = XrefEntry::Kind::Compressed;
        e.offset = num;
        e.index = static_cast<std::uint32_t>(i);
        xref_[inner] = e;
      }
    } else if (*type->name() == "XRef") {
      for (const auto& [k, v] : s->dict)
        if (k == "Root" || k == "Info" || k == "ID") trailer_.set(k, v);
    }
  }
  const std::string_view data = bytes_;
  std::size_t p = 0;
  while ((p = data.find("trailer", p)) != std::string_view::npos) {
    Lexer lx(data, p + 7);
    p += 7;
    try {
      auto t = lx.parse_object();
      if (t && t->is<Dict>())
        for (const auto& [k, v] : *t->get_if<Dict>())
          if (k != "Prev" && k != "XRefStm" && k != "Size") trailer_.set(k, v);
    } catch (const Error&) {
    }
  }
  if (!trailer_.contains("Root")) {
    for (const auto& [num, e] : xref_) {
      try {
        const Dict* d = get(Ref{num, 0}).get_if<Dict>();
        const Object* type = d ? d->find("Type") : nullptr;
        if (type && type->name() && *type->name() == "Catalog") {
          trailer_.set("Root", Ref{num, 0});
          break;
        }
      } catch (const Error&) {
      }
    }
  }
  if (!trailer_.contains("Root")) fail(ErrorCode::MalformedPdf, "no document catalog found");
  next_num_ = max_object_number() + 1;
}

Object Document::parse_indirect_at(std::size_t offset, std::uint32_t expect_num) const {
  const std::string_view data = bytes_;
  Lexer lx(data, offset);
  const auto num = lx.parse_object();
  const auto gen = lx.parse_object();
  if (!num || !gen || !num->integer() || !gen->integer() || lx.read_keyword() != "obj")
    fail(ErrorCode::MalformedPdf, fmt::format("no object header at offset {}", offset));
  if (expect_num && static_cast<std::uint32_t>(*num->integer()) != expect_num)
    fail(ErrorCode::MalformedPdf,
         fmt::format("expected object {} at offset {}, found {}", expect_num, offset,
                     *num->integer()));
  auto obj = lx.parse_object();
  if (!obj) {
    if (lx.peek_keyword() == "endobj") return Object{};
    fail(ErrorCode::MalformedPdf, fmt::format("bad object body at offset {}", offset));
  }
  const std::size_t after_obj = lx.pos();
  if (obj->is<Dict>() && lx.peek_keyword() == "stream") {
    lx.read_keyword();
    std::size_t start = skip_eol(data, lx.pos());
    Stream s;
    s.dict = std::move(*obj->get_if<Dict>());
    std::optional<std::size_t> len;
    if (const Object* l = s.dict.find("Length")) {
      const Object* lv = l;
      if (const Ref* r = l->get_if<Ref>()) {
        if (r->num != expect_num) {
          try {
            lv = &get(*r);
          } catch (const Error&) {
            lv = nullptr;
          }
        }
      }
      if (lv) {
        if (const auto v = lv->integer(); v && *v >= 0) len = static_cast<std::size_t>(*v);
      }
    }
    bool ok = false;
    if (len && start + *len <= data.size()) {
      Lexer check(data, start + *len);
      ok = check.peek_keyword().rfind("endstream", 0) == 0;
    }
    if (!ok) {
      const std::size_t end = data.find("endstream", start);
      if (end == std::string_view::npos) fail(ErrorCode::MalformedPdf, "unterminated stream");
      std::size_t e = end;
      if (e > start && data[e - 1] == '\n') --e;
      if (e > start && data[e - 1] == '\r') --e;
      len = e - start;
    }
    s.data = std::string(data.substr(start, *len));
    return Object(std::move(s));
  }
  (void)after_obj;
  return std::move(*obj);
}

Object Document::load_object(std::uint32_t num) const {
  const auto it = xref_.find(num);
  if (it == xref_.end() || it->second.kind == XrefEntry::Kind::Free) return Object{};
  const XrefEntry& e = it->second;
  if (e.kind == XrefEntry::Kind::Offset) {
    try {
      return parse_indirect_at(static_cast<std::size_t>(e.offset), num);
    } catch (const Error&) {
      const auto& scanned = scanned_offsets();
      const auto s = scanned.find(num);
      if (s == scanned.end() || s->second == e.offset) throw;
      return parse_indirect_at(s->second, num);
    }
  }
  const auto stm_num = static_cast<std::uint32_t>(e.offset);
  const Stream* stm = get(Ref{stm_num, 0}).get_if<Stream>();
  if (!stm) fail(ErrorCode::MalformedPdf, fmt::format("object stream {} missing", stm_num));
  const std::string raw = decode_stream(*stm);
  auto& index = objstm_index_[stm_num];
  if (index.empty()) {
    Lexer lx(raw);
    const auto n = int_or(stm->dict, "N", 0);
    for (std::int64_t i = 0; i < n; ++i) {
      const auto a = lx.parse_object();
      const auto b = lx.parse_object();
      if (!a || !b) break;
      index.emplace_back(static_cast<std::uint32_t>(a->integer().value_or(0)),
                         static_cast<std::size_t>(b->integer().value_or(0)));
    }
  }
  const auto first = static_cast<std::size_t>(int_or(stm->dict, "First", 0));
  for (const auto& [inner, off] : index) {
    if (inner != num) continue;
    Lexer lx(raw, first + off);
    auto obj = lx.parse_object();
    return obj ? std::move(*obj) : Object{};
  }
  fail(ErrorCode::MalformedPdf, fmt::format("object {} not in object stream {}", num, stm_num));
}

const Object& Document::get(Ref r) const {
  if (const auto p = pending_.find(r.num); p != pending_.end()) return p->second.second;
  if (const auto c = cache_.find(r.num); c != cache_.end()) return *c->second;
  auto obj = std::make_shared<const Object>(load_object(r.num));
  return *cache_.emplace(r.num, std::move(obj)).first->second;
}

const Object& Document::resolve(const Object& obj) const {
  const Object* cur = &obj;
  for (int depth = 0; depth < 32; ++depth) {
    const Ref* r = cur->get_if<Ref>();
    if (!r) return *cur;
    cur = &get(*r);
  }
  return null_object();
}

const Dict* Document::resolve_dict(const Object& obj) const {
  const Object& o = resolve(obj);
  if (const Dict* d = o.get_if<Dict>()) return d;
  if (const Stream* s = o.get_if<Stream>()) return &s->dict;
  return nullptr;
}

const Stream* Document::resolve_stream(const Object& obj) const {
  return resolve(obj).get_if<Stream>();
}

bool Document::has_object(std::uint32_t num) const {
  if (pending_.count(num)) return true;
  const auto it = xref_.find(num);
  return it != xref_.end() && it->second.kind != XrefEntry::Kind::Free;
}

std::uint32_t Document::max_object_number() const {
  std::uint32_t m = 0;
  if (!xref_.empty()) m = xref_.rbegin()->first;
  if (!pending_.empty()) m = std::max(m, pending_.rbegin()->first);
  const auto size = int_or(trailer_, "Size", 0);
  if (size > 0) m = std::max(m, static_cast<std::uint32_t>(size - 1));
  return m;
}

std::optional<std::pair<std::size_t, std::size_t>> Document::object_span(std::uint32_t num) const {
  const auto it = xref_.find(num);
  if (it == xref_.end() || it->second.kind != XrefEntry::Kind::Offset) return std::nullopt;
  const auto begin = static_cast<std::size_t>(it->second.offset);
  const std::size_t end = std::string_view(bytes_).find("endobj", begin);
  if (end == std::string_view::npos) return std::nullopt;
  return std::make_pair(begin, end + 6);
}

void Document::load_pages() const {
  pages_.emplace();
  const Dict* root = resolve_dict(trailer_.find("Root") ? *trailer_.find("Root") : null_object());
  if (!root) fail(ErrorCode::MalformedPdf, "document catalog missing");
  const Object* pages_obj = root->find("Pages");
  if (!pages_obj) fail(ErrorCode::MalformedPdf, "catalog has no page tree");

  std::set<std::uint32_t> visited;
  struct Inherited {
    const Object* resources = nullptr;
    const Object* media_box = nullptr;
  };
  auto walk = [&](auto&& self, const Object& node_obj, Inherited inh) -> void {
    Ref ref{};
    if (const Ref* r = node_obj.get_if<Ref>()) {
      if (!visited.insert(r->num).second) return;
      ref = *r;
    }
    const Dict* node = resolve_dict(node_obj);
    if (!node) return;
    if (const Object* r = node->find("Resources")) inh.resources = r;
    if (const Object* m = node->find("MediaBox")) inh.media_box = m;
    const Object* type = node->find("Type");
    const bool is_tree =
        (type && type->name() && *type->name() == "Pages") || (!type && node->contains("Kids"));
    if (is_tree) {
      if (const Object* kids = node->find("Kids"))
        if (const Array* a = resolve(*kids).get_if<Array>())
          for (const auto& kid : *a) self(self, kid, inh);
      return;
    }
    Page page;
    page.ref = ref;
    page.dict = *node;
    if (inh.resources)
      if (const Dict* rd = resolve_dict(*inh.resources)) page.resources = *rd;
    if (inh.media_box) {
      if (const Array* mb = resolve(*inh.media_box).get_if<Array>()) {
        std::vector<double> box;
        for (const auto& v : *mb) box.push_back(resolve(v).number().value_or(0.0));
        if (box.size() == 4) page.media_box = box;
      }
    }
    pages_->push_back(std::move(page));
  };
  walk(walk, *pages_obj, Inherited{});
}

const std::vector<Page>& Document::pages() const {
  if (!pages_) load_pages();
  return *pages_;
}

std::vector<Ref> Document::content_refs(const Page& page) const {
  std::vector<Ref> out;
  const Object* c = page.dict.find("Contents");
  if (!c) return out;
  if (const Ref* r = c->get_if<Ref>()) {
    const Object& target = get(*r);
    if (const Array* a = target.get_if<Array>()) {
      for (const auto& v : *a)
        if (const Ref* rr = v.get_if<Ref>()) out.push_back(*rr);
      return out;
    }
    out.push_back(*r);
    return out;
  }
  if (const Array* a = c->get_if<Array>())
    for (const auto& v : *a)
      if (const Ref* rr = v.get_if<Ref>()) out.push_back(*rr);
  return out;
}

std::string Document::page_content(const Page& page) const {
  std::string out;
  const Object* c = page.dict.find("Contents");
  if (!c) return out;
  auto add = [&](const Object& o) {
    if (const Stream* s = resolve_stream(o)) {
      if (!out.empty()) out += '\n';
      out += decode_stream(*s);
    }
  };
  const Object& target = resolve(*c);
  if (const Array* a = target.get_if<Array>()) {
    for (const auto& v : *a) add(v);
  } else {
    add(*c);
  }
  return out;
}

Ref Document::add_object(Object obj) {
  Ref r{next_num_++, 0};
  pending_[r.num] = {0, std::move(obj)};
  return r;
}

void Document::replace_object(Ref r, Object obj) {
  pending_[r.num] = {r.gen, std::move(obj)};
  if (r.num >= next_num_) next_num_ = r.num + 1;
  pages_.reset();
}

std::string Document::save_incremental() const {
  std::string out = bytes_;
  if (!out.empty() && out.back() != '\n') out += '\n';
  std::map<std::uint32_t, std::pair<std::uint16_t, std::size_t>> offsets;
  for (const auto& [num, entry] : pending_) {
    offsets[num] = {entry.first, out.size()};
    out += fmt::format("{} {} obj\n", num, entry.first);
    out += serialize(entry.second);
    out += "\nendobj\n";
  }
  if (reconstructed_) {
    for (const auto& [num, e] : xref_)
      if (e.kind == XrefEntry::Kind::Offset && !offsets.count(num))
        offsets[num] = {e.gen, static_cast<std::size_t>(e.offset)};
  }
  std::uint32_t size = std::max(max_object_number() + 1, offsets.empty() ? 1u : offsets.rbegin()->first + 1);

  Dict trailer;
  for (const char* key : {"Root", "Info", "ID"})
    if (const Object* v = trailer_.find(key)) trailer.set(key, *v);

  const bool xref_stream = uses_xref_stream() && !reconstructed_;
  if (xref_stream) {
    const std::uint32_t self = size;
    ++size;
    const std::size_t self_off = out.size();
    offsets[self] = {0, self_off};
    std::string rows;
    Array index;
    std::uint32_t run_start = 0, run_len = 0;
    auto flush = [&] {
      if (run_len) {
        index.emplace_back(static_cast<std::int64_t>(run_start));
        index.emplace_back(static_cast<std::int64_t>(run_len));
      }
    };
    for (const auto& [num, go] : offsets) {
      if (run_len && num == run_start + run_len) {
        ++run_len;
      } else {
        flush();
        run_start = num;
        run_len = 1;
      }
      rows += '\x01';
      for (int s = 24; s >= 0; s -= 8) rows += static_cast<char>((go.second >> s) & 0xFF);
      rows += static_cast<char>((go.first >> 8) & 0xFF);
      rows += static_cast<char>(go.first & 0xFF);
    }
    flush();
    Stream xs;
    xs.dict.set("Type", make_name("XRef"));
    xs.dict.set("Size", Object(static_cast<std::size_t>(size)));
    xs.dict.set("W", Array{Object(1), Object(4), Object(2)});
    xs.dict.set("Index", std::move(index));
    for (const auto& [k, v] : trailer) xs.dict.set(k, v);
    xs.dict.set("Prev", Object(startxref_));
    xs.data = std::move(rows);
    out += fmt::format("{} 0 obj\n", self);
    out += serialize(Object(std::move(xs)));
    out += "\nendobj\n";
    out += fmt::format("startxref\n{}\n%%EOF\n", self_off);
    return out;
  }

  const std::size_t xref_off = out.size();
  out += "xref\n";
  offsets.emplace(0, std::make_pair(std::uint16_t{65535}, std::size_t{0}));
  auto it = offsets.begin();
  while (it != offsets.end()) {
    auto run_end = it;
    std::uint32_t n = 0;
    while (run_end != offsets.end() && run_end->first == it->first + n) {
      ++run_end;
      ++n;
    }
    out += fmt::format("{} {}\n", it->first, n);
    for (auto k = it; k != run_end; ++k) {
      if (k->first == 0)
        out += "0000000000 65535 f\r\n";
      else
        out += fmt::format("{:010} {:05} n\r\n", k->second.second, k->second.first);
    }
    it = run_end;
  }
  trailer.set("Size", Object(static_cast<std::size_t>(size)));
  if (!reconstructed_) trailer.set("Prev", Object(startxref_));
  out += "trailer\n";
  out += serialize(Object(std::move(trailer)));
  out += fmt::format("\nstartxref\n{}\n%%EOF\n", xref_off);
  return out;
}

Document load_document(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, fmt::format("cannot read '{}'", path));
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return Document::parse(std::move(bytes));
}

void write_file(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, fmt::format("cannot write '{}'", path));
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::IoError, fmt::format("write failed for '{}'", path));
}

}  // namespace revmark::pdf
