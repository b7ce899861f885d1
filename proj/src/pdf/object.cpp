#include "revmark/error.hpp"
#include "revmark/pdf.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>

namespace revmark::pdf {

const Object* Dict::find(std::string_view key) const {
  for (const auto& [k, v] : items_)
    if (k == key) return &v;
  return nullptr;
}

Object* Dict::find(std::string_view key) {
  for (auto& [k, v] : items_)
    if (k == key) return &v;
  return nullptr;
}

void Dict::set(std::string key, Object value) {
  if (Object* existing = find(key)) {
    *existing = std::move(value);
    return;
  }
  items_.emplace_back(std::move(key), std::move(value));
}

bool Dict::erase(std::string_view key) {
  for (auto it = items_.begin(); it != items_.end(); ++it) {
    if (it->first == key) {
      items_.erase(it);
      return true;
    }
  }
  return false;
}

bool operator==(const Dict& a, const Dict& b) {
  if (a.size() != b.size()) return false;
  for (const auto& [k, v] : a.items_) {
    const Object* o = b.find(k);
    if (!o || !(*o == v)) return false;
  }
  return true;
}

std::optional<double> Object::number() const {
  if (const auto* i = get_if<std::int64_t>()) return static_cast<double>(*i);
  if (const auto* d = get_if<double>()) return *d;
  return std::nullopt;
}

std::optional<std::int64_t> Object::integer() const {
  if (const auto* i = get_if<std::int64_t>()) return *i;
  if (const auto* d = get_if<double>(); d && std::floor(*d) == *d) return static_cast<std::int64_t>(*d);
  return std::nullopt;
}

const std::string* Object::name() const {
  const auto* n = get_if<Name>();
  return n ? &n->value : nullptr;
}

bool is_pdf_whitespace(unsigned char c) noexcept {
  return c == 0 || c == 9 || c == 10 || c == 12 || c == 13 || c == 32;
}

bool is_pdf_delimiter(unsigned char c) noexcept {
  switch (c) {
    case '(': case ')': case '<': case '>': case '[': case ']':
    case '{': case '}': case '/': case '%':
      return true;
    default:
      return false;
  }
}

namespace {

std::string format_real(double v) {
  if (std::isnan(v) || std::isinf(v)) return "0";
  if (v == std::floor(v) && std::abs(v) < 1e15) return fmt::format("{}", static_cast<std::int64_t>(v));
  std::string s = fmt::format("{:.6f}", v);
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  if (s == "-0") s = "0";
  return s;
}

std::string serialize_string(const String& s) {
  if (s.hex) {
    std::string out = "<";
    for (const unsigned char c : s.bytes) out += fmt::format("{:02X}", c);
    return out + ">";
  }
  std::string out = "(";
  for (const unsigned char c : s.bytes) {
    switch (c) {
      case '(': out += "\\("; break;
      case ')': out += "\\)"; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default:
        if (c < 32 || c >= 127)
          out += fmt::format("\\{:03o}", c);
        else
          out += static_cast<char>(c);
    }
  }
  return out + ")";
}

void serialize_into(std::string& out, const Object& obj);

void serialize_dict(std::string& out, const Dict& d) {
  out += "<<";
  for (const auto& [k, v] : d) {
    out += serialize_name(k);
    out += ' ';
    serialize_into(out, v);
    out += ' ';
  }
  out += ">>";
}

void serialize_into(std::string& out, const Object& obj) {
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Null>) {
          out += "null";
        } else if constexpr (std::is_same_v<T, bool>) {
          out += v ? "true" : "false";
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          out += std::to_string(v);
        } else if constexpr (std::is_same_v<T, double>) {
          out += format_real(v);
        } else if constexpr (std::is_same_v<T, Name>) {
          out += serialize_name(v.value);
        } else if constexpr (std::is_same_v<T, String>) {
          out += serialize_string(v);
        } else if constexpr (std::is_same_v<T, Array>) {
          out += '[';
          for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) out += ' ';
            serialize_into(out, v[i]);
          }
          out += ']';
        } else if constexpr (std::is_same_v<T, Dict>) {
          serialize_dict(out, v);
        } else if constexpr (std::is_same_v<T, Stream>) {
          Dict d = v.dict;
          d.set("Length", Object(v.data.size()));
          serialize_dict(out, d);
          out += "\nstream\n";
          out += v.data;
          out += "\nendstream";
        } else if constexpr (std::is_same_v<T, Ref>) {
          out += fmt::format("{} {} R", v.num, v.gen);
        }
      },
      obj.value);
}

}  // namespace

std::string serialize_name(std::string_view name) {
  std::string out = "/";
  for (const unsigned char c : name) {
    if (c < 33 || c > 126 || c == '#' || is_pdf_delimiter(c))
      out += fmt::format("#{:02X}", c);
    else
      out += static_cast<char>(c);
  }
  return out;
}

std::string serialize(const Object& obj) {
  std::string out;
  serialize_into(out, obj);
  return out;
}

// ---------------------------------------------------------------------------

bool Lexer::at_end() {
  skip_ws();
  return pos_ >= data_.size();
}

void Lexer::skip_ws() {
  while (pos_ < data_.size()) {
    const auto c = static_cast<unsigned char>(data_[pos_]);
    if (is_pdf_whitespace(c)) {
      ++pos_;
    } else if (c == '%') {
      while (pos_ < data_.size() && data_[pos_] != '\n' && data_[pos_] != '\r') ++pos_;
    } else {
      break;
    }
  }
}

std::string Lexer::peek_keyword() {
  const std::size_t save = pos_;
  std::string k = read_keyword();
  pos_ = save;
  return k;
}

std::string Lexer::read_keyword() {
  skip_ws();
  const std::size_t start = pos_;
  while (pos_ < data_.size()) {
    const auto c = static_cast<unsigned char>(data_[pos_]);
    if (is_pdf_whitespace(c) || is_pdf_delimiter(c)) break;
    ++pos_;
  }
  if (pos_ == start && pos_ < data_.size()) {
    // Stray delimiters come back as one-character keywords.
    ++pos_;
  }
  return std::string(data_.substr(start, pos_ - start));
}

Object Lexer::parse_number() {
  const std::size_t start = pos_;
  bool real = false;
  if (pos_ < data_.size() && (data_[pos_] == '+' || data_[pos_] == '-')) ++pos_;
  while (pos_ < data_.size()) {
    const char c = data_[pos_];
    if (c == '.') {
      real = true;
    } else if (c < '0' || c > '9') {
      break;
    }
    ++pos_;
  }
  std::string text(data_.substr(start, pos_ - start));
  // Doubled signs ("--5").
  while (text.size() > 1 && (text[0] == '+' || text[0] == '-') &&
         (text[1] == '+' || text[1] == '-'))
    text.erase(0, 1);
  if (!text.empty() && text[0] == '+') text.erase(0, 1);
  if (text.empty() || text == "-" || text == "." || text == "-.") return std::int64_t{0};
  if (!real) {
    std::int64_t v = 0;
    const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec == std::errc{} && p == text.data() + text.size()) return v;
  }
  double d = 0;
  const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), d);
  if (ec != std::errc{}) return 0.0;
  return d;
}

std::string Lexer::parse_name() {
  ++pos_;  // '/'
  std::string out;
  while (pos_ < data_.size()) {
    const auto c = static_cast<unsigned char>(data_[pos_]);
    if (is_pdf_whitespace(c) || is_pdf_delimiter(c)) break;
    if (c == '#' && pos_ + 2 < data_.size()) {
      unsigned v = 0;
      const auto [p, ec] = std::from_chars(data_.data() + pos_ + 1, data_.data() + pos_ + 3, v, 16);
      if (ec == std::errc{} && p == data_.data() + pos_ + 3) {
        out += static_cast<char>(v);
        pos_ += 3;
        continue;
      }
    }
    out += static_cast<char>(c);
    ++pos_;
  }
  return out;
}

std::string Lexer::parse_literal_string() {
  ++pos_;  // '('
  std::string out;
  int depth = 1;
  while (pos_ < data_.size()) {
    const char c = data_[pos_++];
    if (c == '\\') {
      if (pos_ >= data_.size()) break;
      const char e = data_[pos_++];
      switch (e) {
        case 'n': out += '\n'; break;
        case 'r': out += '\r'; break;
        case 't': out += '\t'; break;
        case 'b': out += '\b'; break;
        case 'f': out += '\f'; break;
        case '\r':
          if (pos_ < data_.size() && data_[pos_] == '\n') ++pos_;
          break;
        case '\n': break;
        default:
          if (e >= '0' && e <= '7') {
            int v = e - '0';
            for (int k = 0; k < 2 && pos_ < data_.size() && data_[pos_] >= '0' && data_[pos_] <= '7'; ++k)
              v = v * 8 + (data_[pos_++] - '0');
            out += static_cast<char>(v & 0xFF);
          } else {
            out += e;
          }
      }
    } else if (c == '(') {
      ++depth;
      out += c;
    } else if (c == ')') {
      if (--depth == 0) return out;
      out += c;
    } else {
      out += c;
    }
  }
  fail(ErrorCode::MalformedPdf, "unterminated string literal");
}

std::string Lexer::parse_hex_string() {
  ++pos_;  // '<'
  std::string out;
  int high = -1;
  while (pos_ < data_.size()) {
    const char c = data_[pos_++];
    if (c == '>') {
      if (high >= 0) out += static_cast<char>(high << 4);
      return out;
    }
    int v;
    if (c >= '0' && c <= '9') v = c - '0';
    else if (c >= 'a' && c <= 'f') v = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F') v = c - 'A' + 10;
    else if (is_pdf_whitespace(static_cast<unsigned char>(c))) continue;
    else fail(ErrorCode::MalformedPdf, "bad character in hex string");
    if (high < 0) {
      high = v;
    } else {
      out += static_cast<char>((high << 4) | v);
      high = -1;
    }
  }
  fail(ErrorCode::MalformedPdf, "unterminated hex string");
}

std::optional<Object> Lexer::parse_object() {
  skip_ws();
  if (pos_ >= data_.size()) fail(ErrorCode::MalformedPdf, "unexpected end of data");
  const char c = data_[pos_];
  if (c == '/') return Object(Name{parse_name()});
  if (c == '(') return Object(String{parse_literal_string(), false});
  if (c == '<') {
    if (pos_ + 1 < data_.size() && data_[pos_ + 1] == '<') {
      pos_ += 2;
      Dict d;
      for (;;) {
        skip_ws();
        if (pos_ >= data_.size()) fail(ErrorCode::MalformedPdf, "unterminated dictionary");
        if (data_[pos_] == '>' && pos_ + 1 < data_.size() && data_[pos_ + 1] == '>') {
          pos_ += 2;
          break;
        }
        if (data_[pos_] != '/') {
          // Skip junk.
          auto junk = parse_object();
          if (!junk) read_keyword();
          continue;
        }
        std::string key = parse_name();
        auto value = parse_object();
        if (!value) {
          const std::string kw = peek_keyword();
          if (kw.rfind(">>", 0) == 0 || kw == ">") {
            d.set(std::move(key), Null{});
            continue;
          }
          read_keyword();
          value = Object(Null{});
        }
        d.set(std::move(key), std::move(*value));
      }
      return Object(std::move(d));
    }
    return Object(String{parse_hex_string(), true});
  }
  if (c == '[') {
    ++pos_;
    Array a;
    for (;;) {
      skip_ws();
      if (pos_ >= data_.size()) fail(ErrorCode::MalformedPdf, "unterminated array");
      if (data_[pos_] == ']') {
        ++pos_;
        break;
      }
      auto v = parse_object();
      if (!v) {
        read_keyword();
        continue;
      }
      a.push_back(std::move(*v));
    }
    return Object(std::move(a));
  }
  if ((c >= '0' && c <= '9') || c == '+' || c == '-' || c == '.') {
    Object first = parse_number();
    if (const auto* num = first.get_if<std::int64_t>(); num && *num >= 0) {
      // Look ahead for "gen R".
      const std::size_t save = pos_;
      skip_ws();
      if (pos_ < data_.size() && data_[pos_] >= '0' && data_[pos_] <= '9') {
        Object second = parse_number();
        const auto* gen = second.get_if<std::int64_t>();
        skip_ws();
        if (gen && pos_ < data_.size() && data_[pos_] == 'R' &&
            (pos_ + 1 == data_.size() ||
             is_pdf_whitespace(static_cast<unsigned char>(data_[pos_ + 1])) ||
             is_pdf_delimiter(static_cast<unsigned char>(data_[pos_ + 1])))) {
          ++pos_;
          return Object(Ref{static_cast<std::uint32_t>(*num), static_cast<std::uint16_t>(*gen)});
        }
      }
      pos_ = save;
    }
    return first;
  }
  const std::string kw = peek_keyword();
  if (kw == "true") {
    read_keyword();
    return Object(true);
  }
  if (kw == "false") {
    read_keyword();
    return Object(false);
  }
  if (kw == "null") {
    read_keyword();
    return Object(Null{});
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------

std::vector<Operation> parse_content(std::string_view content) {
  std::vector<Operation> ops;
  Lexer lx(content);
  Operation cur;
  while (!lx.at_end()) {
    std::optional<Object> obj;
    try {
      obj = lx.parse_object();
    } catch (const Error&) {
      break;
    }
    if (obj) {
      cur.operands.push_back(std::move(*obj));
      continue;
    }
    cur.op = lx.read_keyword();
    if (cur.op == "BI") {
      // Inline image: skip to the EI that follows ID data.
      const auto id = content.find("ID", lx.pos());
      std::size_t p = id == std::string_view::npos ? content.size() : id + 3;
      for (;;) {
        p = content.find("EI", p);
        if (p == std::string_view::npos) {
          p = content.size();
          break;
        }
        const bool before = p > 0 && is_pdf_whitespace(static_cast<unsigned char>(content[p - 1]));
        const bool after = p + 2 >= content.size() ||
                           is_pdf_whitespace(static_cast<unsigned char>(content[p + 2]));
        if (before && after) {
          p += 2;
          break;
        }
        p += 2;
      }
      lx.seek(p);
      cur = Operation{};
      continue;
    }
    ops.push_back(std::move(cur));
    cur = Operation{};
  }
  return ops;
}

}  // namespace revmark::pdf
