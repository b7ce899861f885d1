#include "revmark/normalize.hpp"

#include <boost/locale.hpp>

#include <algorithm>
#include <cstdint>

namespace revmark {

namespace {

const std::locale& icu_locale() {
  static const std::locale loc = [] {
    boost::locale::generator gen;
    return gen("en_US.UTF-8");
  }();
  return loc;
}

// Decodes one UTF-8 sequence starting at s[i]; returns the code point and
// advances i. Malformed bytes are passed through as U+FFFD-free raw values.
char32_t decode_utf8(std::string_view s, std::size_t& i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  auto cont = [&](std::size_t k) -> int {
    if (i + k >= s.size()) return -1;
    const auto b = static_cast<unsigned char>(s[i + k]);
    return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
  };
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  if ((b0 & 0xE0) == 0xC0) {
    const int c1 = cont(1);
    if (c1 >= 0) {
      i += 2;
      return (char32_t(b0 & 0x1F) << 6) | char32_t(c1);
    }
  } else if ((b0 & 0xF0) == 0xE0) {
    const int c1 = cont(1), c2 = c1 >= 0 ? cont(2) : -1;
    if (c2 >= 0) {
      i += 3;
      return (char32_t(b0 & 0x0F) << 12) | (char32_t(c1) << 6) | char32_t(c2);
    }
  } else if ((b0 & 0xF8) == 0xF0) {
    const int c1 = cont(1), c2 = c1 >= 0 ? cont(2) : -1, c3 = c2 >= 0 ? cont(3) : -1;
    if (c3 >= 0) {
      i += 4;
      return (char32_t(b0 & 0x07) << 18) | (char32_t(c1) << 12) | (char32_t(c2) << 6) |
             char32_t(c3);
    }
  }
  ++i;
  return 0xFFFD;
}

void append_utf8(std::string& out, char32_t cp) {
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
}

bool is_space(char32_t cp) {
  switch (cp) {
    case ' ': case '\t': case '\n': case '\r': case '\f': case '\v':
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

// Quote mapping and emphasis stripping; whitespace is unified to ' '.
std::string map_symbols(std::string_view text, bool& non_ascii) {
  std::string out;
  out.reserve(text.size());
  non_ascii = false;
  for (std::size_t i = 0; i < text.size();) {
    const char32_t cp = decode_utf8(text, i);
    switch (cp) {
      case '*': case '_':
        continue;
      case 0x201C: case 0x201D: case 0x201E: case 0x201F: case 0x00AB: case 0x00BB:
        out += '"';
        continue;
      case 0x2018: case 0x2019: case 0x201A: case 0x201B:
        out += '\'';
        continue;
      default:
        break;
    }
    if (is_space(cp)) {
      out += ' ';
      continue;
    }
    if (cp >= 0x80) non_ascii = true;
    append_utf8(out, cp);
  }
  return out;
}

std::string collapse_spaces(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending = false;
  for (std::size_t i = 0; i < text.size();) {
    const std::size_t start = i;
    const char32_t cp = decode_utf8(text, i);
    if (is_space(cp)) {
      pending = !out.empty();
      continue;
    }
    if (pending) out += ' ';
    pending = false;
    out.append(text.substr(start, i - start));
  }
  return out;
}

}  // namespace

std::string normalize(std::string_view text) {
  bool non_ascii = false;
  std::string s = map_symbols(text, non_ascii);
  if (non_ascii) {
    const auto& loc = icu_locale();
    s = boost::locale::normalize(s, boost::locale::norm_nfc, loc);
    s = boost::locale::fold_case(s, loc);
    s = boost::locale::normalize(s, boost::locale::norm_nfc, loc);
    // Folding can only introduce letters, but re-run the symbol pass so the
    // result is a fixed point even for exotic inputs.
    bool ignored = false;
    s = map_symbols(s, ignored);
  } else {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) {
      return static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c);
    });
  }
  return collapse_spaces(s);
}

std::vector<std::string> normalize_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find_first_of("\r\n", start);
    if (end == std::string_view::npos) end = text.size();
    std::string line = normalize(text.substr(start, end - start));
    if (!line.empty()) lines.push_back(std::move(line));
    start = end + 1;
  }
  return lines;
}

std::vector<std::string> word_tokens(std::string_view text) {
  const std::string norm = normalize(text);
  std::vector<std::string> tokens;
  std::string current;
  for (const char c : norm) {
    if (is_word_byte(static_cast<unsigned char>(c))) {
      current += c;
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

}  // namespace revmark
