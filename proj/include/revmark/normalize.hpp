#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace revmark {

// Matching normal form: NFC, case-folded, curly quotes mapped to straight
// ones, markdown emphasis markers (* and _) removed, whitespace runs collapsed
// to one space, trimmed. Idempotent.
std::string normalize(std::string_view text);

// Same rules, but newlines survive (each line normalized separately, blank
// lines dropped). Used where line structure matters, e.g. review headers.
std::vector<std::string> normalize_lines(std::string_view text);

// Lowercase word tokens of the normalized text (split on non-alphanumerics).
std::vector<std::string> word_tokens(std::string_view text);

// True for bytes that belong to a word for boundary purposes (ASCII
// alphanumerics and any byte of a multi-byte UTF-8 sequence).
constexpr bool is_word_byte(unsigned char c) noexcept {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

}  // namespace revmark
