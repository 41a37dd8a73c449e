#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace grv::unicode {

// Unicode general category P* (all punctuation classes).
bool IsPunctuation(char32_t cp);
bool IsWhitespace(char32_t cp);
// Simple one-to-one lowercase mapping; identity when none exists.
char32_t ToLower(char32_t cp);

// Decodes one code point starting at `pos`. Returns the number of bytes
// consumed, or 0 if the sequence is malformed (overlong, surrogate,
// truncated, out of range).
std::size_t DecodeUtf8(std::string_view text, std::size_t pos, char32_t* cp);

void AppendUtf8(char32_t cp, std::string* out);

}  // namespace grv::unicode
