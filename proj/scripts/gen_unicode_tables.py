#!/usr/bin/env python3
"""Regenerates src/unicode_tables.cc from the Python unicodedata database."""
import sys
import unicodedata

def ranges(pred):
    out, start = [], None
    for cp in range(0x110000):
        ok = pred(cp)
        if ok and start is None:
            start = cp
        elif not ok and start is not None:
            out.append((start, cp - 1))
            start = None
    if start is not None:
        out.append((start, 0x10FFFF))
    return out

def is_punct(cp):
    return unicodedata.category(chr(cp)).startswith("P")

def is_space(cp):
    c = chr(cp)
    return c.isspace() or unicodedata.category(c) == "Zs"

lower = []
for cp in range(0x110000):
    c = chr(cp)
    lo = c.lower()
    if len(lo) == 1 and lo != c:
        lower.append((cp, ord(lo)))

def emit_ranges(name, rs):
    print(f"const CodepointRange {name}[] = {{")
    for a, b in rs:
        print(f"    {{0x{a:04X}, 0x{b:04X}}},")
    print("};")

print("// Generated by scripts/gen_unicode_tables.py (unicodedata "
      f"{unicodedata.unidata_version}). Do not edit.")
print()
print('#include "grv/unicode.h"')
print()
print("namespace grv::unicode {")
print("namespace {")
print()
print("struct CodepointRange {")
print("  char32_t lo;")
print("  char32_t hi;")
print("};")
print()
print("struct CaseMapping {")
print("  char32_t from;")
print("  char32_t to;")
print("};")
print()
emit_ranges("kPunctuation", ranges(is_punct))
print()
emit_ranges("kWhitespace", ranges(is_space))
print()
print("const CaseMapping kLowercase[] = {")
for a, b in lower:
    print(f"    {{0x{a:04X}, 0x{b:04X}}},")
print("};")
print()
print("""template <std::size_t N>
bool InRanges(const CodepointRange (&table)[N], char32_t cp) {
  std::size_t lo = 0;
  std::size_t hi = N;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (cp < table[mid].lo) {
      hi = mid;
    } else if (cp > table[mid].hi) {
      lo = mid + 1;
    } else {
      return true;
    }
  }
  return false;
}

}  // namespace

bool IsPunctuation(char32_t cp) { return InRanges(kPunctuation, cp); }

bool IsWhitespace(char32_t cp) { return InRanges(kWhitespace, cp); }

char32_t ToLower(char32_t cp) {
  std::size_t lo = 0;
  std::size_t hi = sizeof(kLowercase) / sizeof(kLowercase[0]);
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (cp < kLowercase[mid].from) {
      hi = mid;
    } else if (cp > kLowercase[mid].from) {
      lo = mid + 1;
    } else {
      return kLowercase[mid].to;
    }
  }
  return cp;
}

}  // namespace grv::unicode""")
