#include "grv/artifact.h"

#include <bit>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>

#include "grv/common.h"

namespace grv::artifact {

void WriteHeader(std::ostream& os, std::string_view magic,
                 const HeaderFields& fields) {
  os << magic << '\n';
  for (const auto& [key, value] : fields) {
    std::string flat = value;
    for (char& c : flat) {
      if (c == '\n') c = ' ';
    }
    os << key << ' ' << flat << '\n';
  }
  os << "end_header\n";
}

std::map<std::string, std::string> ReadHeader(std::istream& is,
                                              std::string_view magic) {
  std::string line;
  if (!std::getline(is, line) || line != magic) {
    throw Error("E_FORMAT", "expected header '" + std::string(magic) + "'");
  }
  std::map<std::string, std::string> fields;
  while (std::getline(is, line)) {
    if (line == "end_header") return fields;
    const auto space = line.find(' ');
    if (space == std::string::npos) {
      fields[line] = "";
    } else {
      fields[line.substr(0, space)] = line.substr(space + 1);
    }
  }
  throw Error("E_FORMAT", "unterminated header for '" + std::string(magic) +
                              "'");
}

void WriteCommentBlock(std::ostream& os, std::string_view text) {
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    const auto line = text.substr(
        start, end == std::string_view::npos ? std::string_view::npos
                                             : end - start);
    if (!line.empty()) {
      std::string flat(line);
      for (char& c : flat) {
        if (c == '\t') c = ' ';
      }
      os << "# " << flat << '\n';
    }
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
}

bool IsCommentLine(std::string_view line) {
  if (line == "#") return true;
  return line.size() >= 2 && line[0] == '#' && line[1] == ' ' &&
         line.find('\t') == std::string_view::npos;
}

void WriteVarint(std::ostream& os, std::uint64_t value) {
  while (value >= 0x80) {
    os.put(static_cast<char>((value & 0x7F) | 0x80));
    value >>= 7;
  }
  os.put(static_cast<char>(value));
}

std::uint64_t ReadVarint(std::istream& is) {
  std::uint64_t value = 0;
  for (int shift = 0; shift < 64; shift += 7) {
    const int byte = is.get();
    if (byte == std::char_traits<char>::eof()) {
      throw Error("E_FORMAT", "truncated varint");
    }
    value |= static_cast<std::uint64_t>(byte & 0x7F) << shift;
    if ((byte & 0x80) == 0) return value;
  }
  throw Error("E_FORMAT", "varint too long");
}

namespace {

template <typename T>
void WriteLittleEndian(std::ostream& os, T value) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t a = 0, b = sizeof(T) - 1; a < b; ++a, --b) {
      std::swap(bytes[a], bytes[b]);
    }
  }
  os.write(bytes, sizeof(T));
}

template <typename T>
T ReadLittleEndian(std::istream& is) {
  char bytes[sizeof(T)];
  if (!is.read(bytes, sizeof(T))) {
    throw Error("E_FORMAT", "truncated binary record");
  }
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t a = 0, b = sizeof(T) - 1; a < b; ++a, --b) {
      std::swap(bytes[a], bytes[b]);
    }
  }
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

void WriteU32(std::ostream& os, std::uint32_t value) {
  WriteLittleEndian(os, value);
}
void WriteF64(std::ostream& os, double value) { WriteLittleEndian(os, value); }
std::uint32_t ReadU32(std::istream& is) {
  return ReadLittleEndian<std::uint32_t>(is);
}
double ReadF64(std::istream& is) { return ReadLittleEndian<double>(is); }

std::string FormatDouble(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::uint64_t ParseUnsigned(const std::string& text, std::string_view what) {
  std::uint64_t value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw Error("E_FORMAT", "malformed " + std::string(what) + ": '" + text +
                                "'");
  }
  return value;
}

double ParseDouble(const std::string& text, std::string_view what) {
  errno = 0;
  char* end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() ||
      (errno == ERANGE && std::isinf(value))) {
    throw Error("E_FORMAT", "malformed " + std::string(what) + ": '" + text +
                                "'");
  }
  return value;
}

}  // namespace grv::artifact
