#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace grv::artifact {

using HeaderFields = std::vector<std::pair<std::string, std::string>>;

// Plain-text header for binary artifacts:
//   <magic>\n
//   <key> <value>\n ...
//   end_header\n
// Values may contain spaces; keys may not.
void WriteHeader(std::ostream& os, std::string_view magic,
                 const HeaderFields& fields);
std::map<std::string, std::string> ReadHeader(std::istream& is,
                                              std::string_view magic);

// Emits each line of `text` prefixed with "# ".
void WriteCommentBlock(std::ostream& os, std::string_view text);
// Returns true if `line` is a header comment ("#" or "# ..." with no tab).
bool IsCommentLine(std::string_view line);

void WriteVarint(std::ostream& os, std::uint64_t value);
std::uint64_t ReadVarint(std::istream& is);

void WriteU32(std::ostream& os, std::uint32_t value);
void WriteF64(std::ostream& os, double value);
std::uint32_t ReadU32(std::istream& is);
double ReadF64(std::istream& is);

// Shortest decimal that round-trips (17 significant digits).
std::string FormatDouble(double value);

std::uint64_t ParseUnsigned(const std::string& text, std::string_view what);
double ParseDouble(const std::string& text, std::string_view what);

}  // namespace grv::artifact
