#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace grv {

using WordId = std::uint32_t;

// Error carrying a short machine-readable code, e.g. "E_INGEST".
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

// Context slots used by triple statistics and relation vectors.
enum class Slot : int { kBetween = 0, kBefore = 1, kAfter = 2 };

inline constexpr Slot kAllSlots[] = {Slot::kBetween, Slot::kBefore,
                                     Slot::kAfter};

const char* SlotName(Slot slot);
Slot ParseSlot(const std::string& name);

}  // namespace grv
