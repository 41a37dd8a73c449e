#include "grv/common.h"

namespace grv {

const char* SlotName(Slot slot) {
  switch (slot) {
    case Slot::kBetween:
      return "between";
    case Slot::kBefore:
      return "before";
    case Slot::kAfter:
      return "after";
  }
  return "?";
}

Slot ParseSlot(const std::string& name) {
  if (name == "between") return Slot::kBetween;
  if (name == "before") return Slot::kBefore;
  if (name == "after") return Slot::kAfter;
  throw Error("E_CONFIG", "unknown slot '" + name + "'");
}

}  // namespace grv
