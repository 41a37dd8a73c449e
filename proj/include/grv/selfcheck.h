#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace grv {

struct SelfcheckItem {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Brute-force checks on small built-in corpora: counting against position
// enumeration, SI identities, normalization, ridge fits against a QR
// solve, and Spearman against its definition.
std::vector<SelfcheckItem> RunSelfcheck(std::uint64_t seed = 1);

}  // namespace grv
