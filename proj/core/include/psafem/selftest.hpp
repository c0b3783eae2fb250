#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace psafem {

struct SelftestCheck {
  std::string group;
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SelftestReport {
  std::vector<SelftestCheck> checks;
  bool all_passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }
};

/// Quick internal consistency checks on tiny meshes: eigensolver vs dense
/// reference, bilinear-form identities, commuting-diagram property,
/// postprocessing projection identity, estimator bookkeeping. Runs in a few
/// seconds. If `out` is given every check is listed with its measured value.
SelftestReport run_selftest(std::ostream* out = nullptr);

} // namespace psafem
