#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "qmghost/config.hpp"

namespace qmg {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;      // domain, validation or I/O error
inline constexpr int kExitThreshold = 2;  // an acceptance threshold was violated

struct RunOutcome {
  int exit_code = kExitOk;
  std::vector<std::string> artifacts;  // files written
};

/// Executes one mode. Tables and reports without an output directory go to
/// `out`; diagnostics go to `log`. Library errors map to kExitError.
RunOutcome run(const RunConfig& config, std::ostream& out, std::ostream& log);

}  // namespace qmg
