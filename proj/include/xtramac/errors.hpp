#pragma once

#include <stdexcept>
#include <string>

namespace xtramac {

// Bad user or configuration input: unknown ids, malformed files, width
// mismatches, infeasible plans.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Broken caller contract: out-of-range port values, lane count mismatches.
struct ContractViolation : std::logic_error {
  explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

}  // namespace xtramac
