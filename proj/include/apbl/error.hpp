#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace apbl {

/// Raised for violated preconditions and failed numerical solves.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-fatal messages collected during a step (CFL warnings and the like).
struct Diagnostics {
  std::vector<std::string> warnings;

  void warn(std::string message) { warnings.push_back(std::move(message)); }
  [[nodiscard]] bool empty() const noexcept { return warnings.empty(); }
};

}  // namespace apbl
