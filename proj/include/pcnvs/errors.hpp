#pragma once

#include <stdexcept>
#include <string>

namespace pcnvs {

/// Raised for caller mistakes: mismatched shapes, invalid parameters,
/// malformed files. The CLI maps it to exit code 1.
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace pcnvs
