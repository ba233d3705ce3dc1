#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pcnvs {

/// Runs the command-line interface. `args` excludes the program name.
/// Returns 0 on success, 1 on bad input or usage, 2 on internal failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pcnvs
