#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace delaycode {

/// Entry point of the `delaycode` binary. `args` excludes the program name.
/// Returns 0 on success, 1 for configuration errors, 2 for data errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace delaycode
