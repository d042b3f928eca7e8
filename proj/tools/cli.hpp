#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace banet::cli {

/// Runs one command line (args excludes the program name).
/// Returns 0 on success, 1 on runtime/data errors, 2 on usage errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace banet::cli
