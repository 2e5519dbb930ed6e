#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace alrn::cli {

// Full command-line entry point: parses args (program name excluded),
// dispatches, and maps failures to exit codes: 0 success, 2 for
// configuration/format/shape problems, 3 for non-finite numerics.
// Kept separate from main() so tests can drive it in-process.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace alrn::cli
