#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mnpiv {

/// Entry point of the command-line tool (fit, test-miv, mc, diagnose).
/// Returns the process exit code: 0 ok, 2 input error, 3 numerical failure,
/// 4 internal invariant violation.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

} // namespace mnpiv
