#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace opdyn {

/// Runs one subcommand (simulate, generate, observe, analyze, report).
/// Returns 0 on success or the error category's exit status (2 config,
/// 3 I/O, 4 model); the error is printed to err as one JSON line.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run_command(int argc, char** argv);

} // namespace opdyn
