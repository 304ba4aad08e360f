#pragma once

#include <string>
#include <vector>

namespace trajkit {

/// Runs one toolkit command. argv follows main() conventions (argv[0] is
/// the program name). Returns the process exit code: 0 success,
/// 1 validation failure, 2 I/O failure.
int run_cli(const std::vector<std::string>& argv);

} // namespace trajkit
