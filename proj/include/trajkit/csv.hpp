#pragma once

#include <string>

namespace trajkit {

/// Shortest decimal representation that round-trips the exact double.
/// All CSV/SVG number output goes through this so reruns are
/// byte-identical.
std::string format_double(double value);

/// Fixed-point representation with the given number of decimals,
/// e.g. format_fixed(94.1176, 1) == "94.1".
std::string format_fixed(double value, int decimals);

/// Rounds half away from zero at the given number of decimals.
double round_decimals(double value, int decimals);

std::string trim(const std::string& s);

/// Atomically replaces `path` with `content` (write temp, then rename).
void write_file_atomic(const std::string& path, const std::string& content);

} // namespace trajkit
