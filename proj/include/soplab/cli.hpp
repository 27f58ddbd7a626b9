#pragma once

// soptool command surface: sop, sweep-error, validate, simulate.
//
// Exit codes: 0 success, 1 infeasible scenario or failed validation,
// 2 malformed input (bad flags, unreadable or invalid files, empty grids).

#include <iosfwd>
#include <string>
#include <vector>

namespace soplab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitInput = 2;

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Grid specs: "a:b:step" (inclusive, step may be negative) or "v1,v2,...".
// An empty spec gives an empty grid. Throws InputError on malformed specs.
std::vector<double> parse_grid(const std::string& spec);
std::vector<int> parse_int_grid(const std::string& spec);

}  // namespace soplab::cli
