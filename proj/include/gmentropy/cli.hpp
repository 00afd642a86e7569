#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gmentropy::cli {

/// Runs one subcommand. Returns 0 on success, 1 on numerical or
/// configuration errors, 2 on command-line usage errors.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int dispatch(int argc, const char* const* argv);

/// "a:b:step" → a, a+step, … up to b inclusive.
std::vector<double> parse_grid(const std::string& spec);

}  // namespace gmentropy::cli
