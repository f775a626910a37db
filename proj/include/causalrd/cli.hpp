#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace causalrd {

// Runs one subcommand (discretize, learn, infer, threshold, rddo, synth).
// Exit codes: 0 success, 1 configuration or usage error, 2 data error.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace causalrd
