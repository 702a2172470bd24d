#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace transducer::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

// Runs one command line (args excludes the program name). Progress and
// summaries go to out, diagnostics to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::string version();

}  // namespace transducer::cli
