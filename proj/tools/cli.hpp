#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "coevolve/config.hpp"

namespace coevolve::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitAborted = 2;

/// Runs the configured experiment and writes every artifact into cfg.out.
/// Returns kExitAborted when any run aborted, kExitOk otherwise.
int execute(const RunConfig& cfg, std::uint64_t seed, std::ostream& out);

/// Entry point; args[0] is the program name.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_main(int argc, char** argv);

}  // namespace coevolve::cli
