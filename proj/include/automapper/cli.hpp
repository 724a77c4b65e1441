#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace automapper {

inline constexpr const char* kToolVersion = "0.1.0";

// Exit statuses.
inline constexpr int kExitOk = 0;
inline constexpr int kExitBadInput = 2;    // usage, parse or schema errors
inline constexpr int kExitInfeasible = 3;  // a layer has no feasible mapping
inline constexpr int kExitRejected = 4;    // eval: mapping fails validation

// Subcommands: search, eval, space-size. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// The part of a search report that must be byte-identical across reruns.
nlohmann::json deterministic_section(const nlohmann::json& report);

}  // namespace automapper
