#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace allelic {

// Exit status: 0 pass, 1 verification failure, 2 usage or configuration error.
inline constexpr int k_exit_ok = 0;
inline constexpr int k_exit_verify_failed = 1;
inline constexpr int k_exit_usage = 2;

// args[0] is the program name.
auto run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) -> int;

}  // namespace allelic
