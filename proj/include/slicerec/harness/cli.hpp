#pragma once

#include <string>
#include <vector>

namespace srec {

// Entry point shared by the binary and the tests. Returns the process exit
// code: 0 success, 2 usage error, 1 runtime failure.
int run_cli(const std::vector<std::string>& args);

}  // namespace srec
