// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace rismtc::cli {

// Entry point shared by ris_sim and the tests. Returns the process exit code:
// 0 success, 1 configuration/usage error, 2 runtime error.
int run(const std::vector<std::string>& args);

}  // namespace rismtc::cli
