#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace dthread::cli {

/// Exit codes: 0 success / no Errors, 1 verification Errors, 2 failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dthread::cli
