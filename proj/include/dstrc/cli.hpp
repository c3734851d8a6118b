#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace dstrc::cli {

/// Entry point of the `dstrc` tool. Returns the process exit code: 0 on
/// success, 1 on a library error, 2 on a usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dstrc::cli
