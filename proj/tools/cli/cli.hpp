#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tnl::cli {

/// Dispatch one CLI invocation. Machine-readable JSON goes to `out`, human
/// logs to `err`. Returns the process exit code: 0 success, 1 usage error,
/// 2 numerical failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tnl::cli
