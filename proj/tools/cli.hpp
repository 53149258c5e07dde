#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace part::cli {

// Runs one `part` invocation; args excludes the program name. Returns the
// process exit status. Errors are reported on `err` as a single line
//   error: <Kind>: <message>
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace part::cli
