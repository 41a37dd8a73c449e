#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace grv {

// Runs one pipeline stage. `args[0]` is the program name, `args[1]` the
// subcommand. Progress lines go to `out`; a failure prints one line
// "error <CODE>: <message>" to `err`. Returns the process exit status.
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);

}  // namespace grv
