// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pex::cli {

enum ExitCode : int { kOk = 0, kValidation = 2, kCapExceeded = 3 };

// Runs one command line (without the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pex::cli
