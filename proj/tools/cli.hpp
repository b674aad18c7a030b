#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace simpson::cli {

enum ExitCode : int { kOk = 0, kViolation = 1, kHypothesisUnmet = 2, kInputError = 3 };

// argv[0] is the program name. Data goes to out, diagnostics to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace simpson::cli
