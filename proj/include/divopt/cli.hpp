#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace divopt::cli {

enum ExitCode : int {
    kOk = 0,
    kVerificationFailed = 1,
    kUsage = 2,
    kNumerical = 3,
};

// Runs one solver command. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// CSV number: 10 significant digits, '.' decimal separator.
std::string csv_number(double x);

}  // namespace divopt::cli
