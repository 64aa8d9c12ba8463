#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace layerlab::cli {

enum ExitCode : int { kOk = 0, kFailed = 1, kConfigError = 2, kIoError = 3 };

/// Runs the command line; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

}  // namespace layerlab::cli
