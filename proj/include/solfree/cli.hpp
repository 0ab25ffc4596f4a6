#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace solfree::cli {

/// Runs one command line (args excludes the program name).
/// Returns 0 on success, 1 on a domain error, 2 on a usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

}  // namespace solfree::cli
