#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace circleflow::cli {

// Runs one invocation; args excludes the program name.
// Returns 0 on success, 1 on usage errors, 2 on pipeline errors (a one-line
// JSON diagnostic is written to `err`).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace circleflow::cli
