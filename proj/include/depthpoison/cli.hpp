#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace depthpoison::cli {

/// Subcommands: scene-gen, calibrate-trigger, poison, corrupt, compress,
/// evaluate, verify. Exit status 0 on success, 1 on runtime failure, 2 on
/// usage errors. Errors go to `err` as one JSON object per line.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace depthpoison::cli
