#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace uavnet {

/// Subcommands gen-world, gen-pool, train, eval, sweep, inspect. Returns 0 on
/// success, 2 on configuration errors and 1 on any other failure.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_main(int argc, char** argv);

}  // namespace uavnet
