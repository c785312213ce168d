#pragma once

#include <string>
#include <vector>

#include "gradsign/manifest.hpp"

namespace gradsign::cli {

// Entry point shared by the binary and the tests; args exclude the program
// name. Returns the process exit code. Subcommands:
//   train | evaluate | attack | visualize | synth-data
int run_cli(const std::vector<std::string>& args);

// Rebuilds the argument vector that reproduces the run a manifest records.
std::vector<std::string> argv_from_manifest(const manifest::Manifest& m);

}  // namespace gradsign::cli
