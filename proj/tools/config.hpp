#pragma once

#include <string>
#include <vector>

#include "CLI11.hpp"
#include "infoflow/io.hpp"

namespace infoflow::cli {

// A config file holds either one command, {"command": "transfer", "mode": "linear", ...}, or a
// pipeline, {"pipeline": [{...}, {...}]}. Keys are option names with '-' or '_'; "input" fills the
// positional inputs. Top-level keys of a pipeline apply to every step unless the step sets them.
struct ConfigStep {
    std::string command;
    json own;        // unknown keys here are errors
    json inherited;  // keys here are skipped when the command has no such option
};

std::vector<ConfigStep> config_steps(const json &cfg);

// Arguments supplying every option of app or cmd that is present in step but was not given on
// the command line (both must have been parsed already).
std::vector<std::string> config_args(const CLI::App &app, const CLI::App &cmd, const ConfigStep &step);

}  // namespace infoflow::cli
