#pragma once

#include <ostream>
#include <stdexcept>
#include <string>

#include "config.hpp"

namespace kspec::cli {

enum ExitCode : int { exit_ok = 0, exit_config = 2, exit_tolerance = 3, exit_internal = 4 };

// An error raised inside a pipeline stage, tagged with the stage and the exit code it maps to.
struct StageError : std::runtime_error {
    int code;
    StageError(const std::string& what, int c) : std::runtime_error(what), code(c) {}
};

struct RunContext {
    RunConfig cfg;
    std::string config_bytes;  // hashed into the manifest
    std::string command;
};

// Each command writes its artifacts plus manifest.json under cfg.output_dir and
// returns exit_ok or exit_tolerance. Library errors surface as StageError.
int cmd_verify_algebra(const RunContext& ctx, std::ostream& log);
int cmd_run_weyl(const RunContext& ctx, std::ostream& log);
int cmd_flow_probe(const RunContext& ctx, std::ostream& log);

}  // namespace kspec::cli
