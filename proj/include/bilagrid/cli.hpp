// Copyright 2026 The Bilagrid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

namespace bilagrid {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1,
    kExitConfig = 2,
    kExitInput = 3,
    kExitDivergence = 4,
};

/// Environment variable naming the default output root.
inline constexpr const char* kOutputRootEnv = "BILAGRID_OUTPUT_ROOT";

/// Runs one subcommand (synth | fit | lift | apply | render | eval) and
/// returns its exit code. args excludes the program name.
int runCli(const std::vector<std::string>& args);

}  // namespace bilagrid
