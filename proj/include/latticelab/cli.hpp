// The latticelab command-line driver.

#pragma once

namespace latticelab {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitVerdictFail = 1,
  kExitInput = 2,
  kExitConfig = 3,
  kExitCalibration = 4,
  kExitResolution = 5,
};

/// Parses argv, runs one command and returns its exit code. Errors are
/// reported on stderr; nothing throws out of here.
int run_cli(int argc, char** argv);

}  // namespace latticelab
