#pragma once

namespace sketchcv {

/// Entry point of the sketchcv tool. Exit codes: 0 success, 1 identity check
/// failed, 2 usage or configuration error, 3 I/O error.
int run_cli(int argc, char** argv);

}  // namespace sketchcv
