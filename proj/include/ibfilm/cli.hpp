#pragma once

namespace ibfilm {

/// Entry point of the command-line tool. Returns the process exit code:
/// 0 on success, 1 on runtime failure, 2 on usage errors.
int cli_main(int argc, char** argv);

}  // namespace ibfilm
