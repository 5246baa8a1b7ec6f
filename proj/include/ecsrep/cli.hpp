#pragma once

namespace ecsrep {

// Full command-line front end; returns the process exit code
// (0 success, 1 validation error, 2 verification failure).
int run_cli(int argc, const char* const* argv);

} // namespace ecsrep
