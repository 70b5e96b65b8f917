#pragma once

namespace levymc {

/// Entry point shared by the levymc binary and in-process tests.
/// Subcommands: mcq, solve, rate, validate-measure. Returns 0 on success,
/// 2 on configuration problems, 3 on numerical aborts.
int cli_main(int argc, const char* const* argv);

}  // namespace levymc
