#pragma once

namespace embkit::cli {

// Entry point behind main(): parses argv, dispatches the subcommand, and
// maps toolkit errors to exit codes (0 ok, 1 domain/validation failure,
// 2 usage errors).
int run(int argc, const char* const* argv);

} // namespace embkit::cli
