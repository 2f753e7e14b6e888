#pragma once

#include <ostream>

namespace cfbench {

// Subcommands: run, generate-dataset, list, report. Returns 0 on success,
// 1 on usage/validation errors, 2 on runtime failures.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cfbench
