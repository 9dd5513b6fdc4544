#pragma once

#include <ostream>

namespace hcal::cli {

/// Entry point behind the `hcal` executable.
///
/// Exit codes: 0 success, 1 usage error, 2 numerical or domain error.
/// Errors go to `err` as a single line prefixed with `error_code=<code>`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hcal::cli
