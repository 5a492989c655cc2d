#pragma once

#include <iosfwd>

namespace structcomp {

/// Exit codes: 0 success, 1 usage error, 2 data or validation error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace structcomp
