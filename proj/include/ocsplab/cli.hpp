#pragma once

#include <iosfwd>

namespace ocsplab {

/// Exit codes: 0 success, 1 experiment failure, 2 usage error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ocsplab
