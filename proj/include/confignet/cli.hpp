#pragma once

#include <iosfwd>

namespace confignet {

/// Exit codes: 0 success, 1 a training run was flagged, 2 usage or I/O error.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace confignet
