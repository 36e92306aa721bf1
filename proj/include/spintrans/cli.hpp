// cli.hpp — Command implementations behind the spintrans executable
//
// Commands write self-describing CSV (or a check report) to `out`; human
// diagnostics go to `diag`. Exit codes: 0 ok, 1 validation error, 2 check
// failure, 3 resource cap exceeded.

#pragma once

#include <iosfwd>

#include "spintrans/config.hpp"

namespace spintrans::cli {

int run(const config::RunConfig& cfg, std::ostream& out, std::ostream& diag);

}  // namespace spintrans::cli
