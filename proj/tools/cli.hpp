#pragma once

#include <ostream>

namespace fieldseg {

/// Exit codes: 0 ok, 1 usage or configuration, 2 data error, 3 invariant
/// violation.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fieldseg
