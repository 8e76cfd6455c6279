#pragma once

#include "paa/diagnostic.hpp"
#include "paa/syntax/ast.hpp"

namespace paa {

// Checks the SSA precondition of the analysis. Returns diagnostics sorted by
// source position; an empty list means the program is acceptable.
Diagnostics validate_ssa(const Program& p);

}  // namespace paa
