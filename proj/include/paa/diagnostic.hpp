#pragma once

#include <string>
#include <vector>

#include "paa/syntax/ast.hpp"

namespace paa {

enum class Severity { Error, Warning };

const char* severity_name(Severity s);

// Codes in use:
//   ssa-multi-def       a variable is the target of more than one definition
//   ssa-undef-arg       a fi/md argument has no definition or declaration
//   ssa-undef-mu        a mu variable has no definition or declaration
//   ssa-phi-placement   a fi statement does not directly follow an if/while
//   addr-addr-arith     arithmetic combined two addresses (result is bottom)
//   addr-int-arith      an address was multiplied (result is bottom)
//   md-premise          lenient mode skipped an md statement whose premises fail
struct Diagnostic {
  Severity severity = Severity::Error;
  std::string code;
  Span span;
  std::string message;
};

using Diagnostics = std::vector<Diagnostic>;

bool has_errors(const Diagnostics& ds);

}  // namespace paa
