#pragma once

#include <iosfwd>
#include <string>

#include "coopgrid/conic/program.h"

namespace coopgrid::conic {

/// Plain-text canonical form. Doubles are written with 17 significant
/// digits so load(dump(p)) reproduces p bit for bit.
std::string dump_program(const ConicProgram& program);
void dump_program(const ConicProgram& program, std::ostream& out);

/// Throws Error(kParseError) on malformed input.
ConicProgram load_program(std::istream& in);
ConicProgram load_program(const std::string& text);

}  // namespace coopgrid::conic
