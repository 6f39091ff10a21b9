#pragma once

#include <string>
#include <string_view>

#include "bnnpipe/pipeline_ir.hpp"

namespace bnnpipe {

/// Canonical line-oriented text form of a program. Identical programs render
/// to byte-identical text.
std::string render_ir_text(const PipelineProgram& prog);

/// Inverse of render_ir_text. Throws ParseError carrying the line number on
/// syntax errors, unknown opcodes, undeclared fields, and width mismatches
/// between a slice and its field or an immediate and its operand. Semantic
/// checks (profile gates, double writes) are left to validate_program.
PipelineProgram parse_ir_text(std::string_view text);

}  // namespace bnnpipe
