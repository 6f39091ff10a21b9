#pragma once

#include <string>

#include "bnnpipe/pipeline_ir.hpp"

namespace bnnpipe {

/// P4-flavored rendering: PHV fields as header members, one control block
/// per element, one action per primitive, and a top-level apply that runs
/// the element controls in order. Not meant for a vendor compiler.
std::string render_p4(const PipelineProgram& prog);

}  // namespace bnnpipe
