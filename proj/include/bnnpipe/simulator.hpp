#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "bnnpipe/bit_vector.hpp"
#include "bnnpipe/pipeline_ir.hpp"

namespace bnnpipe {

using Phv = BitVector;

struct Write {
  std::size_t offset = 0;  // absolute PHV bit offset
  BitVector value;

  bool operator==(const Write&) const = default;
};

struct TraceWrite {
  Slice dst;
  Write write;

  bool operator==(const TraceWrite&) const = default;
};

struct TraceElement {
  std::size_t index = 0;
  std::vector<TraceWrite> writes;

  bool operator==(const TraceElement&) const = default;
};

struct Trace {
  std::vector<TraceElement> elements;
  BitVector output;

  bool operator==(const Trace&) const = default;
};

/// Evaluates one primitive against the pre-state.
Write eval_op(const Phv& pre, const PrimitiveOp& op, const FieldTable& fields);

/// VLIW step: sources read from `pre`, destinations written to the returned
/// state, untouched bits carried over.
Phv step_element(const Phv& pre, const ElementProgram& elem, const FieldTable& fields,
                 TraceElement* trace = nullptr);

/// Validates once, then executes packets. Safe to share across threads.
class Simulator {
 public:
  /// Throws InvalidProgramError when validate_program reports errors.
  explicit Simulator(PipelineProgram prog);

  const PipelineProgram& program() const { return prog_; }

  /// The PHV starts as `initial` (zeros when absent), then the input field is
  /// written. Throws InvariantError on an input width mismatch.
  BitVector run(const BitVector& input, Trace* trace = nullptr,
                const std::optional<Phv>& initial = std::nullopt) const;

 private:
  PipelineProgram prog_;
  FieldTable fields_;
  Field input_;
  Field output_;
};

BitVector run_packet(const PipelineProgram& prog, const BitVector& input, Trace* trace = nullptr);

}  // namespace bnnpipe
