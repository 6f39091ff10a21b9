#include "bnnpipe/simulator.hpp"

#include "bnnpipe/error.hpp"

namespace bnnpipe {

namespace {

BitVector read(const Phv& phv, const Slice& s, const FieldTable& fields) {
  return phv.slice(fields.absolute_offset(s), s.width);
}

}  // namespace

Write eval_op(const Phv& pre, const PrimitiveOp& op, const FieldTable& fields) {
  Write out{fields.absolute_offset(op.dst), {}};
  auto src = [&](std::size_t k) { return read(pre, op.srcs.at(k), fields); };

  switch (op.opcode) {
    case Opcode::Copy:
      out.value = src(0);
      break;
    case Opcode::Repl: {
      const auto s = src(0);
      out.value = s.repeat(op.dst.width / s.width());
      break;
    }
    case Opcode::XnorC:
      out.value = xnor(src(0), op.imm);
      break;
    case Opcode::AndC:
      out.value = src(0) & op.imm;
      break;
    case Opcode::ShrAndC:
      out.value = (src(0) >> op.shift) & op.imm;
      break;
    case Opcode::Add:
      out.value = add(src(0), src(1));
      break;
    case Opcode::GeC:
      out.value = BitVector::from_uint(1, src(0).greater_equal(op.threshold) ? 1 : 0);
      break;
    case Opcode::Fold:
      out.value = BitVector(op.dst.width);
      for (std::size_t k = 0; k < op.srcs.size(); ++k) out.value.set_bit(k, src(k).bit(0));
      break;
    case Opcode::Popcnt:
      out.value = BitVector::from_uint(op.dst.width, src(0).popcount());
      break;
  }
  return out;
}

Phv step_element(const Phv& pre, const ElementProgram& elem, const FieldTable& fields,
                 TraceElement* trace) {
  Phv post = pre;
  for (const auto& op : elem.ops) {
    auto w = eval_op(pre, op, fields);
    post.assign(w.offset, w.value);
    if (trace) trace->writes.push_back({op.dst, std::move(w)});
  }
  return post;
}

Simulator::Simulator(PipelineProgram prog) : prog_(std::move(prog)), fields_(prog_.fields) {
  const auto report = validate_program(prog_);
  if (!report.ok()) throw InvalidProgramError("program is not executable:\n" + report.summary());
  input_ = *fields_.find(prog_.input_field);
  output_ = *fields_.find(prog_.output_field);
}

BitVector Simulator::run(const BitVector& input, Trace* trace, const std::optional<Phv>& initial) const {
  if (input.width() != input_.width) {
    throw InvariantError("input width " + std::to_string(input.width()) + " != program input " +
                         std::to_string(input_.width));
  }
  Phv phv = initial ? *initial : Phv(prog_.profile.phv_bits);
  if (phv.width() != prog_.profile.phv_bits) {
    throw InvariantError("initial phv width " + std::to_string(phv.width()) + " != " +
                         std::to_string(prog_.profile.phv_bits));
  }
  phv.assign(input_.offset, input);

  if (trace) trace->elements.clear();
  for (std::size_t e = 0; e < prog_.elements.size(); ++e) {
    if (trace) {
      trace->elements.push_back({e, {}});
      phv = step_element(phv, prog_.elements[e], fields_, &trace->elements.back());
    } else {
      phv = step_element(phv, prog_.elements[e], fields_);
    }
  }
  auto out = phv.slice(output_.offset, output_.width);
  if (trace) trace->output = out;
  return out;
}

BitVector run_packet(const PipelineProgram& prog, const BitVector& input, Trace* trace) {
  return Simulator(prog).run(input, trace);
}

}  // namespace bnnpipe
