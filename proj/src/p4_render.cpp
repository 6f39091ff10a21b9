#include "bnnpipe/p4_render.hpp"

#include <sstream>

namespace bnnpipe {

namespace {

std::string field_ref(const PipelineProgram& prog, const Slice& s) {
  std::string out = "hdr.phv." + s.field;
  const Field* f = prog.find_field(s.field);
  if (f && s.offset == 0 && s.width == f->width) return out;
  return out + "[" + std::to_string(s.offset + s.width - 1) + ":" + std::to_string(s.offset) + "]";
}

std::string literal(const BitVector& v) { return std::to_string(v.width()) + "w0x" + v.to_hex(); }

void render_op(std::ostream& os, const PipelineProgram& prog, const PrimitiveOp& op) {
  const auto dst = field_ref(prog, op.dst);
  auto src = [&](std::size_t k) { return field_ref(prog, op.srcs.at(k)); };
  switch (op.opcode) {
    case Opcode::Copy:
      os << "        " << dst << " = " << src(0) << ";\n";
      break;
    case Opcode::Repl: {
      const std::size_t times = op.srcs[0].width ? op.dst.width / op.srcs[0].width : 0;
      os << "        " << dst << " = ";
      for (std::size_t i = 0; i < times; ++i) os << (i ? " ++ " : "") << src(0);
      os << ";\n";
      break;
    }
    case Opcode::XnorC:
      os << "        " << dst << " = ~(" << src(0) << " ^ " << literal(op.imm) << ");\n";
      break;
    case Opcode::AndC:
      os << "        " << dst << " = " << src(0) << " & " << literal(op.imm) << ";\n";
      break;
    case Opcode::ShrAndC:
      os << "        " << dst << " = (" << src(0) << " >> " << op.shift << ") & " << literal(op.imm)
         << ";\n";
      break;
    case Opcode::Add:
      os << "        " << dst << " = " << src(0) << " + " << src(1) << ";\n";
      break;
    case Opcode::GeC:
      os << "        " << dst << " = (" << src(0) << " >= " << op.srcs[0].width << "w" << op.threshold
         << ") ? 1w1 : 1w0;\n";
      break;
    case Opcode::Fold:
      for (std::size_t k = 0; k < op.srcs.size(); ++k) {
        Slice bit{op.dst.field, op.dst.offset + k, 1};
        os << "        " << field_ref(prog, bit) << " = " << src(k) << ";\n";
      }
      break;
    case Opcode::Popcnt:
      os << "        " << dst << " = popcnt(" << src(0) << ");\n";
      break;
  }
}

}  // namespace

std::string render_p4(const PipelineProgram& prog) {
  std::ostringstream os;
  const auto& p = prog.profile;
  os << "// model: " << (prog.metadata.model_name.empty() ? "-" : prog.metadata.model_name) << "\n";
  os << "// profile " << p.name << ": " << prog.elements.size() << "/" << p.elements_max
     << " elements, phv " << p.phv_bits << " bits\n";
  os << "// Actions inside one element read the PHV as it was when the element started.\n\n";

  os << "header phv_t {\n";
  for (const auto& f : prog.fields) {
    os << "    bit<" << f.width << "> " << f.id << ";  // phv[" << f.offset << "," << f.offset + f.width
       << ")\n";
  }
  os << "}\n\n";
  os << "struct headers_t {\n    phv_t phv;\n}\n\n";

  for (std::size_t e = 0; e < prog.elements.size(); ++e) {
    const auto& elem = prog.elements[e];
    os << "control element_" << e << "(inout headers_t hdr) {\n";
    for (std::size_t i = 0; i < elem.ops.size(); ++i) {
      os << "    action " << opcode_name(elem.ops[i].opcode) << "_" << i << "() {\n";
      render_op(os, prog, elem.ops[i]);
      os << "    }\n";
    }
    os << "    apply {\n";
    for (std::size_t i = 0; i < elem.ops.size(); ++i) {
      os << "        " << opcode_name(elem.ops[i].opcode) << "_" << i << "();\n";
    }
    os << "    }\n}\n\n";
  }

  os << "control bnn_pipeline(inout headers_t hdr) {\n";
  for (std::size_t e = 0; e < prog.elements.size(); ++e) {
    os << "    element_" << e << "() element_" << e << "_inst;\n";
  }
  os << "    apply {\n";
  for (std::size_t e = 0; e < prog.elements.size(); ++e) {
    os << "        element_" << e << "_inst.apply(hdr);\n";
  }
  os << "    }\n}\n";
  return os.str();
}

}  // namespace bnnpipe
