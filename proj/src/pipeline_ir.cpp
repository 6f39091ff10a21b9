#include "bnnpipe/pipeline_ir.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <set>
#include <sstream>

#include "bnnpipe/error.hpp"

namespace bnnpipe {

namespace {

constexpr std::array<std::pair<Opcode, std::string_view>, 9> kOpcodeNames{{
    {Opcode::Copy, "copy"},
    {Opcode::Repl, "repl"},
    {Opcode::XnorC, "xnorc"},
    {Opcode::AndC, "andc"},
    {Opcode::ShrAndC, "shrandc"},
    {Opcode::Add, "add"},
    {Opcode::GeC, "gec"},
    {Opcode::Fold, "fold"},
    {Opcode::Popcnt, "popcnt"},
}};

}  // namespace

std::string_view opcode_name(Opcode op) {
  for (const auto& [code, name] : kOpcodeNames) {
    if (code == op) return name;
  }
  return "?";
}

std::optional<Opcode> opcode_from_name(std::string_view name) {
  for (const auto& [code, n] : kOpcodeNames) {
    if (n == name) return code;
  }
  return std::nullopt;
}

ChipProfile ChipProfile::rmt32() { return ChipProfile{}; }

ChipProfile ChipProfile::rmt32_popcnt() {
  ChipProfile p;
  p.name = "rmt32-popcnt";
  p.native_popcnt = true;
  return p;
}

ChipProfile ChipProfile::by_name(std::string_view name) {
  if (name == "rmt32") return rmt32();
  if (name == "rmt32-popcnt") return rmt32_popcnt();
  throw InvariantError("unknown chip profile '" + std::string(name) + "'");
}

void ChipProfile::check() const {
  if (name.empty()) throw InvariantError("profile name is empty");
  if (elements_max == 0 || phv_bits == 0 || ops_warn_threshold == 0 || packets_per_second == 0) {
    throw InvariantError("profile " + name + ": all counts must be positive");
  }
  if (popcnt_width == 0 || popcnt_width > 64 || !std::has_single_bit(popcnt_width)) {
    throw InvariantError("profile " + name + ": popcnt width " + std::to_string(popcnt_width) +
                         " must be a power of two <= 64");
  }
}

namespace ops {

PrimitiveOp copy(Slice dst, Slice src) {
  return {Opcode::Copy, std::move(dst), {std::move(src)}, {}, 0, 0};
}
PrimitiveOp repl(Slice dst, Slice src) {
  return {Opcode::Repl, std::move(dst), {std::move(src)}, {}, 0, 0};
}
PrimitiveOp xnorc(Slice dst, Slice src, BitVector imm) {
  return {Opcode::XnorC, std::move(dst), {std::move(src)}, std::move(imm), 0, 0};
}
PrimitiveOp andc(Slice dst, Slice src, BitVector imm) {
  return {Opcode::AndC, std::move(dst), {std::move(src)}, std::move(imm), 0, 0};
}
PrimitiveOp shrandc(Slice dst, Slice src, std::size_t shift, BitVector imm) {
  return {Opcode::ShrAndC, std::move(dst), {std::move(src)}, std::move(imm), shift, 0};
}
PrimitiveOp add(Slice dst, Slice a, Slice b) {
  return {Opcode::Add, std::move(dst), {std::move(a), std::move(b)}, {}, 0, 0};
}
PrimitiveOp gec(Slice dst, Slice src, std::uint64_t threshold) {
  return {Opcode::GeC, std::move(dst), {std::move(src)}, {}, 0, threshold};
}
PrimitiveOp fold(Slice dst, std::vector<Slice> srcs) {
  return {Opcode::Fold, std::move(dst), std::move(srcs), {}, 0, 0};
}
PrimitiveOp popcnt(Slice dst, Slice src) {
  return {Opcode::Popcnt, std::move(dst), {std::move(src)}, {}, 0, 0};
}

}  // namespace ops

const Field* PipelineProgram::find_field(std::string_view id) const {
  for (const auto& f : fields) {
    if (f.id == id) return &f;
  }
  return nullptr;
}

Slice PipelineProgram::whole(std::string_view id) const {
  const Field* f = find_field(id);
  if (!f) throw InvariantError("unknown field '" + std::string(id) + "'");
  return {f->id, 0, f->width};
}

std::size_t PipelineProgram::op_count() const {
  std::size_t n = 0;
  for (const auto& e : elements) n += e.ops.size();
  return n;
}

FieldTable::FieldTable(const std::vector<Field>& fields) {
  for (const auto& f : fields) fields_.emplace(f.id, f);
}

const Field* FieldTable::find(std::string_view id) const {
  auto it = fields_.find(std::string(id));
  return it == fields_.end() ? nullptr : &it->second;
}

std::size_t FieldTable::absolute_offset(const Slice& s) const {
  const Field* f = find(s.field);
  if (!f) throw InvariantError("unknown field '" + s.field + "'");
  return f->offset + s.offset;
}

bool ValidationReport::has_error(DiagnosticKind kind) const {
  return std::any_of(errors.begin(), errors.end(), [&](const auto& d) { return d.kind == kind; });
}

bool ValidationReport::has_warning(DiagnosticKind kind) const {
  return std::any_of(warnings.begin(), warnings.end(), [&](const auto& d) { return d.kind == kind; });
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (const auto& d : errors) os << "error: " << d.message << "\n";
  for (const auto& d : warnings) os << "warning: " << d.message << "\n";
  return os.str();
}

namespace {

std::string slice_text(const Slice& s) {
  return s.field + "[" + std::to_string(s.offset) + ":" + std::to_string(s.width) + "]";
}

class Validator {
 public:
  explicit Validator(const PipelineProgram& prog) : prog_(prog), table_(prog.fields) {}

  ValidationReport run() {
    try {
      prog_.profile.check();
    } catch (const InvariantError& e) {
      error(DiagnosticKind::BadProfile, std::nullopt, e.what());
    }
    if (prog_.elements.size() > prog_.profile.elements_max) {
      error(DiagnosticKind::TooManyElements, std::nullopt,
            "elements " + std::to_string(prog_.elements.size()) + " > " +
                std::to_string(prog_.profile.elements_max));
    }
    check_fields();
    check_endpoint("input", prog_.input_field);
    check_endpoint("output", prog_.output_field);
    for (std::size_t e = 0; e < prog_.elements.size(); ++e) check_element(e, prog_.elements[e]);

    std::sort(report_.errors.begin(), report_.errors.end());
    std::sort(report_.warnings.begin(), report_.warnings.end());
    return std::move(report_);
  }

 private:
  void error(DiagnosticKind kind, std::optional<std::size_t> element, std::string message) {
    report_.errors.push_back({kind, element, std::move(message)});
  }

  void check_fields() {
    std::set<std::string> seen;
    for (const auto& f : prog_.fields) {
      if (!seen.insert(f.id).second) {
        error(DiagnosticKind::DuplicateField, std::nullopt, "field " + f.id + " declared twice");
      }
      if (f.width == 0 || f.offset + f.width > prog_.profile.phv_bits) {
        error(DiagnosticKind::FieldOutsidePhv, std::nullopt,
              "field " + f.id + " [" + std::to_string(f.offset) + "," +
                  std::to_string(f.offset + f.width) + ") outside phv of " +
                  std::to_string(prog_.profile.phv_bits) + " bits");
      }
    }
  }

  void check_endpoint(const char* role, const std::string& id) {
    if (!table_.find(id)) {
      error(DiagnosticKind::UnknownField, std::nullopt,
            std::string(role) + " field '" + id + "' is not declared");
    }
  }

  // Returns false when the slice cannot be resolved.
  bool check_slice(std::size_t e, std::size_t i, const Slice& s) {
    const Field* f = table_.find(s.field);
    if (!f) {
      error(DiagnosticKind::UnknownField, e, where(e, i) + "unknown field '" + s.field + "'");
      return false;
    }
    if (s.width == 0 || s.offset + s.width > f->width) {
      error(DiagnosticKind::SliceOutOfField, e,
            where(e, i) + "slice " + slice_text(s) + " outside field of width " +
                std::to_string(f->width));
      return false;
    }
    return true;
  }

  static std::string where(std::size_t e, std::size_t i) {
    return "element " + std::to_string(e) + " op " + std::to_string(i) + ": ";
  }

  void width_error(std::size_t e, std::size_t i, const PrimitiveOp& op, const std::string& what) {
    error(DiagnosticKind::OperandWidth, e,
          where(e, i) + std::string(opcode_name(op.opcode)) + " " + what);
  }

  void check_op(std::size_t e, std::size_t i, const PrimitiveOp& op) {
    bool resolved = check_slice(e, i, op.dst);
    for (const auto& s : op.srcs) resolved = check_slice(e, i, s) && resolved;

    const std::size_t expected_srcs = op.opcode == Opcode::Add    ? 2
                                      : op.opcode == Opcode::Fold ? op.dst.width
                                                                  : 1;
    if (op.srcs.size() != expected_srcs) {
      width_error(e, i, op,
                  "expects " + std::to_string(expected_srcs) + " sources, has " +
                      std::to_string(op.srcs.size()));
      return;
    }

    if (op.opcode == Opcode::Popcnt) {
      if (!prog_.profile.native_popcnt) {
        error(DiagnosticKind::PopcntUnsupported, e,
              where(e, i) + "popcnt requires a native-popcount profile (profile " +
                  prog_.profile.name + ")");
      } else if (op.srcs[0].width > prog_.profile.popcnt_width) {
        error(DiagnosticKind::PopcntUnsupported, e,
              where(e, i) + "popcnt source width " + std::to_string(op.srcs[0].width) + " > " +
                  std::to_string(prog_.profile.popcnt_width));
      }
    }
    if (!resolved) return;

    const std::size_t dw = op.dst.width;
    const std::size_t sw = op.srcs.empty() ? 0 : op.srcs[0].width;
    switch (op.opcode) {
      case Opcode::Copy:
        if (sw != dw) width_error(e, i, op, "source width " + std::to_string(sw) + " != " + std::to_string(dw));
        break;
      case Opcode::Repl:
        if (dw % sw != 0) {
          width_error(e, i, op, "destination width " + std::to_string(dw) +
                                    " is not a multiple of " + std::to_string(sw));
        }
        break;
      case Opcode::XnorC:
      case Opcode::AndC:
      case Opcode::ShrAndC:
        if (sw != dw || op.imm.width() != dw) {
          width_error(e, i, op, "widths dst " + std::to_string(dw) + ", src " + std::to_string(sw) +
                                    ", imm " + std::to_string(op.imm.width()) + " differ");
        }
        break;
      case Opcode::Add:
        if (sw != dw || op.srcs[1].width != dw) {
          width_error(e, i, op, "widths dst " + std::to_string(dw) + ", a " + std::to_string(sw) +
                                    ", b " + std::to_string(op.srcs[1].width) + " differ");
        }
        break;
      case Opcode::GeC:
        if (dw != 1) width_error(e, i, op, "destination must be 1 bit");
        break;
      case Opcode::Fold:
        for (const auto& s : op.srcs) {
          if (s.width != 1) {
            width_error(e, i, op, "source " + slice_text(s) + " is not 1 bit");
            break;
          }
        }
        break;
      case Opcode::Popcnt:
        break;
    }
  }

  void check_element(std::size_t e, const ElementProgram& elem) {
    if (elem.ops.size() > prog_.profile.ops_warn_threshold) {
      report_.warnings.push_back({DiagnosticKind::OpsOverBudget, e,
                                  "element " + std::to_string(e) + ": ops " +
                                      std::to_string(elem.ops.size()) + " > " +
                                      std::to_string(prog_.profile.ops_warn_threshold)});
    }

    struct Write {
      std::size_t begin;
      std::size_t end;
      std::size_t op;
    };
    std::vector<Write> writes;
    for (std::size_t i = 0; i < elem.ops.size(); ++i) {
      const auto& op = elem.ops[i];
      check_op(e, i, op);
      const Field* f = table_.find(op.dst.field);
      if (f && op.dst.width > 0) {
        const std::size_t begin = f->offset + op.dst.offset;
        writes.push_back({begin, begin + op.dst.width, i});
      }
    }

    std::sort(writes.begin(), writes.end(), [](const Write& a, const Write& b) {
      return a.begin != b.begin ? a.begin < b.begin : a.op < b.op;
    });
    std::optional<Write> widest;
    for (const auto& w : writes) {
      if (widest && w.begin < widest->end) {
        const auto lo = std::min(widest->op, w.op);
        const auto hi = std::max(widest->op, w.op);
        error(DiagnosticKind::DoubleWrite, e,
              "element " + std::to_string(e) + ": double write on phv bits [" +
                  std::to_string(w.begin) + "," + std::to_string(std::min(w.end, widest->end)) +
                  ") by ops " + std::to_string(lo) + " and " + std::to_string(hi));
      }
      if (!widest || w.end > widest->end) widest = w;
    }
  }

  const PipelineProgram& prog_;
  FieldTable table_;
  ValidationReport report_;
};

}  // namespace

ValidationReport validate_program(const PipelineProgram& prog) { return Validator(prog).run(); }

}  // namespace bnnpipe
