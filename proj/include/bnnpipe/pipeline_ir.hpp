#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "bnnpipe/bit_vector.hpp"

namespace bnnpipe {

/// Resource envelope of the target match-action pipeline.
struct ChipProfile {
  std::string name = "rmt32";
  std::size_t elements_max = 32;
  std::size_t phv_bits = 4096;
  std::size_t ops_warn_threshold = 224;
  std::uint64_t packets_per_second = 960'000'000;
  bool native_popcnt = false;
  std::size_t popcnt_width = 32;

  static ChipProfile rmt32();
  static ChipProfile rmt32_popcnt();
  /// "rmt32" or "rmt32-popcnt". Throws InvariantError for anything else.
  static ChipProfile by_name(std::string_view name);

  /// Throws InvariantError when a count is zero or popcnt_width is out of range.
  void check() const;

  bool operator==(const ChipProfile&) const = default;
};

/// Named contiguous bit range of the PHV. Fields may alias one another.
struct Field {
  std::string id;
  std::size_t offset = 0;
  std::size_t width = 0;

  bool operator==(const Field&) const = default;
};

/// Sub-range of a field; `offset` is relative to the field start.
struct Slice {
  std::string field;
  std::size_t offset = 0;
  std::size_t width = 0;

  bool operator==(const Slice&) const = default;
};

enum class Opcode { Copy, Repl, XnorC, AndC, ShrAndC, Add, GeC, Fold, Popcnt };

std::string_view opcode_name(Opcode op);
std::optional<Opcode> opcode_from_name(std::string_view name);

/// One action-unit primitive. Which of `srcs`, `imm`, `shift`, `threshold`
/// are meaningful depends on the opcode:
///   COPY     dst <- srcs[0]
///   REPL     dst <- srcs[0] repeated dst.width / srcs[0].width times
///   XNORC    dst <- xnor(srcs[0], imm)
///   ANDC     dst <- srcs[0] & imm
///   SHRANDC  dst <- (srcs[0] >> shift) & imm
///   ADD      dst <- srcs[0] + srcs[1] (mod 2^dst.width)
///   GEC      dst(1 bit) <- srcs[0] >= threshold
///   FOLD     dst bit k <- srcs[k] (each 1 bit)
///   POPCNT   dst <- popcount(srcs[0])
struct PrimitiveOp {
  Opcode opcode = Opcode::Copy;
  Slice dst;
  std::vector<Slice> srcs;
  BitVector imm;
  std::size_t shift = 0;
  std::uint64_t threshold = 0;

  bool operator==(const PrimitiveOp&) const = default;
};

namespace ops {
PrimitiveOp copy(Slice dst, Slice src);
PrimitiveOp repl(Slice dst, Slice src);
PrimitiveOp xnorc(Slice dst, Slice src, BitVector imm);
PrimitiveOp andc(Slice dst, Slice src, BitVector imm);
PrimitiveOp shrandc(Slice dst, Slice src, std::size_t shift, BitVector imm);
PrimitiveOp add(Slice dst, Slice a, Slice b);
PrimitiveOp gec(Slice dst, Slice src, std::uint64_t threshold);
PrimitiveOp fold(Slice dst, std::vector<Slice> srcs);
PrimitiveOp popcnt(Slice dst, Slice src);
}  // namespace ops

/// Ops of one pipeline element. They execute in parallel: every source is
/// read from the element's pre-state.
struct ElementProgram {
  std::vector<PrimitiveOp> ops;

  bool operator==(const ElementProgram&) const = default;
};

struct LayerSpan {
  std::size_t layer = 0;
  std::size_t first_element = 0;
  std::size_t element_count = 0;
  std::size_t width = 0;
  std::size_t parallel = 0;
  std::size_t batches = 0;

  bool operator==(const LayerSpan&) const = default;
};

struct ProgramMetadata {
  std::string model_name;
  std::vector<LayerSpan> layers;

  bool operator==(const ProgramMetadata&) const = default;
};

struct PipelineProgram {
  ChipProfile profile;
  std::vector<Field> fields;
  std::string input_field;
  std::string output_field;
  std::vector<ElementProgram> elements;
  ProgramMetadata metadata;

  const Field* find_field(std::string_view id) const;
  /// Whole-field slice. Throws InvariantError for an unknown id.
  Slice whole(std::string_view id) const;
  std::size_t op_count() const;

  bool operator==(const PipelineProgram&) const = default;
};

/// Field lookup with absolute-offset resolution.
class FieldTable {
 public:
  explicit FieldTable(const std::vector<Field>& fields);

  const Field* find(std::string_view id) const;
  /// Absolute PHV offset of a slice. Throws InvariantError for unknown fields.
  std::size_t absolute_offset(const Slice& s) const;

 private:
  std::unordered_map<std::string, Field> fields_;
};

enum class DiagnosticKind {
  TooManyElements,
  BadProfile,
  DuplicateField,
  FieldOutsidePhv,
  UnknownField,
  SliceOutOfField,
  DoubleWrite,
  PopcntUnsupported,
  OperandWidth,
  OpsOverBudget,
};

struct Diagnostic {
  DiagnosticKind kind;
  std::optional<std::size_t> element;
  std::string message;

  auto operator<=>(const Diagnostic&) const = default;
};

struct ValidationReport {
  std::vector<Diagnostic> errors;
  std::vector<Diagnostic> warnings;

  bool ok() const { return errors.empty(); }
  bool has_error(DiagnosticKind kind) const;
  bool has_warning(DiagnosticKind kind) const;
  std::string summary() const;
};

/// Collects every error and warning; findings are sorted so the result does
/// not depend on traversal order. An empty error list means the simulator
/// can execute the program.
ValidationReport validate_program(const PipelineProgram& prog);

}  // namespace bnnpipe
