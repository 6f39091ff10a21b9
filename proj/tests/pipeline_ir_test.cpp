#include "bnnpipe/pipeline_ir.hpp"

#include <algorithm>
#include <random>

#include "bnnpipe/bnn_model.hpp"
#include "bnnpipe/compiler.hpp"
#include "bnnpipe/error.hpp"
#include "doctest.h"

using namespace bnnpipe;

namespace {

PipelineProgram two_fields(const ChipProfile& profile = ChipProfile::rmt32()) {
  PipelineProgram p;
  p.profile = profile;
  p.fields = {{"f0", 0, 32}, {"f1", 32, 32}};
  p.input_field = "f0";
  p.output_field = "f1";
  return p;
}

Slice s(const std::string& f, std::size_t off, std::size_t w) { return {f, off, w}; }

std::vector<DiagnosticKind> kinds(const std::vector<Diagnostic>& ds) {
  std::vector<DiagnosticKind> out;
  for (const auto& d : ds) out.push_back(d.kind);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("profiles") {
  CHECK(ChipProfile::by_name("rmt32").elements_max == 32);
  CHECK(ChipProfile::by_name("rmt32").phv_bits == 4096);
  CHECK(ChipProfile::by_name("rmt32").ops_warn_threshold == 224);
  CHECK(ChipProfile::by_name("rmt32").packets_per_second == 960'000'000);
  CHECK(ChipProfile::by_name("rmt32-popcnt").native_popcnt);
  CHECK(ChipProfile::by_name("rmt32-popcnt").popcnt_width == 32);
  CHECK_THROWS_AS(ChipProfile::by_name("tofino"), InvariantError);
  auto bad = ChipProfile::rmt32();
  bad.popcnt_width = 128;
  CHECK_THROWS_AS(bad.check(), InvariantError);
  bad.popcnt_width = 32;
  bad.elements_max = 0;
  CHECK_THROWS_AS(bad.check(), InvariantError);
}

TEST_CASE("a well-formed program validates cleanly") {
  auto p = two_fields();
  p.elements.push_back({{ops::copy(p.whole("f1"), p.whole("f0"))}});
  const auto r = validate_program(p);
  CHECK(r.ok());
  CHECK(r.warnings.empty());
}

TEST_CASE("too many elements") {
  auto p = two_fields();
  for (int i = 0; i < 33; ++i) p.elements.push_back({{ops::copy(p.whole("f1"), p.whole("f0"))}});
  const auto r = validate_program(p);
  REQUIRE(r.errors.size() == 1);
  CHECK(r.errors[0].kind == DiagnosticKind::TooManyElements);
  CHECK(r.errors[0].message == "elements 33 > 32");
}

TEST_CASE("double write inside one element") {
  auto p = two_fields();
  p.elements.push_back({{ops::copy(p.whole("f1"), p.whole("f0")), ops::andc(p.whole("f1"), p.whole("f0"), BitVector(32))}});
  const auto r = validate_program(p);
  REQUIRE(r.errors.size() == 1);
  CHECK(r.errors[0].kind == DiagnosticKind::DoubleWrite);
  CHECK(r.errors[0].message.find("double write") != std::string::npos);

  // aliasing fields overlapping in the PHV also collide
  p.fields.push_back({"alias", 40, 8});
  p.elements[0].ops = {ops::copy(p.whole("f1"), p.whole("f0")), ops::copy(p.whole("alias"), s("f0", 0, 8))};
  CHECK(validate_program(p).has_error(DiagnosticKind::DoubleWrite));

  // disjoint halves of one field are fine
  p.elements[0].ops = {ops::copy(s("f1", 0, 16), s("f0", 0, 16)), ops::copy(s("f1", 16, 16), s("f0", 16, 16))};
  CHECK(validate_program(p).ok());
}

TEST_CASE("swapping two fields is one legal element") {
  auto p = two_fields();
  p.elements.push_back({{ops::copy(p.whole("f1"), p.whole("f0")), ops::copy(p.whole("f0"), p.whole("f1"))}});
  CHECK(validate_program(p).ok());
}

TEST_CASE("ops above the budget warn without erroring") {
  ChipProfile profile;
  PipelineProgram p;
  p.profile = profile;
  for (int i = 0; i < 256; ++i) p.fields.push_back({"b" + std::to_string(i), static_cast<std::size_t>(i), 1});
  p.fields.push_back({"in", 256, 1});
  p.input_field = "in";
  p.output_field = "b0";
  ElementProgram e;
  for (int i = 0; i < 256; ++i) e.ops.push_back(ops::copy(p.whole("b" + std::to_string(i)), p.whole("in")));
  p.elements.push_back(e);
  const auto r = validate_program(p);
  CHECK(r.ok());
  REQUIRE(r.warnings.size() == 1);
  CHECK(r.warnings[0].kind == DiagnosticKind::OpsOverBudget);
  CHECK(r.warnings[0].message == "element 0: ops 256 > 224");
}

TEST_CASE("popcnt is gated on the profile") {
  auto p = two_fields();
  p.elements.push_back({{ops::popcnt(s("f1", 0, 6), p.whole("f0"))}});
  CHECK(validate_program(p).has_error(DiagnosticKind::PopcntUnsupported));

  p.profile = ChipProfile::rmt32_popcnt();
  CHECK(validate_program(p).ok());

  p.profile.popcnt_width = 16;
  CHECK(validate_program(p).has_error(DiagnosticKind::PopcntUnsupported));
}

TEST_CASE("field and slice bounds") {
  auto p = two_fields();
  p.fields.push_back({"big", 4090, 16});
  CHECK(validate_program(p).has_error(DiagnosticKind::FieldOutsidePhv));

  p = two_fields();
  p.elements.push_back({{ops::copy(s("f1", 16, 32), s("f0", 0, 32))}});
  CHECK(validate_program(p).has_error(DiagnosticKind::SliceOutOfField));

  p = two_fields();
  p.elements.push_back({{ops::copy(p.whole("f1"), s("nope", 0, 32))}});
  CHECK(validate_program(p).has_error(DiagnosticKind::UnknownField));

  p = two_fields();
  p.output_field = "missing";
  CHECK(validate_program(p).has_error(DiagnosticKind::UnknownField));

  p = two_fields();
  p.fields.push_back({"f0", 64, 4});
  CHECK(validate_program(p).has_error(DiagnosticKind::DuplicateField));
}

TEST_CASE("operand width rules per opcode") {
  auto p = two_fields();
  auto check_bad = [&](PrimitiveOp op) {
    p.elements = {{{std::move(op)}}};
    CHECK(validate_program(p).has_error(DiagnosticKind::OperandWidth));
  };
  auto check_ok = [&](PrimitiveOp op) {
    p.elements = {{{std::move(op)}}};
    CHECK(validate_program(p).ok());
  };
  check_bad(ops::copy(s("f1", 0, 16), p.whole("f0")));
  check_ok(ops::repl(p.whole("f1"), s("f0", 0, 8)));
  check_bad(ops::repl(p.whole("f1"), s("f0", 0, 12)));
  check_bad(ops::xnorc(p.whole("f1"), p.whole("f0"), BitVector(16)));
  check_bad(ops::andc(s("f1", 0, 8), s("f0", 0, 16), BitVector(8)));
  check_ok(ops::shrandc(p.whole("f1"), p.whole("f0"), 3, BitVector(32)));
  check_bad(ops::add(p.whole("f1"), p.whole("f0"), s("f0", 0, 16)));
  check_ok(ops::gec(s("f1", 0, 1), p.whole("f0"), 16));
  check_bad(ops::gec(s("f1", 0, 2), p.whole("f0"), 16));
  check_ok(ops::fold(s("f1", 0, 2), {s("f0", 0, 1), s("f0", 5, 1)}));
  check_bad(ops::fold(s("f1", 0, 3), {s("f0", 0, 1), s("f0", 5, 1)}));
  check_bad(ops::fold(s("f1", 0, 2), {s("f0", 0, 1), s("f0", 5, 2)}));
  PrimitiveOp no_src = ops::copy(p.whole("f1"), p.whole("f0"));
  no_src.srcs.clear();
  check_bad(no_src);
}

TEST_CASE("validation findings do not depend on op order") {
  const auto model = random_model(4, {{16, 8}});
  auto prog = compile(model, ChipProfile::rmt32());
  // Inject two faults, then shuffle every element.
  prog.elements[1].ops.push_back(prog.elements[1].ops.front());
  prog.elements[3].ops.push_back(ops::popcnt(Slice{"l0_slot0", 0, 4}, Slice{"l0_slot0", 0, 16}));
  const auto baseline = validate_program(prog);
  CHECK(kinds(baseline.errors) ==
        std::vector<DiagnosticKind>{DiagnosticKind::DoubleWrite, DiagnosticKind::DoubleWrite,
                                    DiagnosticKind::PopcntUnsupported});

  std::mt19937 rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    auto shuffled = prog;
    for (auto& e : shuffled.elements) std::shuffle(e.ops.begin(), e.ops.end(), rng);
    const auto r = validate_program(shuffled);
    CHECK(kinds(r.errors) == kinds(baseline.errors));
    CHECK(kinds(r.warnings) == kinds(baseline.warnings));
  }
}
