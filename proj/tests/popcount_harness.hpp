#pragma once

#include <bit>
#include <cstdint>

#include "bnnpipe/compiler.hpp"
#include "bnnpipe/simulator.hpp"

namespace bnnpipe::testing {

/// A program holding only the popcount-tree elements for one pair field of
/// 2N bits. Its input is the pair (v twice) and its output is copy A.
inline PipelineProgram popcount_tree_program(std::size_t width) {
  PipelineProgram p;
  p.profile = ChipProfile::rmt32();
  p.fields = {{"pair", 0, 2 * width}, {"count", 0, width}};
  p.input_field = "pair";
  p.output_field = "count";
  const Slice pair{"pair", 0, 2 * width};
  p.elements = schedule_popcount_tree(width, std::span<const Slice>(&pair, 1));
  return p;
}

/// Portable reference popcount, bit by bit.
inline std::uint64_t naive_popcount(const BitVector& v) {
  std::uint64_t n = 0;
  for (std::size_t i = 0; i < v.width(); ++i) n += v.bit(i) ? 1 : 0;
  return n;
}

}  // namespace bnnpipe::testing
