#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "bnnpipe/bit_vector.hpp"
#include "bnnpipe/bnn_model.hpp"
#include "bnnpipe/pipeline_ir.hpp"

namespace bnnpipe {

/// Schedule and PHV layout for one layer.
///
/// Base profile: each parallel neuron owns a slot of 2N bits holding two
/// copies of its activations (copy A low, copy B high). Native profile: a
/// slot is N bits split into popcount words. Slots start at PHV bit 0. The
/// layer input sits at the top of the PHV and the folded output replaces it
/// there, so it becomes the next layer's input in place.
///
/// With one batch, sign bits overlay the low bit of each slot. With several
/// batches the input and all sign bits live in a reserved region above the
/// slots so they survive the batches that follow.
struct LayerPlan {
  std::size_t layer = 0;
  std::size_t width = 0;     // N
  std::size_t neurons = 0;
  std::size_t parallel = 0;  // P
  std::size_t batches = 0;   // B
  std::size_t first_element = 0;
  std::size_t element_count = 0;

  std::size_t slot_bits = 0;
  std::size_t word_bits = 0;  // native popcount word (== N when N <= popcnt_width)
  std::size_t count_bits = 0;  // native word-count width
  std::vector<std::size_t> slot_offsets;  // one per parallel slot
  std::vector<std::size_t> sign_offsets;  // one per neuron
  std::size_t input_offset = 0;
  std::size_t output_offset = 0;
  std::string input_field;
  std::string output_field;

  bool replicated() const { return parallel > 1; }
  bool batched() const { return batches > 1; }
  /// Highest PHV bit used by the layer, plus one.
  std::size_t phv_extent() const;
  /// Number of distinct PHV bits touched by the layer's fields.
  std::size_t phv_bits_used() const;
};

/// Chooses P and B per layer and assigns the field layout. Throws
/// CapacityError when a layer cannot be laid out in the PHV at all.
std::vector<LayerPlan> plan_parallelism(const BnnModel& model, const ChipProfile& profile);

/// Throws CapacityError when the program would exceed profile.elements_max,
/// naming the total and the per-layer breakdown.
PipelineProgram compile(const BnnModel& model, const ChipProfile& profile);

/// Alternating-group mask for tree level `level`: 2^level ones then 2^level
/// zeros, repeating from the LSB.
BitVector popcount_mask(std::size_t width, std::size_t level);

/// Two elements per tree level over slots holding two copies of an N-bit
/// value. Afterwards copy A (the low half) holds the popcount.
std::vector<ElementProgram> schedule_popcount_tree(std::size_t width, std::span<const Slice> pairs);

/// Field names used for a layer's slots and sign bits.
std::string slot_field(std::size_t layer, std::size_t slot);
std::string sign_field(std::size_t layer, std::size_t neuron);

/// Fields declared for a plan, in declaration order.
std::vector<Field> layer_fields(const LayerPlan& plan);

std::vector<ElementProgram> lower_layer_base(const LayerPlan& plan, std::span<const BitVector> weights);
std::vector<ElementProgram> lower_layer_native(const LayerPlan& plan, std::span<const BitVector> weights);

}  // namespace bnnpipe
