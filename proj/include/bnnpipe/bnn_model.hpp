#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bnnpipe/bit_vector.hpp"

namespace bnnpipe {

inline constexpr std::size_t kMinLayerWidth = 4;
inline constexpr std::size_t kMaxLayerWidth = 2048;

bool is_valid_layer_width(std::size_t width);

struct LayerSpec {
  std::size_t inputs = 0;
  std::size_t neurons = 0;

  bool operator==(const LayerSpec&) const = default;
};

/// A fully-connected binarized network. Bit 1 encodes +1 and bit 0 encodes
/// -1. Weight bit i of neuron j multiplies activation bit i; neuron j of a
/// layer produces bit j of that layer's output.
class BnnModel {
 public:
  /// Throws InvariantError naming the offending layer/neuron.
  BnnModel(std::string name, std::vector<LayerSpec> layers,
           std::vector<std::vector<BitVector>> weights);

  const std::string& name() const { return name_; }
  const std::vector<LayerSpec>& layers() const { return layers_; }
  const std::vector<BitVector>& weights(std::size_t layer) const { return weights_.at(layer); }
  std::size_t input_width() const { return layers_.front().inputs; }
  std::size_t output_width() const { return layers_.back().neurons; }
  std::size_t total_neurons() const;

  bool operator==(const BnnModel&) const = default;

 private:
  std::string name_;
  std::vector<LayerSpec> layers_;
  std::vector<std::vector<BitVector>> weights_;
};

using LayerShape = std::vector<std::pair<std::size_t, std::size_t>>;

/// Checks a list of (inputs, neurons) pairs against the model invariants.
void check_shape(const LayerShape& shape);

/// Parses the JSON model file format. Throws ParseError on malformed text and
/// InvariantError on shape or weight violations.
BnnModel parse_model(std::string_view text);
std::string render_model(const BnnModel& model);

/// 1 iff popcount(xnor(x, w)) >= N/2.
bool reference_neuron(const BitVector& x, const BitVector& w);
BitVector reference_layer(const BnnModel& model, std::size_t layer, const BitVector& x);
BitVector reference_forward(const BnnModel& model, const BitVector& x);

/// Deterministic for a given seed; weight bits are uniform.
BnnModel random_model(std::uint64_t seed, const LayerShape& shape, std::string name = "random");
BitVector random_bits(std::uint64_t seed, std::size_t width);

}  // namespace bnnpipe
