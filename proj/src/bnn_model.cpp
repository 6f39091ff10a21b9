#include "bnnpipe/bnn_model.hpp"

#include <bit>
#include <random>
#include <stdexcept>

#include "bnnpipe/error.hpp"
#include "json.hpp"

namespace bnnpipe {

namespace {

std::string layer_name(std::size_t i) { return "layer " + std::to_string(i); }

}  // namespace

bool is_valid_layer_width(std::size_t width) {
  return width >= kMinLayerWidth && width <= kMaxLayerWidth && std::has_single_bit(width);
}

void check_shape(const LayerShape& shape) {
  if (shape.empty()) throw InvariantError("model has no layers");
  for (std::size_t i = 0; i < shape.size(); ++i) {
    const auto [inputs, neurons] = shape[i];
    if (!is_valid_layer_width(inputs)) {
      throw InvariantError(layer_name(i) + " inputs " + std::to_string(inputs) +
                           " is not a power of two in [" + std::to_string(kMinLayerWidth) + ", " +
                           std::to_string(kMaxLayerWidth) + "]");
    }
    if (neurons < 1) throw InvariantError(layer_name(i) + " has no neurons");
    if (i + 1 < shape.size()) {
      if (!is_valid_layer_width(neurons)) {
        throw InvariantError(layer_name(i) + " neurons " + std::to_string(neurons) +
                             " cannot feed the next layer (not a power of two in [" +
                             std::to_string(kMinLayerWidth) + ", " +
                             std::to_string(kMaxLayerWidth) + "])");
      }
      if (shape[i + 1].first != neurons) {
        throw InvariantError(layer_name(i + 1) + " inputs " + std::to_string(shape[i + 1].first) +
                             " != " + layer_name(i) + " neurons " + std::to_string(neurons));
      }
    }
  }
}

BnnModel::BnnModel(std::string name, std::vector<LayerSpec> layers,
                   std::vector<std::vector<BitVector>> weights)
    : name_(std::move(name)), layers_(std::move(layers)), weights_(std::move(weights)) {
  LayerShape shape;
  for (const auto& l : layers_) shape.emplace_back(l.inputs, l.neurons);
  check_shape(shape);
  if (weights_.size() != layers_.size()) {
    throw InvariantError("weights given for " + std::to_string(weights_.size()) + " layers, model has " +
                         std::to_string(layers_.size()));
  }
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (weights_[i].size() != layers_[i].neurons) {
      throw InvariantError(layer_name(i) + " has " + std::to_string(weights_[i].size()) +
                           " weight vectors, expected " + std::to_string(layers_[i].neurons));
    }
    for (std::size_t j = 0; j < weights_[i].size(); ++j) {
      if (weights_[i][j].width() != layers_[i].inputs) {
        throw InvariantError(layer_name(i) + " neuron " + std::to_string(j) + " weight width " +
                             std::to_string(weights_[i][j].width()) + " != inputs " +
                             std::to_string(layers_[i].inputs));
      }
    }
  }
}

std::size_t BnnModel::total_neurons() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.neurons;
  return n;
}

BnnModel parse_model(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("model file: ") + e.what());
  }

  try {
    if (!doc.is_object()) throw ParseError("model file: top level must be an object");
    std::string name = doc.value("name", "model");
    const auto& jlayers = doc.at("layers");
    if (!jlayers.is_array()) throw ParseError("model file: 'layers' must be an array");

    std::vector<LayerSpec> layers;
    std::vector<std::vector<BitVector>> weights;
    for (std::size_t i = 0; i < jlayers.size(); ++i) {
      const auto& jl = jlayers[i];
      LayerSpec spec{jl.at("inputs").get<std::size_t>(), jl.at("neurons").get<std::size_t>()};
      const auto& jw = jl.at("weights");
      if (!jw.is_array()) throw ParseError("model file: " + layer_name(i) + " 'weights' must be an array");
      // Shape errors are reported before weight decoding so a bad width
      // names the layer instead of a hex digit count.
      if (!is_valid_layer_width(spec.inputs)) {
        LayerShape partial;
        for (const auto& l : layers) partial.emplace_back(l.inputs, l.neurons);
        partial.emplace_back(spec.inputs, spec.neurons);
        check_shape(partial);
      }
      std::vector<BitVector> layer_weights;
      for (std::size_t j = 0; j < jw.size(); ++j) {
        try {
          layer_weights.push_back(BitVector::from_hex(jw[j].get<std::string>(), spec.inputs));
        } catch (const ParseError& e) {
          throw InvariantError(layer_name(i) + " neuron " + std::to_string(j) + ": " + e.what());
        }
      }
      layers.push_back(spec);
      weights.push_back(std::move(layer_weights));
    }
    return BnnModel(std::move(name), std::move(layers), std::move(weights));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model file: ") + e.what());
  }
}

std::string render_model(const BnnModel& model) {
  nlohmann::ordered_json doc;
  doc["name"] = model.name();
  doc["layers"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < model.layers().size(); ++i) {
    nlohmann::ordered_json jl;
    jl["inputs"] = model.layers()[i].inputs;
    jl["neurons"] = model.layers()[i].neurons;
    auto jw = nlohmann::ordered_json::array();
    for (const auto& w : model.weights(i)) jw.push_back(w.to_hex());
    jl["weights"] = std::move(jw);
    doc["layers"].push_back(std::move(jl));
  }
  return doc.dump(2) + "\n";
}

bool reference_neuron(const BitVector& x, const BitVector& w) {
  if (x.width() != w.width()) {
    throw InvariantError("activation width " + std::to_string(x.width()) + " != weight width " +
                         std::to_string(w.width()));
  }
  return 2 * xnor(x, w).popcount() >= x.width();
}

BitVector reference_layer(const BnnModel& model, std::size_t layer, const BitVector& x) {
  const auto& spec = model.layers().at(layer);
  if (x.width() != spec.inputs) {
    throw InvariantError("input width " + std::to_string(x.width()) + " != layer " +
                         std::to_string(layer) + " inputs " + std::to_string(spec.inputs));
  }
  BitVector y(spec.neurons);
  const auto& ws = model.weights(layer);
  for (std::size_t j = 0; j < spec.neurons; ++j) y.set_bit(j, reference_neuron(x, ws[j]));
  return y;
}

BitVector reference_forward(const BnnModel& model, const BitVector& x) {
  BitVector activations = x;
  for (std::size_t l = 0; l < model.layers().size(); ++l) {
    activations = reference_layer(model, l, activations);
  }
  return activations;
}

namespace {

BitVector draw_bits(std::mt19937_64& rng, std::size_t width) {
  BitVector v(width);
  for (std::size_t off = 0; off < width; off += 64) {
    const std::size_t count = std::min<std::size_t>(64, width - off);
    v.set_bits64(off, count, rng());
  }
  return v;
}

}  // namespace

BnnModel random_model(std::uint64_t seed, const LayerShape& shape, std::string name) {
  check_shape(shape);
  std::mt19937_64 rng(seed);
  std::vector<LayerSpec> layers;
  std::vector<std::vector<BitVector>> weights;
  for (const auto& [inputs, neurons] : shape) {
    layers.push_back({inputs, neurons});
    std::vector<BitVector> lw;
    lw.reserve(neurons);
    for (std::size_t j = 0; j < neurons; ++j) lw.push_back(draw_bits(rng, inputs));
    weights.push_back(std::move(lw));
  }
  return BnnModel(std::move(name), std::move(layers), std::move(weights));
}

BitVector random_bits(std::uint64_t seed, std::size_t width) {
  std::mt19937_64 rng(seed);
  return draw_bits(rng, width);
}

}  // namespace bnnpipe
