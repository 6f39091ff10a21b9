#include "bnnpipe/compiler.hpp"

#include <algorithm>
#include <bit>
#include <sstream>
#include <stdexcept>

#include "bnnpipe/analyzer.hpp"
#include "bnnpipe/error.hpp"

namespace bnnpipe {

namespace {

std::size_t log2_exact(std::size_t v) { return static_cast<std::size_t>(std::countr_zero(v)); }

std::string output_field_name(std::size_t layer) { return "l" + std::to_string(layer) + "_out"; }

constexpr const char* kInputField = "in";

Slice sub(const Slice& s, std::size_t offset, std::size_t width) {
  return {s.field, s.offset + offset, width};
}

}  // namespace

std::string slot_field(std::size_t layer, std::size_t slot) {
  return "l" + std::to_string(layer) + "_slot" + std::to_string(slot);
}

std::string sign_field(std::size_t layer, std::size_t neuron) {
  return "l" + std::to_string(layer) + "_sign" + std::to_string(neuron);
}

std::size_t LayerPlan::phv_extent() const {
  std::size_t end = std::max(input_offset + width, output_offset + neurons);
  if (!slot_offsets.empty()) end = std::max(end, slot_offsets.back() + slot_bits);
  for (auto s : sign_offsets) end = std::max(end, s + 1);
  return end;
}

std::size_t LayerPlan::phv_bits_used() const {
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  ranges.emplace_back(input_offset, input_offset + width);
  ranges.emplace_back(output_offset, output_offset + neurons);
  for (auto s : slot_offsets) ranges.emplace_back(s, s + slot_bits);
  for (auto s : sign_offsets) ranges.emplace_back(s, s + 1);
  std::sort(ranges.begin(), ranges.end());
  std::size_t used = 0;
  std::size_t covered = 0;
  for (const auto& [b, e] : ranges) {
    const auto start = std::max(b, covered);
    if (e > start) used += e - start;
    covered = std::max(covered, e);
  }
  return used;
}

std::vector<LayerPlan> plan_parallelism(const BnnModel& model, const ChipProfile& profile) {
  profile.check();
  const std::size_t phv = profile.phv_bits;
  std::vector<LayerPlan> plans;
  std::size_t next_element = 0;

  for (std::size_t l = 0; l < model.layers().size(); ++l) {
    const auto& spec = model.layers()[l];
    LayerPlan plan;
    plan.layer = l;
    plan.width = spec.inputs;
    plan.neurons = spec.neurons;
    const std::size_t n = spec.inputs;
    plan.slot_bits = profile.native_popcnt ? n : 2 * n;

    const std::size_t cap = max_parallel(n, profile);
    if (cap == 0 || spec.neurons > phv) {
      throw CapacityError("layer " + std::to_string(l) + " (N=" + std::to_string(n) +
                          ") does not fit a " + std::to_string(phv) + "-bit phv");
    }
    if (spec.neurons <= cap) {
      plan.parallel = spec.neurons;
      plan.batches = 1;
    } else {
      // Later batches need the input and earlier sign bits intact, so they
      // are reserved above the slots.
      for (std::size_t b = 2; b <= spec.neurons; ++b) {
        const std::size_t p = (spec.neurons + b - 1) / b;
        if (p * plan.slot_bits + n + spec.neurons <= phv) {
          plan.parallel = p;
          plan.batches = (spec.neurons + p - 1) / p;
          break;
        }
      }
      if (plan.parallel == 0) {
        throw CapacityError("layer " + std::to_string(l) + " (N=" + std::to_string(n) + ", " +
                            std::to_string(spec.neurons) +
                            " neurons) cannot keep its input and sign bits live across batches in a " +
                            std::to_string(phv) + "-bit phv");
      }
    }

    if (profile.native_popcnt) {
      plan.word_bits = std::min(n, profile.popcnt_width);
      plan.count_bits = static_cast<std::size_t>(std::bit_width(n));
      if (plan.count_bits > plan.word_bits) {
        throw CapacityError("layer " + std::to_string(l) + ": popcount width " +
                            std::to_string(profile.popcnt_width) + " cannot hold a " +
                            std::to_string(plan.count_bits) + "-bit count for N=" + std::to_string(n));
      }
    }

    for (std::size_t j = 0; j < plan.parallel; ++j) plan.slot_offsets.push_back(j * plan.slot_bits);
    plan.input_offset = phv - n;
    plan.output_offset = phv - spec.neurons;
    for (std::size_t k = 0; k < spec.neurons; ++k) {
      plan.sign_offsets.push_back(plan.batched() ? phv - n - spec.neurons + k
                                                 : plan.slot_offsets[k]);
    }
    plan.input_field = l == 0 ? kInputField : output_field_name(l - 1);
    plan.output_field = output_field_name(l);
    plan.first_element = next_element;
    plan.element_count = elements_for_layer(n, plan.parallel, plan.batches, profile);
    next_element += plan.element_count;
    plans.push_back(std::move(plan));
  }
  return plans;
}

BitVector popcount_mask(std::size_t width, std::size_t level) {
  const std::size_t group = std::size_t{1} << level;
  BitVector mask(width);
  for (std::size_t i = 0; i < width; ++i) {
    if ((i / group) % 2 == 0) mask.set_bit(i);
  }
  return mask;
}

std::vector<ElementProgram> schedule_popcount_tree(std::size_t width, std::span<const Slice> pairs) {
  std::vector<ElementProgram> out;
  for (std::size_t level = 0; level < log2_exact(width); ++level) {
    const auto mask = popcount_mask(width, level);
    ElementProgram split;
    ElementProgram sum;
    for (const auto& pair : pairs) {
      const auto a = sub(pair, 0, width);
      const auto b = sub(pair, width, width);
      split.ops.push_back(ops::andc(a, a, mask));
      split.ops.push_back(ops::shrandc(b, b, std::size_t{1} << level, mask));
      sum.ops.push_back(ops::add(a, a, b));
      sum.ops.push_back(ops::add(b, a, b));
    }
    out.push_back(std::move(split));
    out.push_back(std::move(sum));
  }
  return out;
}

std::vector<Field> layer_fields(const LayerPlan& plan) {
  std::vector<Field> fields;
  for (std::size_t j = 0; j < plan.parallel; ++j) {
    fields.push_back({slot_field(plan.layer, j), plan.slot_offsets[j], plan.slot_bits});
  }
  for (std::size_t k = 0; k < plan.neurons; ++k) {
    fields.push_back({sign_field(plan.layer, k), plan.sign_offsets[k], 1});
  }
  fields.push_back({plan.output_field, plan.output_offset, plan.neurons});
  return fields;
}

namespace {

Slice whole(const std::string& id, std::size_t width) { return {id, 0, width}; }

ElementProgram fold_element(const LayerPlan& plan) {
  std::vector<Slice> signs;
  for (std::size_t k = 0; k < plan.neurons; ++k) signs.push_back(whole(sign_field(plan.layer, k), 1));
  ElementProgram e;
  e.ops.push_back(ops::fold(whole(plan.output_field, plan.neurons), std::move(signs)));
  return e;
}

void check_weights(const LayerPlan& plan, std::span<const BitVector> weights) {
  if (weights.size() != plan.neurons) {
    throw InvariantError("layer " + std::to_string(plan.layer) + ": " + std::to_string(weights.size()) +
                         " weight vectors for " + std::to_string(plan.neurons) + " neurons");
  }
  for (const auto& w : weights) {
    if (w.width() != plan.width) throw InvariantError("layer " + std::to_string(plan.layer) + ": weight width mismatch");
  }
}

}  // namespace

std::vector<ElementProgram> lower_layer_base(const LayerPlan& plan, std::span<const BitVector> weights) {
  check_weights(plan, weights);
  const std::size_t n = plan.width;
  const auto input = whole(plan.input_field, n);
  std::vector<ElementProgram> out;

  for (std::size_t b = 0; b < plan.batches; ++b) {
    const std::size_t first = b * plan.parallel;
    const std::size_t count = std::min(plan.parallel, plan.neurons - first);
    std::vector<Slice> pairs;
    for (std::size_t j = 0; j < count; ++j) pairs.push_back(whole(slot_field(plan.layer, j), 2 * n));

    if (plan.replicated()) {
      ElementProgram replicate;
      for (const auto& p : pairs) replicate.ops.push_back(ops::repl(p, input));
      out.push_back(std::move(replicate));
    }

    ElementProgram xnor_dup;
    for (std::size_t j = 0; j < count; ++j) {
      const auto& w = weights[first + j];
      if (plan.replicated()) {
        xnor_dup.ops.push_back(ops::xnorc(pairs[j], pairs[j], w.repeat(2)));
      } else {
        xnor_dup.ops.push_back(ops::xnorc(sub(pairs[j], 0, n), input, w));
        xnor_dup.ops.push_back(ops::xnorc(sub(pairs[j], n, n), input, w));
      }
    }
    out.push_back(std::move(xnor_dup));

    auto tree = schedule_popcount_tree(n, pairs);
    out.insert(out.end(), std::make_move_iterator(tree.begin()), std::make_move_iterator(tree.end()));

    ElementProgram sign;
    for (std::size_t j = 0; j < count; ++j) {
      sign.ops.push_back(ops::gec(whole(sign_field(plan.layer, first + j), 1), sub(pairs[j], 0, n), n / 2));
    }
    out.push_back(std::move(sign));
  }
  out.push_back(fold_element(plan));
  return out;
}

std::vector<ElementProgram> lower_layer_native(const LayerPlan& plan, std::span<const BitVector> weights) {
  check_weights(plan, weights);
  const std::size_t n = plan.width;
  const std::size_t w = plan.word_bits;
  const std::size_t c = plan.count_bits;
  const std::size_t words = n / w;
  const auto input = whole(plan.input_field, n);
  std::vector<ElementProgram> out;

  for (std::size_t b = 0; b < plan.batches; ++b) {
    const std::size_t first = b * plan.parallel;
    const std::size_t count = std::min(plan.parallel, plan.neurons - first);
    std::vector<Slice> slots;
    for (std::size_t j = 0; j < count; ++j) slots.push_back(whole(slot_field(plan.layer, j), n));

    if (plan.replicated()) {
      ElementProgram replicate;
      for (const auto& s : slots) replicate.ops.push_back(ops::copy(s, input));
      out.push_back(std::move(replicate));
    }

    ElementProgram xnor_words;
    for (std::size_t j = 0; j < count; ++j) {
      const auto& src = plan.replicated() ? slots[j] : input;
      for (std::size_t k = 0; k < words; ++k) {
        xnor_words.ops.push_back(
            ops::xnorc(sub(slots[j], k * w, w), sub(src, k * w, w), weights[first + j].slice(k * w, w)));
      }
    }
    out.push_back(std::move(xnor_words));

    ElementProgram count_words;
    for (const auto& s : slots) {
      for (std::size_t k = 0; k < words; ++k) count_words.ops.push_back(ops::popcnt(sub(s, k * w, c), sub(s, k * w, w)));
    }
    out.push_back(std::move(count_words));

    for (std::size_t stride = 1; stride < words; stride *= 2) {
      ElementProgram level;
      for (const auto& s : slots) {
        for (std::size_t k = 0; k + stride < words; k += 2 * stride) {
          const auto dst = sub(s, k * w, c);
          level.ops.push_back(ops::add(dst, dst, sub(s, (k + stride) * w, c)));
        }
      }
      out.push_back(std::move(level));
    }

    ElementProgram sign;
    for (std::size_t j = 0; j < count; ++j) {
      sign.ops.push_back(ops::gec(whole(sign_field(plan.layer, first + j), 1), sub(slots[j], 0, c), n / 2));
    }
    out.push_back(std::move(sign));
  }
  out.push_back(fold_element(plan));
  return out;
}

PipelineProgram compile(const BnnModel& model, const ChipProfile& profile) {
  const auto plans = plan_parallelism(model, profile);

  std::size_t total = 0;
  for (const auto& p : plans) total += p.element_count;
  if (total > profile.elements_max) {
    std::ostringstream os;
    os << "model " << model.name() << " needs " << total << " elements, exceeds "
       << profile.elements_max << " by " << total - profile.elements_max << " (";
    for (std::size_t i = 0; i < plans.size(); ++i) {
      os << (i ? ", " : "") << "layer " << i << ": " << plans[i].element_count;
    }
    os << ")";
    throw CapacityError(os.str());
  }

  PipelineProgram prog;
  prog.profile = profile;
  prog.metadata.model_name = model.name();
  prog.fields.push_back({kInputField, plans.front().input_offset, model.input_width()});
  prog.input_field = kInputField;
  prog.output_field = plans.back().output_field;

  for (const auto& plan : plans) {
    auto fields = layer_fields(plan);
    prog.fields.insert(prog.fields.end(), fields.begin(), fields.end());

    const auto& weights = model.weights(plan.layer);
    auto elements = profile.native_popcnt ? lower_layer_native(plan, weights) : lower_layer_base(plan, weights);
    if (elements.size() != plan.element_count) {
      throw std::logic_error("layer " + std::to_string(plan.layer) + " lowered to " +
                             std::to_string(elements.size()) + " elements, plan expects " +
                             std::to_string(plan.element_count));
    }
    prog.elements.insert(prog.elements.end(), std::make_move_iterator(elements.begin()),
                         std::make_move_iterator(elements.end()));
    prog.metadata.layers.push_back(
        {plan.layer, plan.first_element, plan.element_count, plan.width, plan.parallel, plan.batches});
  }

  const auto validation = validate_program(prog);
  if (!validation.ok()) throw std::logic_error("compiled program failed validation:\n" + validation.summary());
  return prog;
}

}  // namespace bnnpipe
