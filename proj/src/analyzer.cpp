#include "bnnpipe/analyzer.hpp"

#include <algorithm>
#include <bit>
#include <iomanip>
#include <sstream>

#include "bnnpipe/compiler.hpp"
#include "bnnpipe/error.hpp"
#include "json.hpp"

namespace bnnpipe {

namespace {

void require_width(std::size_t width) {
  if (!is_valid_layer_width(width)) {
    throw InvariantError("activation width " + std::to_string(width) + " is not a power of two in [" +
                         std::to_string(kMinLayerWidth) + ", " + std::to_string(kMaxLayerWidth) + "]");
  }
}

std::size_t log2_exact(std::size_t v) { return static_cast<std::size_t>(std::countr_zero(v)); }

}  // namespace

std::size_t max_parallel(std::size_t width, const ChipProfile& profile) {
  require_width(width);
  const std::size_t slot = profile.native_popcnt ? width : 2 * width;
  return profile.phv_bits / slot;
}

std::size_t elements_for_layer(std::size_t width, std::size_t parallel, std::size_t batches,
                               const ChipProfile& profile) {
  require_width(width);
  if (parallel == 0 || batches == 0) throw InvariantError("parallelism and batch count must be positive");
  const std::size_t replicate = parallel > 1 ? 1 : 0;
  std::size_t per_batch = 0;
  if (profile.native_popcnt) {
    const std::size_t words = std::max<std::size_t>(width / profile.popcnt_width, 1);
    // replicate, xnor, popcnt, add tree, sign
    per_batch = replicate + 1 + 1 + log2_exact(words) + 1;
  } else {
    // replicate, xnor+duplicate, two elements per tree level, sign
    per_batch = replicate + 1 + 2 * log2_exact(width) + 1;
  }
  return batches * per_batch + 1;
}

std::vector<Table1Row> table1(const ChipProfile& profile) {
  std::vector<Table1Row> rows;
  for (std::size_t n = 16; n <= 2048; n *= 2) {
    const auto p = max_parallel(n, profile);
    rows.push_back({n, p, elements_for_layer(n, p, 1, profile)});
  }
  return rows;
}

Throughput throughput(const BnnModel& model, const ChipProfile& profile) {
  std::size_t total = 0;
  for (const auto& p : plan_parallelism(model, profile)) total += p.element_count;
  if (total > profile.elements_max) {
    throw CapacityError("model " + model.name() + " needs " + std::to_string(total) + " elements, exceeds " +
                        std::to_string(profile.elements_max) + " by " +
                        std::to_string(total - profile.elements_max));
  }
  Throughput t;
  t.packets_per_second = profile.packets_per_second;
  t.inferences_per_second = profile.packets_per_second;
  t.neurons_per_second = profile.packets_per_second * model.total_neurons();
  return t;
}

ResourceReport report(const BnnModel& model, const ChipProfile& profile, const PipelineProgram* compiled) {
  ResourceReport r;
  r.model_name = model.name();
  r.profile_name = profile.name;
  r.elements_max = profile.elements_max;
  r.phv_bits = profile.phv_bits;

  std::vector<LayerPlan> plans;
  try {
    plans = plan_parallelism(model, profile);
  } catch (const CapacityError& e) {
    r.feasible = false;
    r.warnings.push_back(e.what());
    return r;
  }

  for (const auto& p : plans) {
    r.layers.push_back({p.layer, p.width, p.neurons, p.parallel, p.batches, p.element_count, p.phv_bits_used()});
    r.elements_used += p.element_count;
    r.phv_bits_peak = std::max(r.phv_bits_peak, p.phv_bits_used());
    if (p.batched()) {
      r.warnings.push_back("layer " + std::to_string(p.layer) + " split into " + std::to_string(p.batches) +
                           " batches of up to " + std::to_string(p.parallel) + " neurons");
    }
  }
  r.feasible = r.elements_used <= r.elements_max;
  if (!r.feasible) {
    r.deficit = r.elements_used - r.elements_max;
    r.warnings.push_back("needs " + std::to_string(r.elements_used) + " elements, exceeds " +
                         std::to_string(r.elements_max) + " by " + std::to_string(r.deficit));
    return r;
  }

  PipelineProgram own;
  if (!compiled) {
    own = compile(model, profile);
    compiled = &own;
  }
  if (compiled->elements.size() != r.elements_used) {
    r.internal_errors.push_back("compiled program has " + std::to_string(compiled->elements.size()) +
                                " elements, formula gives " + std::to_string(r.elements_used));
  }
  for (const auto& span : compiled->metadata.layers) {
    if (span.layer >= r.layers.size()) {
      r.internal_errors.push_back("compiled program describes unknown layer " + std::to_string(span.layer));
      continue;
    }
    const auto& expected = r.layers[span.layer];
    if (span.element_count != expected.elements || span.parallel != expected.parallel ||
        span.batches != expected.batches) {
      r.internal_errors.push_back("layer " + std::to_string(span.layer) + ": compiled span of " +
                                  std::to_string(span.element_count) + " elements (P=" +
                                  std::to_string(span.parallel) + ", B=" + std::to_string(span.batches) +
                                  ") disagrees with formula " + std::to_string(expected.elements));
    }
  }
  for (const auto& e : compiled->elements) r.max_ops = std::max(r.max_ops, e.ops.size());
  for (const auto& w : validate_program(*compiled).warnings) r.warnings.push_back(w.message);

  r.throughput.packets_per_second = profile.packets_per_second;
  r.throughput.inferences_per_second = profile.packets_per_second;
  r.throughput.neurons_per_second = profile.packets_per_second * model.total_neurons();
  return r;
}

std::string short_sci(std::uint64_t value) {
  if (value == 0) return "0";
  const std::string digits = std::to_string(value);
  std::string mantissa = digits.substr(0, 1);
  std::string rest = digits.substr(1);
  while (!rest.empty() && rest.back() == '0') rest.pop_back();
  if (!rest.empty()) mantissa += "." + rest;
  return mantissa + "e" + std::to_string(digits.size() - 1);
}

std::string report_text(const ResourceReport& r) {
  std::ostringstream os;
  os << "model " << r.model_name << "  profile " << r.profile_name << "\n";
  os << std::left << std::setw(7) << "layer" << std::setw(7) << "N" << std::setw(9) << "neurons" << std::setw(6)
     << "P" << std::setw(5) << "B" << std::setw(10) << "elements"
     << "phv_bits\n";
  for (const auto& l : r.layers) {
    os << std::setw(7) << l.layer << std::setw(7) << l.width << std::setw(9) << l.neurons << std::setw(6)
       << l.parallel << std::setw(5) << l.batches << std::setw(10) << l.elements << l.phv_bits << "\n";
  }
  os << "elements " << r.elements_used << "/" << r.elements_max;
  if (r.feasible) {
    os << " (fits)\n";
  } else {
    os << " (infeasible, exceeds " << r.elements_max << " by " << r.deficit << ")\n";
  }
  os << "phv bits peak " << r.phv_bits_peak << "/" << r.phv_bits << "\n";
  if (r.feasible) {
    os << "max ops per element " << r.max_ops << "\n";
    os << "packets/s " << short_sci(r.throughput.packets_per_second) << "\n";
    os << "inferences/s " << short_sci(r.throughput.inferences_per_second) << "\n";
    os << "neurons/s " << short_sci(r.throughput.neurons_per_second) << "\n";
    os << "(throughput is model-derived from the profile packet rate)\n";
  }
  for (const auto& w : r.warnings) os << "warning: " << w << "\n";
  for (const auto& e : r.internal_errors) os << "internal error: " << e << "\n";
  return os.str();
}

std::string report_json(const ResourceReport& r) {
  nlohmann::ordered_json j;
  j["model"] = r.model_name;
  j["profile"] = r.profile_name;
  j["layers"] = nlohmann::ordered_json::array();
  for (const auto& l : r.layers) {
    j["layers"].push_back({{"layer", l.layer},
                           {"n", l.width},
                           {"neurons", l.neurons},
                           {"p", l.parallel},
                           {"b", l.batches},
                           {"elements", l.elements},
                           {"phv_bits", l.phv_bits}});
  }
  j["elements_used"] = r.elements_used;
  j["elements_max"] = r.elements_max;
  j["feasible"] = r.feasible;
  j["deficit"] = r.deficit;
  j["phv_bits"] = r.phv_bits;
  j["phv_bits_peak"] = r.phv_bits_peak;
  j["max_ops"] = r.max_ops;
  j["throughput"] = {{"model_derived", true},
                     {"packets_per_second", r.throughput.packets_per_second},
                     {"inferences_per_second", r.throughput.inferences_per_second},
                     {"neurons_per_second", r.throughput.neurons_per_second}};
  j["warnings"] = r.warnings;
  j["internal_errors"] = r.internal_errors;
  return j.dump(2) + "\n";
}

std::string table1_text(const std::vector<Table1Row>& rows) {
  std::ostringstream os;
  os << std::left << std::setw(12) << "activations" << std::setw(10) << "parallel"
     << "elements\n";
  for (const auto& r : rows) os << std::setw(12) << r.width << std::setw(10) << r.parallel << r.elements << "\n";
  return os.str();
}

std::string table1_json(const std::vector<Table1Row>& rows) {
  auto j = nlohmann::ordered_json::array();
  for (const auto& r : rows) j.push_back({{"n", r.width}, {"parallel", r.parallel}, {"elements", r.elements}});
  return j.dump(2) + "\n";
}

}  // namespace bnnpipe
