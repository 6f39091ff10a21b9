#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "bnnpipe/bnn_model.hpp"
#include "bnnpipe/pipeline_ir.hpp"

namespace bnnpipe {

/// Neurons whose slots fit side by side in the PHV: phv/(2N) with the
/// duplicated popcount copies, phv/N with a native popcount.
std::size_t max_parallel(std::size_t width, const ChipProfile& profile);

/// Closed-form element count of one layer compiled with P neurons per batch
/// and B batches.
std::size_t elements_for_layer(std::size_t width, std::size_t parallel, std::size_t batches,
                               const ChipProfile& profile);

struct Table1Row {
  std::size_t width = 0;
  std::size_t parallel = 0;
  std::size_t elements = 0;

  bool operator==(const Table1Row&) const = default;
};

/// Widths 16..2048 at maximum parallelism.
std::vector<Table1Row> table1(const ChipProfile& profile);

struct Throughput {
  std::uint64_t packets_per_second = 0;
  std::uint64_t inferences_per_second = 0;
  std::uint64_t neurons_per_second = 0;
};

/// Line-rate model: one inference per packet. Throws CapacityError when the
/// model does not fit the pipeline.
Throughput throughput(const BnnModel& model, const ChipProfile& profile);

struct LayerReport {
  std::size_t layer = 0;
  std::size_t width = 0;
  std::size_t neurons = 0;
  std::size_t parallel = 0;
  std::size_t batches = 0;
  std::size_t elements = 0;
  std::size_t phv_bits = 0;
};

struct ResourceReport {
  std::string model_name;
  std::string profile_name;
  std::vector<LayerReport> layers;
  std::size_t elements_used = 0;
  std::size_t elements_max = 0;
  bool feasible = false;
  std::size_t deficit = 0;
  std::size_t phv_bits = 0;
  std::size_t phv_bits_peak = 0;
  std::size_t max_ops = 0;
  std::vector<std::string> warnings;
  std::vector<std::string> internal_errors;
  Throughput throughput;  // zero when infeasible
};

/// Aggregates plan, formulas and throughput. When `compiled` is given, its
/// element spans and op counts are cross-checked against the formulas;
/// mismatches land in internal_errors.
ResourceReport report(const BnnModel& model, const ChipProfile& profile,
                      const PipelineProgram* compiled = nullptr);

std::string report_text(const ResourceReport& r);
std::string report_json(const ResourceReport& r);
std::string table1_text(const std::vector<Table1Row>& rows);
std::string table1_json(const std::vector<Table1Row>& rows);

/// Compact scientific form used in reports, e.g. 960000000 -> "9.6e8".
std::string short_sci(std::uint64_t value);

}  // namespace bnnpipe
