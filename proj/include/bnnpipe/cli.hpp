#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bnnpipe/bnn_model.hpp"
#include "bnnpipe/pipeline_ir.hpp"

namespace bnnpipe::cli {

/// Process exit statuses.
enum ExitCode : int {
  kOk = 0,
  kInternalError = 1,
  kUsageError = 2,
  kInputError = 3,     // malformed or invalid model, program, or packets file
  kCapacityError = 4,  // does not fit the chip profile
  kMismatch = 5,       // verification found a differing packet
};

struct ProfileOverrides {
  std::optional<std::size_t> elements;
  std::optional<std::size_t> phv_bits;
  std::optional<std::uint64_t> pps;
};

struct RunConfig {
  std::string command;
  std::string model_path;
  std::string program_path;
  std::string packets_path;
  std::string profile = "rmt32";
  ProfileOverrides overrides;
  std::string random_shape;
  std::uint64_t seed = 1;
  std::size_t packet_count = 0;
  bool table1 = false;
  bool json = false;
  std::string out_path;
  std::string p4_path;
  std::string trace_path;
};

/// Preset name or a JSON profile file, then overrides applied.
ChipProfile resolve_profile(const std::string& name_or_path, const ProfileOverrides& overrides);

/// "32:64,64:32" -> {(32,64),(64,32)}. Throws ParseError.
LayerShape parse_shape(const std::string& text);

/// Packets are drawn from one generator seeded with `seed`.
std::vector<BitVector> random_packets(std::uint64_t seed, std::size_t width, std::size_t count);

int cmd_compile(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_simulate(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_verify(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_report(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_generate(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Parses arguments (args[0] is the program name) and dispatches.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bnnpipe::cli
