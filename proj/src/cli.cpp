#include "bnnpipe/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "bnnpipe/analyzer.hpp"
#include "bnnpipe/compiler.hpp"
#include "bnnpipe/error.hpp"
#include "bnnpipe/ir_text.hpp"
#include "bnnpipe/p4_render.hpp"
#include "bnnpipe/simulator.hpp"
#include "json.hpp"

namespace bnnpipe::cli {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path);
  out << content;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::string trimmed(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

// Shared error-to-exit-code mapping for every command.
template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const InvariantError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const InvalidProgramError& e) {
    err << "error: " << e.what();
    return kInputError;
  } catch (const CapacityError& e) {
    err << "error: " << e.what() << "\n";
    return kCapacityError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternalError;
  }
}

BnnModel load_model(const std::string& path) { return parse_model(read_file(path)); }

PipelineProgram load_program(const std::string& path) { return parse_ir_text(read_file(path)); }

}  // namespace

ChipProfile resolve_profile(const std::string& name_or_path, const ProfileOverrides& overrides) {
  ChipProfile p;
  if (name_or_path == "rmt32" || name_or_path == "rmt32-popcnt") {
    p = ChipProfile::by_name(name_or_path);
  } else if (std::filesystem::exists(name_or_path)) {
    try {
      const auto j = nlohmann::json::parse(read_file(name_or_path));
      p.name = j.value("name", std::filesystem::path(name_or_path).stem().string());
      p.elements_max = j.value("elements", p.elements_max);
      p.phv_bits = j.value("phv_bits", p.phv_bits);
      p.ops_warn_threshold = j.value("ops_warn", p.ops_warn_threshold);
      p.packets_per_second = j.value("pps", p.packets_per_second);
      p.native_popcnt = j.value("native_popcnt", p.native_popcnt);
      p.popcnt_width = j.value("popcnt_width", p.popcnt_width);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("profile file " + name_or_path + ": " + e.what());
    }
  } else {
    throw InvariantError("unknown profile '" + name_or_path + "' (expected rmt32, rmt32-popcnt, or a profile file)");
  }
  if (overrides.elements) p.elements_max = *overrides.elements;
  if (overrides.phv_bits) p.phv_bits = *overrides.phv_bits;
  if (overrides.pps) p.packets_per_second = *overrides.pps;
  p.check();
  return p;
}

LayerShape parse_shape(const std::string& text) {
  LayerShape shape;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto colon = item.find(':');
    try {
      if (colon == std::string::npos) throw std::invalid_argument("missing ':'");
      std::size_t used = 0;
      const auto inputs = std::stoul(item.substr(0, colon), &used);
      const auto neurons = std::stoul(item.substr(colon + 1));
      shape.emplace_back(inputs, neurons);
    } catch (const std::exception&) {
      throw ParseError("malformed layer shape '" + item + "', expected <inputs>:<neurons>");
    }
  }
  if (shape.empty()) throw ParseError("empty layer shape");
  return shape;
}

std::vector<BitVector> random_packets(std::uint64_t seed, std::size_t width, std::size_t count) {
  std::mt19937_64 rng(seed);
  std::vector<BitVector> packets;
  packets.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    BitVector v(width);
    for (std::size_t off = 0; off < width; off += 64) v.set_bits64(off, std::min<std::size_t>(64, width - off), rng());
    packets.push_back(std::move(v));
  }
  return packets;
}

int cmd_compile(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto profile = resolve_profile(config.profile, config.overrides);
    const auto model = load_model(config.model_path);
    const auto prog = compile(model, profile);
    write_file(config.out_path, render_ir_text(prog));
    if (!config.p4_path.empty()) write_file(config.p4_path, render_p4(prog));
    const auto r = report(model, profile, &prog);
    out << (config.json ? report_json(r) : report_text(r));
    return r.internal_errors.empty() ? kOk : kInternalError;
  });
}

int cmd_simulate(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Simulator sim(load_program(config.program_path));
    const auto& prog = sim.program();
    const std::size_t width = prog.find_field(prog.input_field)->width;

    std::ostringstream outputs;
    std::ostringstream trace_text;
    const auto lines = lines_of(read_file(config.packets_path));
    std::size_t packet = 0;
    for (std::size_t i = 0; i < lines.size(); ++i) {
      const auto hex = trimmed(lines[i]);
      if (hex.empty()) continue;
      BitVector input;
      try {
        input = BitVector::from_hex(hex, width);
      } catch (const ParseError& e) {
        throw ParseError(std::string("packets file: ") + e.what(), i + 1);
      }
      Trace trace;
      const auto y = sim.run(input, config.trace_path.empty() ? nullptr : &trace);
      outputs << y.to_hex() << "\n";
      if (!config.trace_path.empty()) {
        trace_text << "packet " << packet << " input 0x" << input.to_hex() << "\n";
        for (const auto& el : trace.elements) {
          trace_text << "element " << el.index << "\n";
          for (const auto& w : el.writes) {
            trace_text << "  " << w.dst.field << "[" << w.dst.offset << ":" << w.dst.width << "] @" << w.write.offset
                       << " = 0x" << w.write.value.to_hex() << "\n";
          }
        }
        trace_text << "output 0x" << trace.output.to_hex() << "\n";
      }
      ++packet;
    }
    if (config.out_path.empty()) {
      out << outputs.str();
    } else {
      write_file(config.out_path, outputs.str());
      out << packet << " packets simulated\n";
    }
    if (!config.trace_path.empty()) write_file(config.trace_path, trace_text.str());
    return kOk;
  });
}

int cmd_verify(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto profile = resolve_profile(config.profile, config.overrides);
    if (config.model_path.empty() == config.random_shape.empty()) {
      throw InvariantError("verify needs exactly one of --model or --random");
    }
    const auto model = config.model_path.empty() ? random_model(config.seed, parse_shape(config.random_shape))
                                                 : load_model(config.model_path);
    const auto prog = config.program_path.empty() ? compile(model, profile) : load_program(config.program_path);
    const Simulator sim(prog);

    out << "verify model " << model.name() << " profile " << prog.profile.name << " elements "
        << prog.elements.size() << "/" << prog.profile.elements_max << " seed " << config.seed << "\n";
    // Packets use a generator distinct from the one that drew --random weights.
    const auto packets = random_packets(config.seed ^ 0x9e3779b97f4a7c15ULL, model.input_width(), config.packet_count);
    std::size_t matched = 0;
    std::optional<std::size_t> first_bad;
    BitVector expected_bad;
    BitVector actual_bad;
    for (std::size_t i = 0; i < packets.size(); ++i) {
      const auto expected = reference_forward(model, packets[i]);
      const auto actual = sim.run(packets[i]);
      if (expected == actual) {
        ++matched;
      } else if (!first_bad) {
        first_bad = i;
        expected_bad = expected;
        actual_bad = actual;
      }
    }
    out << matched << "/" << packets.size() << " match\n";
    if (first_bad) {
      out << "first mismatch: packet " << *first_bad << " input 0x" << packets[*first_bad].to_hex() << " expected 0x"
          << expected_bad.to_hex() << " actual 0x" << actual_bad.to_hex() << "\n";
      return kMismatch;
    }
    return kOk;
  });
}

int cmd_report(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto profile = resolve_profile(config.profile, config.overrides);
    if (config.table1) {
      const auto rows = table1(profile);
      out << (config.json ? table1_json(rows) : table1_text(rows));
      return kOk;
    }
    if (config.model_path.empty()) throw InvariantError("report needs --model or --table1");
    const auto r = report(load_model(config.model_path), profile);
    out << (config.json ? report_json(r) : report_text(r));
    if (!r.internal_errors.empty()) return kInternalError;
    return r.feasible ? kOk : kCapacityError;
  });
}

int cmd_generate(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto model = random_model(config.seed, parse_shape(config.random_shape),
                                    config.out_path.empty() ? "random" : std::filesystem::path(config.out_path).stem().string());
    const auto text = render_model(model);
    if (config.out_path.empty()) {
      out << text;
    } else {
      write_file(config.out_path, text);
    }
    return kOk;
  });
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Compile binarized neural networks onto a match-action pipeline model"};
  app.require_subcommand(1);
  RunConfig config;

  auto add_profile = [&](CLI::App* sub) {
    sub->add_option("--profile", config.profile, "rmt32, rmt32-popcnt, or a JSON profile file")
        ->capture_default_str();
    sub->add_option("--elements", config.overrides.elements, "override the element count");
    sub->add_option("--phv-bits", config.overrides.phv_bits, "override the PHV size in bits");
    sub->add_option("--pps", config.overrides.pps, "override the packet rate");
  };

  auto* compile_cmd = app.add_subcommand("compile", "lower a model file to pipeline IR");
  compile_cmd->add_option("--model", config.model_path, "model file")->required();
  compile_cmd->add_option("--out", config.out_path, "IR output file")->required();
  compile_cmd->add_option("--emit-p4", config.p4_path, "also write a P4-flavored rendering");
  compile_cmd->add_flag("--json", config.json, "print the resource report as JSON");
  add_profile(compile_cmd);

  auto* simulate_cmd = app.add_subcommand("simulate", "run packets through an IR program");
  simulate_cmd->add_option("--program", config.program_path, "IR file")->required();
  simulate_cmd->add_option("--packets", config.packets_path, "packets file, one hex string per line")->required();
  simulate_cmd->add_option("--out", config.out_path, "outputs file (default: stdout)");
  simulate_cmd->add_option("--trace", config.trace_path, "per-element trace file");

  auto* verify_cmd = app.add_subcommand("verify", "compare compiled execution with the reference forward pass");
  verify_cmd->add_option("--model", config.model_path, "model file");
  verify_cmd->add_option("--random", config.random_shape, "random model shape, e.g. 32:64,64:32");
  verify_cmd->add_option("--program", config.program_path, "verify this IR instead of compiling");
  verify_cmd->add_option("--packets", config.packet_count, "number of random packets")->required();
  verify_cmd->add_option("--seed", config.seed, "seed for packets and --random weights")->capture_default_str();
  add_profile(verify_cmd);

  auto* report_cmd = app.add_subcommand("report", "resource and throughput report");
  report_cmd->add_option("--model", config.model_path, "model file");
  report_cmd->add_flag("--table1", config.table1, "element counts and parallelism for N = 16..2048");
  report_cmd->add_flag("--json", config.json, "machine-readable output");
  add_profile(report_cmd);

  auto* generate_cmd = app.add_subcommand("generate", "write a random model file");
  generate_cmd->add_option("--shape", config.random_shape, "layer shape, e.g. 32:64,64:32")->required();
  generate_cmd->add_option("--seed", config.seed, "weight seed")->capture_default_str();
  generate_cmd->add_option("--out", config.out_path, "model file (default: stdout)");

  std::vector<char*> argv;
  std::vector<std::string> storage(args);
  if (storage.empty()) storage.emplace_back("bnnpipe");
  for (auto& a : storage) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  if (compile_cmd->parsed()) return cmd_compile(config, out, err);
  if (simulate_cmd->parsed()) return cmd_simulate(config, out, err);
  if (verify_cmd->parsed()) return cmd_verify(config, out, err);
  if (report_cmd->parsed()) return cmd_report(config, out, err);
  if (generate_cmd->parsed()) return cmd_generate(config, out, err);
  return kUsageError;
}

}  // namespace bnnpipe::cli
