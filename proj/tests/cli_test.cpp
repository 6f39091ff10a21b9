#include "bnnpipe/cli.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "bnnpipe/compiler.hpp"
#include "bnnpipe/ir_text.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace bnnpipe;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "bnnpipe");
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() / ("bnnpipe_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

void write(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::string write_model(const TempDir& dir, const std::string& name, const BnnModel& model) {
  const auto path = dir.file(name + ".json");
  write(path, render_model(model));
  return path;
}

std::string flagship(const TempDir& dir) {
  return write_model(dir, "flagship", random_model(7, {{32, 64}, {64, 32}}, "flagship"));
}

}  // namespace

TEST_CASE("compile") {
  TempDir dir;
  const auto model = flagship(dir);
  const auto ir = dir.file("flagship.ir");
  const auto r = invoke({"compile", "--model", model, "--out", ir});
  CHECK(r.code == cli::kOk);
  CHECK(r.out.find("elements 30/32") != std::string::npos);
  CHECK(parse_ir_text(slurp(ir)).elements.size() == 30);

  const auto p4 = dir.file("flagship.p4");
  fs::remove(ir);
  CHECK(invoke({"compile", "--model", model, "--out", ir, "--emit-p4", p4}).code == cli::kOk);
  CHECK(fs::exists(ir));
  CHECK(slurp(p4).find("control bnn_pipeline") != std::string::npos);

  const auto native = invoke({"compile", "--model", model, "--out", ir, "--profile", "rmt32-popcnt", "--json"});
  CHECK(native.code == cli::kOk);
  CHECK(nlohmann::json::parse(native.out)["profile"] == "rmt32-popcnt");
}

TEST_CASE("compile reports the deficit of an oversized model") {
  TempDir dir;
  // 16 + 12 + 12 elements
  const auto path = write_model(dir, "forty", random_model(3, {{64, 16}, {16, 16}, {16, 4}}));
  const auto ir = dir.file("forty.ir");
  const auto r = invoke({"compile", "--model", path, "--out", ir});
  CHECK(r.code == cli::kCapacityError);
  CHECK(r.err.find("needs 40 elements, exceeds 32 by 8") != std::string::npos);
  CHECK_FALSE(fs::exists(ir));

  CHECK(invoke({"compile", "--model", path, "--out", ir, "--elements", "40"}).code == cli::kOk);
}

TEST_CASE("compile rejects malformed models") {
  TempDir dir;
  const auto path = dir.file("bad.json");
  write(path, R"({"name": "bad", "layers": [{"inputs": 12, "neurons": 1, "weights": ["fff"]}]})");
  CHECK(invoke({"compile", "--model", path, "--out", dir.file("bad.ir")}).code == cli::kInputError);
  write(path, "{not json");
  CHECK(invoke({"compile", "--model", path, "--out", dir.file("bad.ir")}).code == cli::kInputError);
  CHECK(invoke({"compile", "--model", dir.file("missing.json"), "--out", dir.file("bad.ir")}).code ==
        cli::kInputError);
}

TEST_CASE("simulate") {
  TempDir dir;
  const BnnModel one("one", {{16, 1}}, {{BitVector::ones(16)}});
  const auto ir = dir.file("one.ir");
  REQUIRE(invoke({"compile", "--model", write_model(dir, "one", one), "--out", ir}).code == cli::kOk);
  const auto packets = dir.file("one.txt");
  write(packets, "ffff\n");
  const auto r = invoke({"simulate", "--program", ir, "--packets", packets});
  CHECK(r.code == cli::kOk);
  CHECK(r.out == "1\n");

  const auto model = random_model(11, {{32, 64}, {64, 32}});
  const auto flag_ir = dir.file("flag.ir");
  REQUIRE(invoke({"compile", "--model", write_model(dir, "flag", model), "--out", flag_ir}).code == cli::kOk);
  std::string text;
  std::vector<BitVector> inputs;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    inputs.push_back(random_bits(1000 + i, 32));
    text += inputs.back().to_hex() + "\n";
  }
  write(packets, text);
  const auto outputs = dir.file("out.txt");
  const auto many = invoke({"simulate", "--program", flag_ir, "--packets", packets, "--out", outputs});
  CHECK(many.code == cli::kOk);
  const auto got = lines(slurp(outputs));
  REQUIRE(got.size() == 1000);
  for (std::size_t i = 0; i < got.size(); ++i) REQUIRE(got[i] == reference_forward(model, inputs[i]).to_hex());

  const auto trace = dir.file("trace.txt");
  write(packets, inputs[0].to_hex() + "\n");
  CHECK(invoke({"simulate", "--program", flag_ir, "--packets", packets, "--trace", trace}).code == cli::kOk);
  const auto trace_lines = lines(slurp(trace));
  CHECK(std::count_if(trace_lines.begin(), trace_lines.end(),
                      [](const std::string& l) { return l.rfind("element ", 0) == 0; }) == 30);

  write(packets, "00000000\n00000001\n00000002\n00000003\n00000004\n00000005\n0000006\n");
  const auto bad = invoke({"simulate", "--program", flag_ir, "--packets", packets});
  CHECK(bad.code == cli::kInputError);
  CHECK(bad.err.find("line 7") != std::string::npos);
}

TEST_CASE("simulate rejects broken programs") {
  TempDir dir;
  const auto ir = dir.file("bad.ir");
  const auto packets = dir.file("p.txt");
  write(packets, "ff\n");
  write(ir, "profile rmt32 elements=32 phv=4096 pps=960000000\nfield a 0 8\nfield b 8 8\ninput a\noutput b\n"
            "element 0\n  mul b <- a\n");
  const auto r = invoke({"simulate", "--program", ir, "--packets", packets});
  CHECK(r.code == cli::kInputError);
  CHECK(r.err.find("unknown opcode mul at line 7") != std::string::npos);

  write(ir, "profile rmt32 elements=32 phv=4096 pps=960000000\nfield a 0 8\nfield b 8 8\ninput a\noutput b\n"
            "element 0\n  popcnt b[0:4] <- a\n");
  CHECK(invoke({"simulate", "--program", ir, "--packets", packets}).code == cli::kInputError);
}

TEST_CASE("verify") {
  TempDir dir;
  const auto model = flagship(dir);
  const auto r = invoke({"verify", "--model", model, "--packets", "1000", "--seed", "3"});
  CHECK(r.code == cli::kOk);
  CHECK(r.out.find("1000/1000 match") != std::string::npos);
  CHECK(r.out.find("seed 3") != std::string::npos);
  CHECK(invoke({"verify", "--model", model, "--packets", "1000", "--seed", "3"}).out == r.out);

  const auto zero = invoke({"verify", "--model", model, "--packets", "0"});
  CHECK(zero.code == cli::kOk);
  CHECK(zero.out.find("0/0 match") != std::string::npos);

  const auto random = invoke({"verify", "--random", "64:16,16:8", "--packets", "200", "--profile", "rmt32-popcnt"});
  CHECK(random.code == cli::kOk);
  CHECK(random.out.find("200/200 match") != std::string::npos);

  // Flip one weight bit in the first XNORC immediate of the compiled IR.
  const auto ir = dir.file("flagship.ir");
  REQUIRE(invoke({"compile", "--model", model, "--out", ir}).code == cli::kOk);
  auto prog = parse_ir_text(slurp(ir));
  auto& imm = prog.elements[1].ops[0].imm;
  imm.set_bit(0, !imm.bit(0));
  imm.set_bit(32, !imm.bit(32));
  write(ir, render_ir_text(prog));
  const auto bad = invoke({"verify", "--model", model, "--program", ir, "--packets", "1000"});
  CHECK(bad.code == cli::kMismatch);
  CHECK(bad.out.find("first mismatch: packet") != std::string::npos);
  CHECK(bad.out.find("1000/1000") == std::string::npos);

  CHECK(invoke({"verify", "--packets", "10"}).code == cli::kInputError);
}

TEST_CASE("report") {
  TempDir dir;
  const auto table = invoke({"report", "--table1"});
  CHECK(table.code == cli::kOk);
  const auto rows = lines(table.out);
  REQUIRE(rows.size() == 9);
  const std::size_t expected[8][3] = {{16, 128, 12}, {32, 64, 14},  {64, 32, 16}, {128, 16, 18},
                                      {256, 8, 20},  {512, 4, 22},  {1024, 2, 24}, {2048, 1, 25}};
  for (std::size_t i = 0; i < 8; ++i) {
    std::istringstream in(rows[i + 1]);
    std::size_t n = 0, p = 0, e = 0;
    in >> n >> p >> e;
    CHECK(n == expected[i][0]);
    CHECK(p == expected[i][1]);
    CHECK(e == expected[i][2]);
  }
  CHECK(nlohmann::json::parse(invoke({"report", "--table1", "--json"}).out).size() == 8);

  const auto flag = invoke({"report", "--model", flagship(dir)});
  CHECK(flag.code == cli::kOk);
  CHECK(flag.out.find("elements 30/32") != std::string::npos);
  CHECK(flag.out.find("inferences/s 9.6e8") != std::string::npos);

  const auto single = invoke({"report", "--model", write_model(dir, "single", random_model(1, {{2048, 1}}))});
  CHECK(single.out.find("neurons/s 9.6e8") != std::string::npos);

  const auto json = invoke({"report", "--model", flagship(dir), "--json"});
  const auto j = nlohmann::json::parse(json.out);
  CHECK(j["elements_used"] == 30);
  CHECK(j["throughput"]["neurons_per_second"] == 960'000'000ull * 96);

  const auto big = invoke({"report", "--model", write_model(dir, "big", random_model(3, {{64, 16}, {16, 16}, {16, 4}}))});
  CHECK(big.code == cli::kCapacityError);
  CHECK(big.out.find("exceeds 32 by 8") != std::string::npos);

  const auto slower = invoke({"report", "--model", flagship(dir), "--pps", "100000000"});
  CHECK(slower.out.find("inferences/s 1e8") != std::string::npos);
}

TEST_CASE("profile files") {
  TempDir dir;
  const auto path = dir.file("chip.json");
  write(path, R"({"name": "chip", "elements": 12, "native_popcnt": true, "popcnt_width": 16})");
  const auto p = cli::resolve_profile(path, {});
  CHECK(p.name == "chip");
  CHECK(p.elements_max == 12);
  CHECK(p.native_popcnt);
  CHECK(p.popcnt_width == 16);
  CHECK(p.phv_bits == 4096);
  CHECK(cli::resolve_profile("rmt32", {.elements = 64}).elements_max == 64);
  CHECK(invoke({"report", "--table1", "--profile", "nope"}).code == cli::kInputError);
}

TEST_CASE("generate and shape parsing") {
  CHECK(cli::parse_shape("32:64,64:32") == LayerShape{{32, 64}, {64, 32}});
  CHECK_THROWS(cli::parse_shape("32-64"));
  const auto a = invoke({"generate", "--shape", "16:4", "--seed", "9"});
  CHECK(a.code == cli::kOk);
  CHECK(a.out == invoke({"generate", "--shape", "16:4", "--seed", "9"}).out);
  CHECK(parse_model(a.out).layers().size() == 1);
}

TEST_CASE("usage errors") {
  CHECK(invoke({}).code == cli::kUsageError);
  CHECK(invoke({"frobnicate"}).code == cli::kUsageError);
  CHECK(invoke({"compile", "--model"}).code == cli::kUsageError);
  CHECK(invoke({"verify", "--packets", "many"}).code == cli::kUsageError);
  CHECK(invoke({"--help"}).code == cli::kOk);
}
