#include "bnnpipe/ir_text.hpp"

#include <charconv>
#include <sstream>
#include <vector>

#include "bnnpipe/error.hpp"

namespace bnnpipe {

namespace {

constexpr std::size_t kDefaultOpsThreshold = 224;

std::string slice_text(const PipelineProgram& prog, const Slice& s) {
  const Field* f = prog.find_field(s.field);
  if (f && s.offset == 0 && s.width == f->width) return s.field;
  return s.field + "[" + std::to_string(s.offset) + ":" + std::to_string(s.width) + "]";
}

std::string hex_text(const BitVector& v) { return "0x" + v.to_hex(); }

}  // namespace

std::string render_ir_text(const PipelineProgram& prog) {
  std::ostringstream os;
  const auto& p = prog.profile;
  os << "profile " << p.name << " elements=" << p.elements_max << " phv=" << p.phv_bits
     << " pps=" << p.packets_per_second;
  if (p.ops_warn_threshold != kDefaultOpsThreshold) os << " ops=" << p.ops_warn_threshold;
  if (p.native_popcnt) os << " popcnt=" << p.popcnt_width;
  os << "\n";

  if (!prog.metadata.model_name.empty()) os << "model " << prog.metadata.model_name << "\n";
  for (const auto& l : prog.metadata.layers) {
    os << "layer " << l.layer << " first=" << l.first_element << " count=" << l.element_count
       << " n=" << l.width << " p=" << l.parallel << " b=" << l.batches << "\n";
  }
  for (const auto& f : prog.fields) os << "field " << f.id << " " << f.offset << " " << f.width << "\n";
  os << "input " << prog.input_field << "\n";
  os << "output " << prog.output_field << "\n";

  for (std::size_t e = 0; e < prog.elements.size(); ++e) {
    os << "element " << e << "\n";
    for (const auto& op : prog.elements[e].ops) {
      os << "  " << opcode_name(op.opcode) << " " << slice_text(prog, op.dst) << " <- ";
      switch (op.opcode) {
        case Opcode::Copy:
        case Opcode::Repl:
        case Opcode::Popcnt:
          os << slice_text(prog, op.srcs.at(0));
          break;
        case Opcode::XnorC:
        case Opcode::AndC:
          os << slice_text(prog, op.srcs.at(0)) << ", " << hex_text(op.imm);
          break;
        case Opcode::ShrAndC:
          os << slice_text(prog, op.srcs.at(0)) << " >> " << op.shift << ", " << hex_text(op.imm);
          break;
        case Opcode::GeC:
          os << slice_text(prog, op.srcs.at(0)) << ", " << op.threshold;
          break;
        case Opcode::Add:
        case Opcode::Fold:
          for (std::size_t k = 0; k < op.srcs.size(); ++k) {
            if (k) os << ", ";
            os << slice_text(prog, op.srcs[k]);
          }
          break;
      }
      os << "\n";
    }
  }
  return os.str();
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::string_view> split_commas(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == ',') {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

class IrParser {
 public:
  explicit IrParser(std::string_view text) : text_(text) {}

  PipelineProgram parse() {
    std::size_t pos = 0;
    while (pos <= text_.size()) {
      auto nl = text_.find('\n', pos);
      if (nl == std::string_view::npos) nl = text_.size();
      ++line_;
      const auto line = trim(text_.substr(pos, nl - pos));
      if (!line.empty() && line.front() != '#') parse_line(line);
      pos = nl + 1;
    }
    if (!seen_profile_) fail("missing profile line");
    if (prog_.input_field.empty()) fail("missing input line");
    if (prog_.output_field.empty()) fail("missing output line");
    return std::move(prog_);
  }

 private:
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, line_); }

  std::uint64_t number(std::string_view s, const char* what) const {
    std::uint64_t v = 0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || ptr != end) fail(std::string("expected integer ") + what + ", got '" + std::string(s) + "'");
    return v;
  }

  std::uint64_t keyed(std::string_view token, std::string_view key) const {
    if (!token.starts_with(key) || token.size() <= key.size() || token[key.size()] != '=') {
      fail("expected " + std::string(key) + "=<int>, got '" + std::string(token) + "'");
    }
    return number(token.substr(key.size() + 1), std::string(key).c_str());
  }

  void parse_line(std::string_view line) {
    const auto tokens = split_ws(line);
    const auto head = tokens.front();
    if (!seen_profile_ && head != "profile") fail("first line must be a profile declaration");

    if (head == "profile") {
      parse_profile(tokens);
    } else if (head == "model") {
      prog_.metadata.model_name = std::string(trim(line.substr(5)));
    } else if (head == "layer") {
      if (tokens.size() != 7) fail("layer expects: layer <i> first= count= n= p= b=");
      LayerSpan s;
      s.layer = number(tokens[1], "layer index");
      s.first_element = keyed(tokens[2], "first");
      s.element_count = keyed(tokens[3], "count");
      s.width = keyed(tokens[4], "n");
      s.parallel = keyed(tokens[5], "p");
      s.batches = keyed(tokens[6], "b");
      prog_.metadata.layers.push_back(s);
    } else if (head == "field") {
      if (tokens.size() != 4) fail("field expects: field <id> <offset> <width>");
      if (prog_.find_field(tokens[1])) fail("field " + std::string(tokens[1]) + " declared twice");
      prog_.fields.push_back({std::string(tokens[1]), number(tokens[2], "offset"), number(tokens[3], "width")});
    } else if (head == "input" || head == "output") {
      if (tokens.size() != 2) fail(std::string(head) + " expects one field id");
      if (!prog_.find_field(tokens[1])) fail("unknown field '" + std::string(tokens[1]) + "'");
      (head == "input" ? prog_.input_field : prog_.output_field) = std::string(tokens[1]);
    } else if (head == "element") {
      if (tokens.size() != 2) fail("element expects an index");
      const auto index = number(tokens[1], "element index");
      if (index != prog_.elements.size()) {
        fail("element index " + std::to_string(index) + " out of sequence, expected " +
             std::to_string(prog_.elements.size()));
      }
      prog_.elements.emplace_back();
    } else {
      parse_op(line, head);
    }
  }

  void parse_profile(const std::vector<std::string_view>& tokens) {
    if (seen_profile_) fail("duplicate profile line");
    if (tokens.size() < 5) fail("profile expects: profile <name> elements= phv= pps= [ops=] [popcnt=]");
    seen_profile_ = true;
    auto& p = prog_.profile;
    p.name = std::string(tokens[1]);
    p.elements_max = keyed(tokens[2], "elements");
    p.phv_bits = keyed(tokens[3], "phv");
    p.packets_per_second = keyed(tokens[4], "pps");
    p.ops_warn_threshold = kDefaultOpsThreshold;
    p.native_popcnt = false;
    for (std::size_t i = 5; i < tokens.size(); ++i) {
      if (tokens[i].starts_with("ops=")) {
        p.ops_warn_threshold = keyed(tokens[i], "ops");
      } else if (tokens[i].starts_with("popcnt=")) {
        p.native_popcnt = true;
        p.popcnt_width = keyed(tokens[i], "popcnt");
      } else {
        fail("unknown profile attribute '" + std::string(tokens[i]) + "'");
      }
    }
  }

  Slice slice(std::string_view s) const {
    s = trim(s);
    const auto bracket = s.find('[');
    const auto id = s.substr(0, bracket);
    const Field* f = prog_.find_field(id);
    if (id.empty()) fail("missing field reference");
    if (!f) fail("unknown field '" + std::string(id) + "'");
    if (bracket == std::string_view::npos) return {f->id, 0, f->width};

    if (s.back() != ']') fail("malformed slice '" + std::string(s) + "'");
    const auto inner = s.substr(bracket + 1, s.size() - bracket - 2);
    const auto colon = inner.find(':');
    if (colon == std::string_view::npos) fail("malformed slice '" + std::string(s) + "'");
    Slice out{f->id, number(inner.substr(0, colon), "slice offset"), number(inner.substr(colon + 1), "slice width")};
    if (out.width == 0 || out.offset + out.width > f->width) {
      fail("width inconsistency: slice " + std::string(s) + " exceeds field width " + std::to_string(f->width));
    }
    return out;
  }

  BitVector immediate(std::string_view s, std::size_t width) const {
    s = trim(s);
    if (!s.starts_with("0x")) fail("expected hex immediate, got '" + std::string(s) + "'");
    try {
      return BitVector::from_hex(s, width);
    } catch (const ParseError& e) {
      fail(std::string("width inconsistency: ") + e.what());
    }
  }

  void parse_op(std::string_view line, std::string_view head) {
    const auto code = opcode_from_name(head);
    if (!code) fail("unknown opcode " + std::string(head));
    if (prog_.elements.empty()) fail("operation outside an element block");

    const auto arrow = line.find("<-");
    if (arrow == std::string_view::npos) fail("missing '<-' in operation");
    const auto dst = slice(line.substr(head.size(), arrow - head.size()));
    const auto args = split_commas(line.substr(arrow + 2));
    auto expect_args = [&](std::size_t n) {
      if (args.size() != n) {
        fail(std::string(head) + " expects " + std::to_string(n) + " operands, got " + std::to_string(args.size()));
      }
    };

    PrimitiveOp op;
    switch (*code) {
      case Opcode::Copy:
        expect_args(1);
        op = ops::copy(dst, slice(args[0]));
        break;
      case Opcode::Repl:
        expect_args(1);
        op = ops::repl(dst, slice(args[0]));
        break;
      case Opcode::Popcnt:
        expect_args(1);
        op = ops::popcnt(dst, slice(args[0]));
        break;
      case Opcode::XnorC:
        expect_args(2);
        op = ops::xnorc(dst, slice(args[0]), immediate(args[1], dst.width));
        break;
      case Opcode::AndC:
        expect_args(2);
        op = ops::andc(dst, slice(args[0]), immediate(args[1], dst.width));
        break;
      case Opcode::ShrAndC: {
        expect_args(2);
        const auto shr = args[0].find(">>");
        if (shr == std::string_view::npos) fail("shrandc expects '<src> >> <int>'");
        op = ops::shrandc(dst, slice(args[0].substr(0, shr)), number(trim(args[0].substr(shr + 2)), "shift"),
                          immediate(args[1], dst.width));
        break;
      }
      case Opcode::Add:
        expect_args(2);
        op = ops::add(dst, slice(args[0]), slice(args[1]));
        break;
      case Opcode::GeC:
        expect_args(2);
        op = ops::gec(dst, slice(args[0]), number(args[1], "threshold"));
        break;
      case Opcode::Fold: {
        std::vector<Slice> srcs;
        for (const auto a : args) srcs.push_back(slice(a));
        op = ops::fold(dst, std::move(srcs));
        break;
      }
    }
    prog_.elements.back().ops.push_back(std::move(op));
  }

  std::string_view text_;
  std::size_t line_ = 0;
  bool seen_profile_ = false;
  PipelineProgram prog_;
};

}  // namespace

PipelineProgram parse_ir_text(std::string_view text) { return IrParser(text).parse(); }

}  // namespace bnnpipe
