#include "bnnpipe/bnn_model.hpp"

#include <random>
#include <string>

#include "bnnpipe/error.hpp"
#include "doctest.h"

using namespace bnnpipe;

namespace {

// Independent oracle: +/-1 dot product, sign >= 0 maps to 1.
bool dot_product_neuron(const BitVector& x, const BitVector& w) {
  long sum = 0;
  for (std::size_t i = 0; i < x.width(); ++i) {
    const int xi = x.bit(i) ? 1 : -1;
    const int wi = w.bit(i) ? 1 : -1;
    sum += xi * wi;
  }
  return sum >= 0;
}

std::string hex_list(std::size_t count, const std::string& hex) {
  std::string out;
  for (std::size_t i = 0; i < count; ++i) out += (i ? ",\"" : "\"") + hex + "\"";
  return out;
}

}  // namespace

TEST_CASE("parse_model accepts the minimal model") {
  const auto m = parse_model(R"({"name":"tiny","layers":[{"inputs":4,"neurons":1,"weights":["F"]}]})");
  CHECK(m.name() == "tiny");
  REQUIRE(m.layers().size() == 1);
  CHECK(m.weights(0)[0] == BitVector::ones(4));
}

TEST_CASE("parse_model builds the two-layer 32-64-32 model") {
  const std::string text = R"({"name":"flagship","layers":[{"inputs":32,"neurons":64,"weights":[)" +
                           hex_list(64, "0123abcd") + R"(]},{"inputs":64,"neurons":32,"weights":[)" +
                           hex_list(32, "ffff0000ffff0000") + "]}]}";
  const auto m = parse_model(text);
  CHECK(m.layers().size() == 2);
  CHECK(m.total_neurons() == 96);
  CHECK(m.weights(1)[31].to_hex() == "ffff0000ffff0000");
}

TEST_CASE("parse_model reports invariant violations by layer") {
  const std::string mismatch = R"({"name":"m","layers":[{"inputs":32,"neurons":64,"weights":[)" +
                               hex_list(64, "00000000") + R"(]},{"inputs":32,"neurons":8,"weights":[)" +
                               hex_list(8, "00000000") + "]}]}";
  try {
    parse_model(mismatch);
    FAIL("expected an invariant error");
  } catch (const InvariantError& e) {
    CHECK(std::string(e.what()) == "layer 1 inputs 32 != layer 0 neurons 64");
  }

  CHECK_THROWS_AS(parse_model(R"({"layers":[{"inputs":12,"neurons":1,"weights":["000"]}]})"), InvariantError);
  CHECK_THROWS_AS(parse_model(R"({"layers":[{"inputs":8,"neurons":2,"weights":["00"]}]})"), InvariantError);
  try {
    parse_model(R"({"layers":[{"inputs":8,"neurons":2,"weights":["00","000"]}]})");
    FAIL("expected an invariant error");
  } catch (const InvariantError& e) {
    CHECK(std::string(e.what()).find("layer 0 neuron 1") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_model("{\"layers\": [ }"), ParseError);
  CHECK_THROWS_AS(parse_model(R"({"layers":[{"inputs":"x"}]})"), ParseError);
}

TEST_CASE("render_model round-trips") {
  const auto m = random_model(5, {{16, 8}, {8, 3}}, "rt");
  CHECK(parse_model(render_model(m)) == m);
}

TEST_CASE("reference_neuron examples") {
  const auto ones = BitVector::from_hex("f", 4);
  CHECK(reference_neuron(ones, ones));
  CHECK(reference_neuron(BitVector::from_hex("c", 4), ones));   // tie at N/2 -> 1
  CHECK_FALSE(reference_neuron(BitVector::from_hex("1", 4), BitVector::from_hex("e", 4)));
  CHECK_THROWS_AS(reference_neuron(BitVector(4), BitVector(8)), InvariantError);
}

TEST_CASE("xnor threshold equals the +/-1 dot-product sign (exhaustive, N <= 8)") {
  std::mt19937_64 rng(9);
  for (std::size_t n : {4u, 8u}) {
    for (int sample = 0; sample < 16; ++sample) {
      const auto w = BitVector::from_uint(n, rng());
      for (std::uint64_t xv = 0; xv < (1u << n); ++xv) {
        const auto x = BitVector::from_uint(n, xv);
        REQUIRE(reference_neuron(x, w) == dot_product_neuron(x, w));
        // complementing both leaves xnor unchanged
        REQUIRE(reference_neuron(~x, ~w) == reference_neuron(x, w));
      }
    }
  }
}

TEST_CASE("reference_forward") {
  SUBCASE("all ones stays all ones") {
    const BnnModel m("ones", {{16, 8}}, {std::vector<BitVector>(8, BitVector::ones(16))});
    CHECK(reference_forward(m, BitVector::ones(16)) == BitVector::ones(8));
  }
  SUBCASE("two layers agree with the dot-product oracle") {
    const auto m = random_model(11, {{32, 64}, {64, 32}});
    std::mt19937_64 rng(3);
    for (int i = 0; i < 50; ++i) {
      const auto x = BitVector::from_uint(32, rng());
      BitVector hidden(64);
      for (std::size_t j = 0; j < 64; ++j) hidden.set_bit(j, dot_product_neuron(x, m.weights(0)[j]));
      BitVector y(32);
      for (std::size_t j = 0; j < 32; ++j) y.set_bit(j, dot_product_neuron(hidden, m.weights(1)[j]));
      CHECK(reference_forward(m, x) == y);
    }
  }
  SUBCASE("width mismatch") {
    const auto m = random_model(1, {{32, 4}});
    CHECK_THROWS_AS(reference_forward(m, BitVector(16)), InvariantError);
  }
}

TEST_CASE("random_model") {
  const auto a = random_model(1, {{16, 8}});
  CHECK(a.weights(0).size() == 8);
  CHECK(a.weights(0)[0].width() == 16);
  CHECK(random_model(1, {{16, 8}}) == a);
  const auto b = random_model(2, {{16, 8}});
  CHECK(a.weights(0) != b.weights(0));
  CHECK_THROWS_AS(random_model(1, {{12, 4}}), InvariantError);
  CHECK_THROWS_AS(random_model(1, {{16, 12}, {12, 1}}), InvariantError);
  CHECK_THROWS_AS(random_model(1, {}), InvariantError);
  // the final layer may have any neuron count
  CHECK(random_model(1, {{16, 8}, {8, 3}}).output_width() == 3);
}
