#include <doctest.h>

#include <random>

#include "cosim/api.hpp"
#include "cosim/errors.hpp"
#include "cosim/wire.hpp"

using namespace cosim;
using namespace cosim::wire;

namespace {

Json random_json(std::mt19937_64& rng, int depth) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const int kind = depth > 3 ? pick(0, 5) : pick(0, 7);
  switch (kind) {
    case 0: return nullptr;
    case 1: return pick(0, 1) == 1;
    case 2: return std::uniform_int_distribution<std::int64_t>(INT64_MIN / 2, INT64_MAX / 2)(rng);
    case 3: return std::uniform_real_distribution<double>(-1e12, 1e12)(rng);
    case 4: {
      static const char* samples[] = {"", "x", "Ramp-0", "sim.Node-1", "quote \" back \\ slash", "tab\tnl\nlf",
                                      "grüße", "✓ ☃ 𝄞", "\x01\x1f"};
      return samples[pick(0, 8)];
    }
    case 5: return std::uniform_int_distribution<std::uint64_t>(0, UINT64_MAX)(rng);
    case 6: {
      Json a = Json::array();
      for (int i = pick(0, 4); i > 0; --i) a.push_back(random_json(rng, depth + 1));
      return a;
    }
    default: {
      Json o = Json::object();
      for (int i = pick(0, 4); i > 0; --i) o["k" + std::to_string(pick(0, 20))] = random_json(rng, depth + 1);
      return o;
    }
  }
}

Json random_inputs(std::mt19937_64& rng) {
  InputBundle inputs;
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  for (int e = pick(0, 3); e > 0; --e) {
    auto& attrs = inputs["Node-" + std::to_string(pick(0, 5))];
    for (int a = pick(1, 3); a > 0; --a) {
      auto& values = attrs["attr" + std::to_string(pick(0, 3))];
      for (int v = pick(1, 3); v > 0; --v) values.push_back({"src.E-" + std::to_string(v), random_json(rng, 2)});
    }
  }
  return inputs_to_json(inputs);
}

}  // namespace

TEST_CASE("init request is a single LF-terminated line") {
  const auto bytes = encode_message(
      Message::request(1, "init", {{"sid", "ramp-0"}, {"time_resolution", 1.0}, {"sim_params", Json::object()}}));
  REQUIRE(!bytes.empty());
  CHECK(bytes.back() == '\n');
  CHECK(bytes.find('\n') == bytes.size() - 1);
  CHECK(Json::parse(bytes)["method"] == "init");
}

TEST_CASE("round trip of every kind") {
  const Message samples[] = {
      Message::request(3, "step", {{"time", 4}, {"inputs", Json::object()}, {"max_advance", 9}}),
      Message::response(3, 5),
      Message::response(4, nullptr),
      Message::error(5, "boom"),
      Message::notify(0, "hello", {{"sid", "net"}}),
      Message::notify(1, "set_event", {{"time", 42}}),
  };
  for (const auto& m : samples) CHECK(decode_message(encode_message(m)) == m);
}

TEST_CASE("randomized round trip of step requests with nested inputs") {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 500; ++i) {
    const Message m = Message::request(static_cast<std::uint64_t>(i), "step",
                                       {{"time", i}, {"inputs", random_inputs(rng)}, {"max_advance", i + 7}});
    const Message back = decode_message(encode_message(m));
    CHECK(back == m);
    CHECK(inputs_from_json(back.params["inputs"]) == inputs_from_json(m.params["inputs"]));
  }
}

TEST_CASE("randomized round trip of arbitrary payloads") {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 500; ++i) {
    Json payload = random_json(rng, 0);
    const Message r = Message::response(static_cast<std::uint64_t>(i), payload);
    CHECK(decode_message(encode_message(r)) == r);
    Json params = Json::object();
    params["payload"] = payload;
    const Message n = Message::notify(static_cast<std::uint64_t>(i), "x", params);
    CHECK(decode_message(encode_message(n)) == n);
  }
}

TEST_CASE("truncated frames report where they end") {
  const std::string full = encode_message(Message::request(7, "get_data", {{"outputs", {{"Ramp-0", {"out"}}}}}));
  for (std::size_t cut = 1; cut < full.size(); ++cut) {
    const std::string part = full.substr(0, cut);
    try {
      decode_message(part);
      FAIL("decoded a truncated frame");
    } catch (const DecodeError& e) {
      CHECK(e.offset() <= part.size());
    }
  }
  try {
    decode_message(full.substr(0, full.size() - 1));
    FAIL("accepted a frame without LF");
  } catch (const DecodeError& e) {
    CHECK(e.offset() == full.size() - 1);
  }
}

TEST_CASE("malformed JSON offset points at the bad byte") {
  try {
    decode_message("{\"id\": 1, \"kind\": ?}\n");
    FAIL("accepted bad JSON");
  } catch (const DecodeError& e) {
    CHECK(e.offset() == 18);
  }
  try {
    decode_message("{\"id\":1}\n{\"id\":2}\n");
    FAIL("accepted two frames");
  } catch (const DecodeError& e) {
    CHECK(e.offset() == 8);
  }
}

TEST_CASE("grammar violations") {
  const char* bad[] = {
      "[]\n",
      "{\"kind\":\"request\",\"method\":\"init\",\"params\":{}}\n",
      "{\"id\":-1,\"kind\":\"request\",\"method\":\"init\",\"params\":{}}\n",
      "{\"id\":1,\"kind\":\"shout\"}\n",
      "{\"id\":1,\"kind\":\"request\",\"params\":{}}\n",
      "{\"id\":1,\"kind\":\"request\",\"method\":\"init\",\"params\":[]}\n",
      "{\"id\":1,\"kind\":\"response\"}\n",
      "{\"id\":1,\"kind\":\"error\",\"message\":3}\n",
      "{\"id\":1,\"kind\":\"response\",\"result\":1,\"extra\":2}\n",
  };
  for (const char* frame : bad) CHECK_THROWS_AS(decode_message(frame), DecodeError);
  // DecodeError is a protocol error
  CHECK_THROWS_AS(decode_message("nope\n"), ProtocolError);
}

TEST_CASE("oversized frames are rejected") {
  std::string big(kMaxFrameBytes + 1, ' ');
  CHECK_THROWS_AS(decode_message(big), DecodeError);
}
