#include <doctest.h>

#include <random>
#include <stdexcept>

#include "cosim/time.hpp"

using namespace cosim;

TEST_CASE("ticks to seconds") {
  CHECK(ticks_to_seconds(1, TimeResolution{}) == 1.0);
  CHECK(ticks_to_seconds(1, TimeResolution(0.001)) == 0.001);
  CHECK(ticks_to_seconds(0, TimeResolution(0.25)) == 0.0);
  CHECK(ticks_to_seconds(0, TimeResolution(60.0)) == 0.0);
}

TEST_CASE("seconds to ticks floors") {
  CHECK(seconds_to_ticks(2.5, TimeResolution{}) == 2);
  CHECK(seconds_to_ticks(0.0, TimeResolution(0.001)) == 0);
  CHECK(seconds_to_ticks(1.0, TimeResolution(0.001)) == 1000);
  // binary 0.3 lies just below 3 * binary 0.1
  CHECK(seconds_to_ticks(0.3, TimeResolution(0.1)) == 2);
  CHECK(seconds_to_ticks(ticks_to_seconds(3, TimeResolution(0.1)), TimeResolution(0.1)) == 3);
  CHECK(seconds_to_ticks(0.75, TimeResolution(0.25)) == 3);
}

TEST_CASE("seconds to ticks rejects bad input") {
  CHECK_THROWS_AS(seconds_to_ticks(-0.5, TimeResolution{}), std::domain_error);
  CHECK_THROWS_AS(seconds_to_ticks(std::numeric_limits<double>::infinity(), TimeResolution{}), std::domain_error);
  CHECK_THROWS_AS(seconds_to_ticks(std::nan(""), TimeResolution{}), std::domain_error);
  CHECK_THROWS_AS(TimeResolution(0.0), std::invalid_argument);
  CHECK_THROWS_AS(TimeResolution(-1.0), std::invalid_argument);
}

TEST_CASE("default resolution is one second") { CHECK(TimeResolution{}.seconds_per_tick() == 1.0); }

TEST_CASE("tick round trip through seconds") {
  std::mt19937_64 rng(7);
  const double resolutions[] = {1.0, 0.001, 0.1, 0.25, 3.0, 1e-6};
  for (double r : resolutions) {
    TimeResolution res(r);
    for (int i = 0; i < 2000; ++i) {
      const Tick t = std::uniform_int_distribution<Tick>(0, 1'000'000'000)(rng);
      CHECK(seconds_to_ticks(ticks_to_seconds(t, res), res) == t);
    }
  }
}

TEST_CASE("seconds to ticks is the floor of the quotient") {
  std::mt19937_64 rng(11);
  TimeResolution res(0.001);
  for (int i = 0; i < 5000; ++i) {
    const double s = std::uniform_real_distribution<double>(0.0, 1e5)(rng);
    const Tick t = seconds_to_ticks(s, res);
    CHECK(ticks_to_seconds(t, res) <= s);
    CHECK(ticks_to_seconds(t + 1, res) > s);
  }
}

TEST_CASE("superdense examples") {
  CHECK(sdt_compare({5, 0}, {5, 1}) == std::strong_ordering::less);
  CHECK(sdt_compare({5, 3}, {6, 0}) == std::strong_ordering::less);
  CHECK(sdt_compare({4, 2}, {4, 2}) == std::strong_ordering::equal);
  CHECK(to_string(SuperdenseTime{4, 2}) == "(4,2)");
}

TEST_CASE("superdense order is total") {
  std::mt19937_64 rng(3);
  auto draw = [&] {
    return SuperdenseTime{std::uniform_int_distribution<Tick>(0, 4)(rng),
                          std::uniform_int_distribution<std::uint32_t>(0, 3)(rng)};
  };
  for (int i = 0; i < 3000; ++i) {
    const auto a = draw(), b = draw(), c = draw();
    const auto ab = sdt_compare(a, b), ba = sdt_compare(b, a);
    // antisymmetry
    CHECK((ab == std::strong_ordering::less) == (ba == std::strong_ordering::greater));
    CHECK((ab == std::strong_ordering::equal) == (a.tick == b.tick && a.iteration == b.iteration));
    CHECK(sdt_compare(a, a) == std::strong_ordering::equal);
    // transitivity
    if (sdt_compare(a, b) != std::strong_ordering::greater && sdt_compare(b, c) != std::strong_ordering::greater) {
      CHECK(sdt_compare(a, c) != std::strong_ordering::greater);
    }
    // lexicographic, computed independently
    const bool less = a.tick < b.tick || (a.tick == b.tick && a.iteration < b.iteration);
    CHECK((ab == std::strong_ordering::less) == less);
  }
}
