#include <catch2/catch_amalgamated.hpp>

#include "pdec/rng.hpp"

using namespace pdec;

// Reference vectors computed with an independent implementation of
// splitmix64-seeded xoshiro256++ (Blackman/Vigna reference algorithm).
TEST_CASE("xoshiro256++ stream matches reference vectors", "[rng]") {
  {
    Rng rng(0);
    REQUIRE(rng.next_u64() == 0x53175d61490b23dfULL);
    REQUIRE(rng.next_u64() == 0x61da6f3dc380d507ULL);
    REQUIRE(rng.next_u64() == 0x5c0fdf91ec9a7bfcULL);
    REQUIRE(rng.next_u64() == 0x02eebf8c3bbe5e1aULL);
    REQUIRE(rng.next_u64() == 0x7eca04ebaf4a5eeaULL);
  }
  {
    Rng rng(42);
    REQUIRE(rng.next_u64() == 0xd0764d4f4476689fULL);
    REQUIRE(rng.next_u64() == 0x519e4174576f3791ULL);
    REQUIRE(rng.next_u64() == 0xfbe07cfb0c24ed8cULL);
  }
  {
    Rng rng(123456789);
    REQUIRE(rng.next_u64() == 0x99e6bd73ed3f23b6ULL);
    REQUIRE(rng.next_u64() == 0xc23a804d68730d49ULL);
  }
}

TEST_CASE("uniform01 range and reference values", "[rng]") {
  Rng rng(42);
  REQUIRE(rng.uniform01() == Catch::Approx(0.8143051451229099).epsilon(1e-15));
  REQUIRE(rng.uniform01() == Catch::Approx(0.3188210400616611).epsilon(1e-15));
  REQUIRE(rng.uniform01() == Catch::Approx(0.9838941681774888).epsilon(1e-15));
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
  }
}

TEST_CASE("seeds reproduce and diverge", "[rng]") {
  Rng a(7), b(7), c(8);
  bool all_equal = true, any_equal_to_c = false;
  for (int i = 0; i < 64; ++i) {
    const auto va = a.next_u64();
    all_equal = all_equal && va == b.next_u64();
    any_equal_to_c = any_equal_to_c || va == c.next_u64();
  }
  REQUIRE(all_equal);
  REQUIRE_FALSE(any_equal_to_c);
}

TEST_CASE("normal moments", "[rng]") {
  Rng rng(2024);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sum2 += z * z;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  REQUIRE(mean == Catch::Approx(0.0).margin(0.01));
  REQUIRE(var == Catch::Approx(1.0).margin(0.02));
}

TEST_CASE("bounded draws stay in range", "[rng]") {
  Rng rng(5);
  for (std::uint64_t bound : {2ULL, 3ULL, 17ULL, 1000003ULL}) {
    for (int i = 0; i < 2000; ++i) REQUIRE(rng.bounded(bound) < bound);
  }
}
