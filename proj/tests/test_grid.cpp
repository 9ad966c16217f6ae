#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "pdec/grid.hpp"
#include "pdec/rng.hpp"

using namespace pdec;

TEST_CASE("laplacian kills constants exactly", "[grid]") {
  ImageGrid img(16, 11, 0.5);
  const ImageGrid lap = laplacian(img);
  for (double v : lap.values) REQUIRE(v == 0.0);
}

TEST_CASE("laplacian is exact for quadratics in the interior", "[grid]") {
  ImageGrid img(12, 9);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) img.at(x, y) = static_cast<double>(x) * x;
  const ImageGrid lap = laplacian(img);
  for (int y = 1; y < img.height - 1; ++y)
    for (int x = 1; x < img.width - 1; ++x)
      REQUIRE(lap.at(x, y) == Catch::Approx(2.0).margin(1e-12));
}

TEST_CASE("laplacian matches the dense Neumann matrix", "[grid]") {
  for (std::uint64_t seed : {7ULL, 8ULL, 9ULL}) {
    const ImageGrid img = testutil::random_image(8, 8, seed);
    const auto mat = testutil::dense_neumann_laplacian(8, 8);
    const ImageGrid lap = laplacian(img);
    const int n = 64;
    for (int i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int j = 0; j < n; ++j) acc += mat[static_cast<std::size_t>(i) * n + j] * img.values[j];
      REQUIRE(lap.values[i] == Catch::Approx(acc).margin(1e-12));
    }
  }
}

TEST_CASE("laplacian rejects degenerate grids", "[grid]") {
  ImageGrid img(2, 5);
  REQUIRE_THROWS_AS(laplacian(img), std::invalid_argument);
}

TEST_CASE("energy identity and constant-offset cases", "[grid]") {
  const ImageGrid f = testutil::random_image(10, 10, 3);
  REQUIRE(energy(f, f, 1.0, 2) == 0.0);
  REQUIRE(energy(f, f, 1.0, 1) == 0.0);

  ImageGrid u = f;
  const double c = 0.25;
  for (double& v : u.values) v += c;
  // data term (c^2/2)*area, gradient of the difference vanishes
  REQUIRE(energy(u, f, 3.0, 2) == Catch::Approx(0.5 * c * c * 100.0).epsilon(1e-12));
  REQUIRE(energy(u, f, 3.0, 1) == Catch::Approx(c * 100.0).epsilon(1e-12));

  ImageGrid one_off = f;
  one_off.at(4, 4) += 1e-3;
  REQUIRE(energy(one_off, f, 1.0, 2) > 0.0);
}

TEST_CASE("energy matches a direct double-loop oracle", "[grid]") {
  const ImageGrid u = testutil::random_image(9, 7, 11);
  const ImageGrid f = testutil::random_image(9, 7, 12);
  const double alpha = 0.7;
  for (int p : {1, 2}) {
    double data = 0.0, grad = 0.0;
    for (int y = 0; y < 7; ++y) {
      for (int x = 0; x < 9; ++x) {
        const double d = u.at(x, y) - f.at(x, y);
        data += p == 2 ? 0.5 * d * d : std::abs(d);
        if (x + 1 < 9) {
          const double dx = (u.at(x + 1, y) - f.at(x + 1, y)) - d;
          grad += dx * dx;
        }
        if (y + 1 < 7) {
          const double dy = (u.at(x, y + 1) - f.at(x, y + 1)) - d;
          grad += dy * dy;
        }
      }
    }
    REQUIRE(energy(u, f, alpha, p) == Catch::Approx(data + 0.5 * alpha * grad).epsilon(1e-13));
  }
}

TEST_CASE("energy rejects mismatched dimensions", "[grid]") {
  REQUIRE_THROWS_AS(energy(ImageGrid(4, 4), ImageGrid(4, 5), 1.0, 2), std::invalid_argument);
  REQUIRE_THROWS_AS(energy(ImageGrid(4, 4), ImageGrid(4, 4), 1.0, 3), std::invalid_argument);
}

TEST_CASE("rms255 basics", "[grid]") {
  const ImageGrid a = testutil::random_image(16, 16, 21);
  REQUIRE(rms255(a, a) == 0.0);

  ImageGrid b = a;
  for (double& v : b.values) v += 0.03;
  REQUIRE(rms255(a, b) == Catch::Approx(7.65).margin(1e-9));
  REQUIRE(rms255(b, a) == rms255(a, b));
  REQUIRE_THROWS_AS(rms255(a, ImageGrid(16, 15)), std::invalid_argument);
}

TEST_CASE("rms255 Gaussian calibration, Monte Carlo", "[grid]") {
  // sigma=0.05 noise on a 256x256 mid-gray field, no clamping involved
  double acc = 0.0;
  const int n_seeds = 10;
  for (int s = 0; s < n_seeds; ++s) {
    ImageGrid a(256, 256, 0.5), b = a;
    Rng rng(1000 + s);
    for (double& v : b.values) v += 0.05 * rng.normal();
    acc += rms255(a, b);
  }
  REQUIRE(acc / n_seeds == Catch::Approx(12.75).margin(0.15));
}

TEST_CASE("rms255 triangle inequality on sampled triples", "[grid]") {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const ImageGrid a = testutil::random_image(12, 12, seed * 3 + 1);
    const ImageGrid b = testutil::random_image(12, 12, seed * 3 + 2);
    const ImageGrid c = testutil::random_image(12, 12, seed * 3 + 3);
    REQUIRE(rms255(a, c) <= rms255(a, b) + rms255(b, c) + 1e-12);
  }
}
