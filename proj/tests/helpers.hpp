#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pdec/grid.hpp"
#include "pdec/rng.hpp"

namespace testutil {

inline pdec::ImageGrid random_image(int w, int h, std::uint64_t seed, double lo = 0.0,
                                    double hi = 1.0) {
  pdec::Rng rng(seed);
  pdec::ImageGrid img(w, h);
  for (double& v : img.values) v = lo + (hi - lo) * rng.uniform01();
  return img;
}

inline pdec::Mask random_mask(int w, int h, double fraction, std::uint64_t seed) {
  pdec::Rng rng(seed);
  pdec::Mask mask(w, h, false, fraction);
  for (auto& b : mask.bits) b = rng.uniform01() < fraction ? 1 : 0;
  return mask;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("pdec_" + name);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::vector<char> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::vector<char>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// Dense assembly of the 5-point Neumann Laplacian (ghost = boundary cell),
// row-major pixel order. Deliberately written as a direct translation of
// the stencil definition, independent of the library implementation.
inline std::vector<double> dense_neumann_laplacian(int w, int h, double spacing = 1.0) {
  const int n = w * h;
  std::vector<double> mat(static_cast<std::size_t>(n) * n, 0.0);
  const double inv_h2 = 1.0 / (spacing * spacing);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int i = y * w + x;
      const int offs[4][2] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
      for (auto& d : offs) {
        const int nx = x + d[0], ny = y + d[1];
        if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
        const int j = ny * w + nx;
        mat[static_cast<std::size_t>(i) * n + j] += inv_h2;
        mat[static_cast<std::size_t>(i) * n + i] -= inv_h2;
      }
    }
  }
  return mat;
}

// Gaussian elimination with partial pivoting; the dense oracle for the
// solver equivalence tests.
inline std::vector<double> dense_solve(std::vector<double> a, std::vector<double> b) {
  const int n = static_cast<int>(b.size());
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[static_cast<std::size_t>(r) * n + col]) >
          std::abs(a[static_cast<std::size_t>(pivot) * n + col]))
        pivot = r;
    if (pivot != col) {
      for (int c = 0; c < n; ++c)
        std::swap(a[static_cast<std::size_t>(col) * n + c],
                  a[static_cast<std::size_t>(pivot) * n + c]);
      std::swap(b[col], b[pivot]);
    }
    const double d = a[static_cast<std::size_t>(col) * n + col];
    for (int r = col + 1; r < n; ++r) {
      const double factor = a[static_cast<std::size_t>(r) * n + col] / d;
      if (factor == 0.0) continue;
      for (int c = col; c < n; ++c)
        a[static_cast<std::size_t>(r) * n + c] -= factor * a[static_cast<std::size_t>(col) * n + c];
      b[r] -= factor * b[col];
    }
  }
  std::vector<double> x(n, 0.0);
  for (int r = n - 1; r >= 0; --r) {
    double acc = b[r];
    for (int c = r + 1; c < n; ++c) acc -= a[static_cast<std::size_t>(r) * n + c] * x[c];
    x[r] = acc / a[static_cast<std::size_t>(r) * n + r];
  }
  return x;
}

}  // namespace testutil
