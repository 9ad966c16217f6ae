#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace pdec {

struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct solver_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Scalar field on a regular pixel lattice, row-major, y*width + x.
// Intensities live in [0,1]; clamping happens only at file I/O, internal
// intermediates (criteria, residuals, theory fields) may exceed the range.
struct ImageGrid {
  int width = 0;
  int height = 0;
  double spacing = 1.0;  // grid step h, pixel units by default
  std::vector<double> values;

  ImageGrid() = default;
  ImageGrid(int w, int h, double fill = 0.0, double h_step = 1.0)
      : width(w), height(h), spacing(h_step),
        values(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {
    if (w <= 0 || h <= 0) throw std::invalid_argument("ImageGrid: non-positive dimensions");
  }

  std::size_t size() const { return values.size(); }
  double& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
  double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }

  bool same_shape(const ImageGrid& o) const { return width == o.width && height == o.height; }
};

// Boolean field marking the stored pixels K. budget is the requested
// fraction, kept for provenance; count() is the realized number.
struct Mask {
  int width = 0;
  int height = 0;
  double budget = 0.0;
  std::vector<std::uint8_t> bits;

  Mask() = default;
  Mask(int w, int h, bool fill = false, double budget_frac = 0.0)
      : width(w), height(h), budget(budget_frac),
        bits(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill ? 1 : 0) {
    if (w <= 0 || h <= 0) throw std::invalid_argument("Mask: non-positive dimensions");
  }

  std::size_t size() const { return bits.size(); }
  bool at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x] != 0; }
  void set(int x, int y, bool v) { bits[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0; }

  std::size_t count() const {
    std::size_t n = 0;
    for (auto b : bits) n += b;
    return n;
  }
  bool same_shape(const ImageGrid& img) const { return width == img.width && height == img.height; }
};

inline void require_min_size(const ImageGrid& img, const char* op) {
  if (img.width < 3 || img.height < 3)
    throw std::invalid_argument(std::string(op) + ": grid must be at least 3x3");
  if (img.values.size() != static_cast<std::size_t>(img.width) * img.height)
    throw std::invalid_argument(std::string(op) + ": value array does not match dimensions");
}

inline void require_same_shape(const ImageGrid& a, const ImageGrid& b, const char* op) {
  if (!a.same_shape(b))
    throw std::invalid_argument(std::string(op) + ": dimension mismatch");
}

inline bool has_non_finite(const ImageGrid& img) {
  for (double v : img.values)
    if (!std::isfinite(v)) return true;
  return false;
}

// 5-point Laplacian with Neumann boundary via ghost-cell mirroring:
// the ghost equals the boundary cell itself, so boundary rows lose the
// missing neighbor and the operator stays symmetric and kills constants.
inline ImageGrid laplacian(const ImageGrid& img) {
  require_min_size(img, "laplacian");
  const int w = img.width, h = img.height;
  const double inv_h2 = 1.0 / (img.spacing * img.spacing);
  ImageGrid out(w, h, 0.0, img.spacing);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double c = img.at(x, y);
      double acc = 0.0;
      int deg = 0;
      if (x > 0) { acc += img.at(x - 1, y); ++deg; }
      if (x < w - 1) { acc += img.at(x + 1, y); ++deg; }
      if (y > 0) { acc += img.at(x, y - 1); ++deg; }
      if (y < h - 1) { acc += img.at(x, y + 1); ++deg; }
      out.at(x, y) = (acc - deg * c) * inv_h2;
    }
  }
  return out;
}

// E_p(u) = (1/p) sum |u-f|^p h^2 + (alpha/2) sum |grad(u-f)|^2 h^2,
// forward differences, one-sided truncation at the far boundary.
inline double energy(const ImageGrid& u, const ImageGrid& f, double alpha, int p) {
  require_same_shape(u, f, "energy");
  if (p != 1 && p != 2) throw std::invalid_argument("energy: p must be 1 or 2");
  const int w = u.width, h = u.height;
  const double h2 = u.spacing * u.spacing;
  double data = 0.0, grad = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double d = u.at(x, y) - f.at(x, y);
      data += (p == 2) ? 0.5 * d * d : std::abs(d);
      if (x < w - 1) {
        const double dx = (u.at(x + 1, y) - f.at(x + 1, y)) - d;
        grad += dx * dx;
      }
      if (y < h - 1) {
        const double dy = (u.at(x, y + 1) - f.at(x, y + 1)) - d;
        grad += dy * dy;
      }
    }
  }
  // gradient entries are (diff/h)^2 * h^2 = diff^2
  return data * h2 + 0.5 * alpha * grad;
}

// Root-mean-square error scaled to the 0..255 range; the error metric of
// every benchmark table.
inline double rms255(const ImageGrid& a, const ImageGrid& b) {
  require_same_shape(a, b, "rms255");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const double d = a.values[i] - b.values[i];
    acc += d * d;
  }
  return 255.0 * std::sqrt(acc / static_cast<double>(a.values.size()));
}

inline double mean(const ImageGrid& img) {
  double acc = 0.0;
  for (double v : img.values) acc += v;
  return acc / static_cast<double>(img.values.size());
}

inline std::pair<double, double> min_max(const ImageGrid& img) {
  auto [lo, hi] = std::minmax_element(img.values.begin(), img.values.end());
  return {*lo, *hi};
}

inline ImageGrid clamped01(ImageGrid img) {
  for (double& v : img.values) v = std::clamp(v, 0.0, 1.0);
  return img;
}

}  // namespace pdec
