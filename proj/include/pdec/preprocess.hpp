#pragma once

#include <cmath>
#include <cstdint>

#include "pdec/grid.hpp"
#include "pdec/rng.hpp"
#include "pdec/solvers.hpp"

namespace pdec {

struct NoiseSpec {
  enum class Kind { gaussian, salt_pepper } kind = Kind::gaussian;
  double sigma = 0.0;
  double p_salt = 0.0;
  double p_pepper = 0.0;
  std::uint64_t seed = 0;
};

// f + sigma*Z clamped to [0,1], Z i.i.d. standard normal from the seeded
// xoshiro256++ stream (row-major order, one draw per pixel).
inline ImageGrid add_gaussian(const ImageGrid& f, double sigma, std::uint64_t seed) {
  if (sigma < 0.0) throw std::invalid_argument("add_gaussian: sigma must be >= 0");
  if (sigma == 0.0) return f;
  Rng rng(seed);
  ImageGrid out = f;
  for (double& v : out.values) v = std::clamp(v + sigma * rng.normal(), 0.0, 1.0);
  return out;
}

inline ImageGrid add_salt_pepper(const ImageGrid& f, double p_salt, double p_pepper,
                                 std::uint64_t seed) {
  if (p_salt < 0.0 || p_pepper < 0.0 || p_salt + p_pepper > 1.0)
    throw std::invalid_argument("add_salt_pepper: invalid impulse fractions");
  Rng rng(seed);
  ImageGrid out = f;
  for (double& v : out.values) {
    const double u = rng.uniform01();
    if (u < p_salt)
      v = 1.0;
    else if (u < p_salt + p_pepper)
      v = 0.0;
  }
  return out;
}

// f - beta*Laplace f, left unclamped: it feeds the selection criterion and
// the modified Dirichlet data, not the display path.
inline ImageGrid sharpen(const ImageGrid& f, double beta) {
  if (beta < 0.0) throw std::invalid_argument("sharpen: beta must be >= 0");
  if (beta == 0.0) return f;
  const ImageGrid lap = laplacian(f);
  ImageGrid out = f;
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] -= beta * lap.values[i];
  return out;
}

// Solves (I - beta*Laplace) f~ = f on the whole domain (empty mask); a mild
// linear filter that preserves the mean exactly under Neumann conditions.
inline ImageGrid prefilter(const ImageGrid& f, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("prefilter: beta must be > 0");
  SolverConfig cfg;
  cfg.alpha = beta;
  cfg.tol = 1e-10;
  const Mask empty(f.width, f.height, false, 0.0);
  auto [filtered, report] = solve_elliptic(f, empty, cfg);
  if (!report.converged) throw solver_error("prefilter: elliptic solve did not converge");
  return filtered;
}

// Stride-2 coarse variant: filter a 2x2 box-downsampled image and upsample
// bilinearly. Off by default in the tools; the full-resolution filter is
// the documented path.
inline ImageGrid prefilter_coarse(const ImageGrid& f, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("prefilter_coarse: beta must be > 0");
  const int cw = std::max(3, f.width / 2), ch = std::max(3, f.height / 2);
  ImageGrid coarse(cw, ch, 0.0, f.spacing * 2.0);
  for (int y = 0; y < ch; ++y) {
    for (int x = 0; x < cw; ++x) {
      const int x0 = std::min(2 * x, f.width - 1), x1 = std::min(2 * x + 1, f.width - 1);
      const int y0 = std::min(2 * y, f.height - 1), y1 = std::min(2 * y + 1, f.height - 1);
      coarse.at(x, y) =
          0.25 * (f.at(x0, y0) + f.at(x1, y0) + f.at(x0, y1) + f.at(x1, y1));
    }
  }
  const ImageGrid filtered = prefilter(coarse, beta);
  ImageGrid out(f.width, f.height, 0.0, f.spacing);
  for (int y = 0; y < f.height; ++y) {
    for (int x = 0; x < f.width; ++x) {
      const double cx = std::min((x - 0.5) / 2.0, static_cast<double>(cw - 1));
      const double cy = std::min((y - 0.5) / 2.0, static_cast<double>(ch - 1));
      const int ix = std::clamp(static_cast<int>(std::floor(cx)), 0, cw - 2);
      const int iy = std::clamp(static_cast<int>(std::floor(cy)), 0, ch - 2);
      const double tx = std::clamp(cx - ix, 0.0, 1.0), ty = std::clamp(cy - iy, 0.0, 1.0);
      out.at(x, y) = (1 - tx) * (1 - ty) * filtered.at(ix, iy) +
                     tx * (1 - ty) * filtered.at(ix + 1, iy) +
                     (1 - tx) * ty * filtered.at(ix, iy + 1) +
                     tx * ty * filtered.at(ix + 1, iy + 1);
    }
  }
  return out;
}

}  // namespace pdec
