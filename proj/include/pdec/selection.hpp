#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "pdec/grid.hpp"
#include "pdec/rng.hpp"
#include "pdec/solvers.hpp"

namespace pdec {

// Non-negative per-pixel saliency, |Laplace f| or one of its variants.
struct CriterionMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  CriterionMap() = default;
  CriterionMap(int w, int h) : width(w), height(h), values(static_cast<std::size_t>(w) * h, 0.0) {}
  std::size_t size() const { return values.size(); }
};

// Per-pixel target density mu in [0,1]; mean(mu) equals target_budget
// after calibration.
struct DensityMap {
  int width = 0;
  int height = 0;
  double target_budget = 0.0;
  std::vector<double> values;
};

enum class CriterionKind { plain, sharpen, prefilter };

struct CriterionSpec {
  CriterionKind kind = CriterionKind::plain;
  double beta = 0.0;

  static CriterionSpec plain() { return {CriterionKind::plain, 0.0}; }
  static CriterionSpec sharpen(double beta) { return {CriterionKind::sharpen, beta}; }
  static CriterionSpec prefilter(double beta) { return {CriterionKind::prefilter, beta}; }
};

// plain:     |Laplace f|
// sharpen:   |Laplace f - beta * Laplace^2 f|   (criterion of f - beta*Laplace f)
// prefilter: |f~ - f| with (I - beta*Laplace) f~ = f, which equals beta*|Laplace f~|
inline CriterionMap criterion(const ImageGrid& f, const CriterionSpec& spec) {
  require_min_size(f, "criterion");
  if (spec.beta < 0.0) throw std::invalid_argument("criterion: beta must be >= 0");
  CriterionMap out(f.width, f.height);
  switch (spec.kind) {
    case CriterionKind::plain: {
      const ImageGrid lap = laplacian(f);
      for (std::size_t i = 0; i < out.size(); ++i) out.values[i] = std::abs(lap.values[i]);
      break;
    }
    case CriterionKind::sharpen: {
      const ImageGrid lap = laplacian(f);
      const ImageGrid lap2 = laplacian(lap);
      for (std::size_t i = 0; i < out.size(); ++i)
        out.values[i] = std::abs(lap.values[i] - spec.beta * lap2.values[i]);
      break;
    }
    case CriterionKind::prefilter: {
      if (spec.beta == 0.0) break;  // (I - 0)f~ = f, criterion vanishes
      SolverConfig cfg;
      cfg.alpha = spec.beta;
      cfg.tol = 1e-10;
      const Mask empty(f.width, f.height, false, 0.0);
      const ImageGrid filtered = solve_elliptic(f, empty, cfg).first;
      for (std::size_t i = 0; i < out.size(); ++i)
        out.values[i] = std::abs(filtered.values[i] - f.values[i]);
      break;
    }
  }
  return out;
}

namespace detail {

inline std::size_t target_count(double budget, std::size_t n) {
  if (!(budget > 0.0) || budget > 1.0)
    throw std::invalid_argument("mask selection: budget must be in (0,1]");
  return static_cast<std::size_t>(std::llround(budget * static_cast<double>(n)));
}

// indices ordered by criterion value descending, row-major index as tie break
inline std::vector<std::size_t> ranked_indices(const std::vector<double>& values) {
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (values[a] != values[b]) return values[a] > values[b];
    return a < b;
  });
  return idx;
}

}  // namespace detail

// "L2-T": hard threshold, keep the pixels with the largest criterion.
inline Mask mask_hard_threshold(const CriterionMap& c, double budget) {
  const std::size_t k = detail::target_count(budget, c.size());
  const auto idx = detail::ranked_indices(c.values);
  Mask mask(c.width, c.height, false, budget);
  for (std::size_t i = 0; i < k; ++i) mask.bits[idx[i]] = 1;
  return mask;
}

namespace detail {

// left side of the density rule mu^2/|1 - log mu|, strictly increasing on
// (0,1] from 0 to 1
inline double density_lhs(double mu) { return mu * mu / (1.0 - std::log(mu)); }

inline double density_solve(double target) {
  if (target <= 0.0) return 0.0;
  if (target >= 1.0) return 1.0;
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (density_lhs(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

// Calibrates the scalar c of the rule mu^2/|1-log mu| = c*g^2 so that
// mean(mu) equals the budget. The fat-pixel scale only rescales g^2 and is
// absorbed by the calibration; the parameter is kept for experiments.
inline DensityMap density_from_criterion(const CriterionMap& c, double budget,
                                         double m_param = 1.0) {
  const std::size_t n = c.size();
  detail::target_count(budget, n);  // validates the budget range
  DensityMap density;
  density.width = c.width;
  density.height = c.height;
  density.target_budget = budget;
  density.values.assign(n, 0.0);

  std::vector<double> g2(n);
  double g2_max = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(c.values[i] >= 0.0) || !std::isfinite(c.values[i]))
      throw std::invalid_argument("density_from_criterion: criterion must be finite and >= 0");
    const double g = m_param * c.values[i];
    g2[i] = g * g;
    g2_max = std::max(g2_max, g2[i]);
  }
  if (g2_max == 0.0) {  // degenerate: no signal, fall back to uniform density
    std::fill(density.values.begin(), density.values.end(), budget);
    return density;
  }

  auto mean_mu = [&](double scale) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += detail::density_solve(scale * g2[i]);
    return acc / static_cast<double>(n);
  };

  double lo = 1e-12, hi = 1e12;
  if (mean_mu(hi) < budget - 1e-6) {
    // budget exceeds the criterion support; saturate the support and spread
    // the remainder uniformly over the zero-criterion pixels
    std::size_t n_support = 0;
    for (std::size_t i = 0; i < n; ++i) n_support += (g2[i] > 0.0);
    const double leftover = budget * static_cast<double>(n) - static_cast<double>(n_support);
    const double fill = leftover / static_cast<double>(n - n_support);
    for (std::size_t i = 0; i < n; ++i) density.values[i] = (g2[i] > 0.0) ? 1.0 : fill;
    return density;
  }
  double scale = hi;
  for (int it = 0; it < 120; ++it) {
    scale = std::sqrt(lo * hi);
    const double m = mean_mu(scale);
    if (std::abs(m - budget) <= 1e-8) break;
    (m < budget ? lo : hi) = scale;
  }
  for (std::size_t i = 0; i < n; ++i) density.values[i] = detail::density_solve(scale * g2[i]);
  return density;
}

// Serpentine Floyd-Steinberg error diffusion (7/16, 3/16, 5/16, 1/16),
// followed by an exact-count correction that flips the pixels whose density
// is least consistent with their bit.
inline Mask halftone(const DensityMap& density) {
  const int w = density.width, h = density.height;
  const std::size_t n = density.values.size();
  Mask mask(w, h, false, density.target_budget);

  std::vector<double> err(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) err[i] = density.values[i];
  for (int y = 0; y < h; ++y) {
    const bool reverse = (y & 1) != 0;
    const int x_begin = reverse ? w - 1 : 0;
    const int x_end = reverse ? -1 : w;
    const int dx = reverse ? -1 : 1;
    for (int x = x_begin; x != x_end; x += dx) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      const double old = err[i];
      const int bit = old >= 0.5 ? 1 : 0;
      mask.bits[i] = static_cast<std::uint8_t>(bit);
      const double e = old - bit;
      if (x + dx >= 0 && x + dx < w) err[i + dx] += e * (7.0 / 16.0);
      if (y + 1 < h) {
        if (x - dx >= 0 && x - dx < w) err[i + w - dx] += e * (3.0 / 16.0);
        err[i + w] += e * (5.0 / 16.0);
        if (x + dx >= 0 && x + dx < w) err[i + w + dx] += e * (1.0 / 16.0);
      }
    }
  }

  const std::size_t target = detail::target_count(density.target_budget, n);
  std::size_t have = mask.count();
  if (have != target) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    if (have > target) {
      // drop set pixels with the smallest density first
      std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (density.values[a] != density.values[b]) return density.values[a] < density.values[b];
        return a < b;
      });
      for (std::size_t i = 0; i < n && have > target; ++i)
        if (mask.bits[idx[i]]) { mask.bits[idx[i]] = 0; --have; }
    } else {
      std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (density.values[a] != density.values[b]) return density.values[a] > density.values[b];
        return a < b;
      });
      for (std::size_t i = 0; i < n && have < target; ++i)
        if (!mask.bits[idx[i]]) { mask.bits[idx[i]] = 1; ++have; }
    }
  }
  return mask;
}

// "L2-H": soft threshold via the fat-pixel density rule plus halftoning.
inline Mask mask_density_halftone(const CriterionMap& c, double budget, double m_param = 1.0) {
  return halftone(density_from_criterion(c, budget, m_param));
}

// "Rand": uniform sample without replacement, Fisher-Yates prefix.
inline Mask mask_random(int width, int height, double budget, std::uint64_t seed) {
  const std::size_t n = static_cast<std::size_t>(width) * height;
  const std::size_t k = detail::target_count(budget, n);
  std::vector<std::uint32_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0u);
  Rng rng(seed);
  Mask mask(width, height, false, budget);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.bounded(n - i));
    std::swap(perm[i], perm[j]);
    mask.bits[perm[i]] = 1;
  }
  return mask;
}

// B-tree triangular coding parameters; threshold is the maximum absolute
// interpolation error on the 0..255 scale.
struct BttcParams {
  double threshold = 10.0;
  int max_depth = 64;
};

namespace detail {

struct BttcVertex {
  int x, y;
  bool operator==(const BttcVertex& o) const { return x == o.x && y == o.y; }
};

inline double bttc_max_error(const ImageGrid& f, BttcVertex a, BttcVertex b, BttcVertex c) {
  const double denom = static_cast<double>(b.y - c.y) * (a.x - c.x) +
                       static_cast<double>(c.x - b.x) * (a.y - c.y);
  if (denom == 0.0) return 0.0;  // degenerate triangle
  const double fa = f.at(a.x, a.y), fb = f.at(b.x, b.y), fc = f.at(c.x, c.y);
  const int min_x = std::min({a.x, b.x, c.x}), max_x = std::max({a.x, b.x, c.x});
  const int min_y = std::min({a.y, b.y, c.y}), max_y = std::max({a.y, b.y, c.y});
  double worst = 0.0;
  for (int y = min_y; y <= max_y; ++y) {
    for (int x = min_x; x <= max_x; ++x) {
      const double l1 = (static_cast<double>(b.y - c.y) * (x - c.x) +
                         static_cast<double>(c.x - b.x) * (y - c.y)) / denom;
      const double l2 = (static_cast<double>(c.y - a.y) * (x - c.x) +
                         static_cast<double>(a.x - c.x) * (y - c.y)) / denom;
      const double l3 = 1.0 - l1 - l2;
      const double tol = 1e-12;
      if (l1 < -tol || l2 < -tol || l3 < -tol) continue;
      const double interp = l1 * fa + l2 * fb + l3 * fc;
      worst = std::max(worst, std::abs(f.at(x, y) - interp) * 255.0);
    }
  }
  return worst;
}

// apex = right-angle vertex, (h1, h2) = hypotenuse endpoints
inline void bttc_split(const ImageGrid& f, Mask& mask, BttcVertex apex, BttcVertex h1,
                       BttcVertex h2, double threshold, int depth, int max_depth) {
  mask.set(apex.x, apex.y, true);
  mask.set(h1.x, h1.y, true);
  mask.set(h2.x, h2.y, true);
  if (depth >= max_depth) return;
  const BttcVertex mid{(h1.x + h2.x) / 2, (h1.y + h2.y) / 2};
  if (mid == h1 || mid == h2) return;
  if (bttc_max_error(f, apex, h1, h2) <= threshold) return;
  bttc_split(f, mask, mid, apex, h1, threshold, depth + 1, max_depth);
  bttc_split(f, mask, mid, apex, h2, threshold, depth + 1, max_depth);
}

}  // namespace detail

// "B-tree": recursive binary triangle decomposition; the mask collects all
// triangle vertices of the final decomposition.
inline Mask mask_bttc(const ImageGrid& f, const BttcParams& params) {
  require_min_size(f, "mask_bttc");
  if (params.threshold < 0.0) throw std::invalid_argument("mask_bttc: threshold must be >= 0");
  Mask mask(f.width, f.height, false, 0.0);
  const detail::BttcVertex tl{0, 0}, tr{f.width - 1, 0}, bl{0, f.height - 1},
      br{f.width - 1, f.height - 1};
  detail::bttc_split(f, mask, tl, tr, bl, params.threshold, 0, params.max_depth);
  detail::bttc_split(f, mask, br, tr, bl, params.threshold, 0, params.max_depth);
  mask.budget = static_cast<double>(mask.count()) / static_cast<double>(mask.size());
  return mask;
}

namespace detail {

inline void bttc_rasterize(const ImageGrid& f, ImageGrid& out, BttcVertex a, BttcVertex b,
                           BttcVertex c) {
  const double denom = static_cast<double>(b.y - c.y) * (a.x - c.x) +
                       static_cast<double>(c.x - b.x) * (a.y - c.y);
  if (denom == 0.0) return;
  const double fa = f.at(a.x, a.y), fb = f.at(b.x, b.y), fc = f.at(c.x, c.y);
  const int min_x = std::min({a.x, b.x, c.x}), max_x = std::max({a.x, b.x, c.x});
  const int min_y = std::min({a.y, b.y, c.y}), max_y = std::max({a.y, b.y, c.y});
  for (int y = min_y; y <= max_y; ++y) {
    for (int x = min_x; x <= max_x; ++x) {
      const double l1 = (static_cast<double>(b.y - c.y) * (x - c.x) +
                         static_cast<double>(c.x - b.x) * (y - c.y)) / denom;
      const double l2 = (static_cast<double>(c.y - a.y) * (x - c.x) +
                         static_cast<double>(a.x - c.x) * (y - c.y)) / denom;
      const double l3 = 1.0 - l1 - l2;
      const double tol = 1e-12;
      if (l1 < -tol || l2 < -tol || l3 < -tol) continue;
      out.at(x, y) = l1 * fa + l2 * fb + l3 * fc;
    }
  }
}

inline void bttc_decode(const ImageGrid& f, ImageGrid& out, BttcVertex apex, BttcVertex h1,
                        BttcVertex h2, double threshold, int depth, int max_depth) {
  const BttcVertex mid{(h1.x + h2.x) / 2, (h1.y + h2.y) / 2};
  if (depth < max_depth && !(mid == h1) && !(mid == h2) &&
      bttc_max_error(f, apex, h1, h2) > threshold) {
    bttc_decode(f, out, mid, apex, h1, threshold, depth + 1, max_depth);
    bttc_decode(f, out, mid, apex, h2, threshold, depth + 1, max_depth);
    return;
  }
  bttc_rasterize(f, out, apex, h1, h2);
}

}  // namespace detail

// Native B-tree decode: piecewise-linear interpolation over the final
// triangulation (the standard PDE decoder stays the default so mask quality
// is compared like for like).
inline ImageGrid bttc_linear_reconstruction(const ImageGrid& f, const BttcParams& params) {
  require_min_size(f, "bttc_linear_reconstruction");
  if (params.threshold < 0.0)
    throw std::invalid_argument("bttc_linear_reconstruction: threshold must be >= 0");
  ImageGrid out(f.width, f.height, 0.0, f.spacing);
  const detail::BttcVertex tl{0, 0}, tr{f.width - 1, 0}, bl{0, f.height - 1},
      br{f.width - 1, f.height - 1};
  detail::bttc_decode(f, out, tl, tr, bl, params.threshold, 0, params.max_depth);
  detail::bttc_decode(f, out, br, tr, bl, params.threshold, 0, params.max_depth);
  return out;
}

// Optional 1-pixel boundary ring (the fat-pixel construction covers the
// domain boundary with balls; the Neumann decoder does not need it).
inline Mask add_boundary_ring(Mask mask) {
  for (int x = 0; x < mask.width; ++x) {
    mask.set(x, 0, true);
    mask.set(x, mask.height - 1, true);
  }
  for (int y = 0; y < mask.height; ++y) {
    mask.set(0, y, true);
    mask.set(mask.width - 1, y, true);
  }
  return mask;
}

}  // namespace pdec
