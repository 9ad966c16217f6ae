#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <vector>

#include "pdec/grid.hpp"

namespace pdec {

enum class Decoder { elliptic, diffusion, l1 };

struct SolverConfig {
  double alpha = 1.0;   // diffusion weight (time step of the implicit scheme)
  double tol = 1e-8;    // relative residual tolerance for CG
  int max_iter = 0;     // 0 = auto (10 * number of free pixels)
  Decoder decoder = Decoder::elliptic;
  double dt = 1.0;      // time step for the diffusion decoder
  int n_steps = 1;      // step count for the diffusion decoder
  // iteratively reweighted least squares knobs for the L1 decoder
  double l1_eta = 1e-3;       // smoothing floor of the data weights, intensity units
  double l1_outer_tol = 1e-3; // outer stop: successive iterates differ less, rms255 units
  int l1_max_outer = 80;

  void validate() const {
    if (!(alpha > 0.0)) throw std::invalid_argument("SolverConfig: alpha must be > 0");
    if (!(tol > 0.0)) throw std::invalid_argument("SolverConfig: tol must be > 0");
    if (max_iter < 0) throw std::invalid_argument("SolverConfig: max_iter must be >= 0");
    if (decoder == Decoder::diffusion && !(dt > 0.0))
      throw std::invalid_argument("SolverConfig: dt must be > 0 for the diffusion decoder");
    if (n_steps < 1) throw std::invalid_argument("SolverConfig: n_steps must be >= 1");
  }
};

struct SolveReport {
  int iterations = 0;
  double final_residual = 0.0;
  bool converged = false;
  double wall_time = 0.0;  // seconds

  void accumulate(const SolveReport& step) {
    iterations += step.iterations;
    final_residual = step.final_residual;
    converged = converged && step.converged;
    wall_time += step.wall_time;
  }
};

namespace detail {

inline double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

// Jacobi-preconditioned CG for (W + alpha*L) x = b on the pixels not in K,
// where L is the 5-point Neumann Laplacian (ghost = boundary cell) and W a
// diagonal data weight (identity when `weight` is null). Pixels in K carry
// `dirichlet` values; their stencil contributions are folded into b, which
// keeps the reduced system symmetric positive definite.
inline ImageGrid screened_solve(const ImageGrid& rhs, const ImageGrid& dirichlet,
                                const Mask& mask, double alpha, double tol, int max_iter,
                                const ImageGrid& x0, SolveReport& report,
                                const std::vector<double>* weight = nullptr) {
  const int w = rhs.width, h = rhs.height;
  const std::size_t n = rhs.size();
  const double inv_h2 = 1.0 / (rhs.spacing * rhs.spacing);
  const double t_start = now_seconds();

  ImageGrid out = dirichlet;
  std::size_t n_free = n - mask.count();
  if (n_free == 0) {
    report = {0, 0.0, true, now_seconds() - t_start};
    return out;
  }
  if (max_iter <= 0) max_iter = 10 * static_cast<int>(n_free);

  // per-pixel in-domain neighbor count
  auto degree = [&](int x, int y) {
    return (x > 0) + (x < w - 1) + (y > 0) + (y < h - 1);
  };

  std::vector<double> b(n, 0.0), x(n, 0.0), diag(n, 1.0);
  for (int y = 0; y < h; ++y) {
    for (int x_ = 0; x_ < w; ++x_) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x_;
      if (mask.bits[i]) continue;
      double bi = rhs.values[i];
      const int offs[4][2] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
      for (auto& d : offs) {
        const int nx = x_ + d[0], ny = y + d[1];
        if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
        const std::size_t j = static_cast<std::size_t>(ny) * w + nx;
        if (mask.bits[j]) bi += alpha * inv_h2 * dirichlet.values[j];
      }
      b[i] = bi;
      x[i] = x0.values[i];
      const double wi = weight ? (*weight)[i] : 1.0;
      diag[i] = wi + alpha * inv_h2 * degree(x_, y);
    }
  }

  // y = (W + alpha*L) v on free pixels, masked entries treated as zero
  auto apply = [&](const std::vector<double>& v, std::vector<double>& out_v) {
    for (int y_ = 0; y_ < h; ++y_) {
      for (int x_ = 0; x_ < w; ++x_) {
        const std::size_t i = static_cast<std::size_t>(y_) * w + x_;
        if (mask.bits[i]) { out_v[i] = 0.0; continue; }
        double acc = 0.0;
        if (x_ > 0 && !mask.bits[i - 1]) acc += v[i - 1];
        if (x_ < w - 1 && !mask.bits[i + 1]) acc += v[i + 1];
        if (y_ > 0 && !mask.bits[i - w]) acc += v[i - w];
        if (y_ < h - 1 && !mask.bits[i + w]) acc += v[i + w];
        const double wi = weight ? (*weight)[i] : 1.0;
        out_v[i] = (wi + alpha * inv_h2 * degree(x_, y_)) * v[i] - alpha * inv_h2 * acc;
      }
    }
  };
  auto dot = [&](const std::vector<double>& a, const std::vector<double>& c) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * c[i];
    return acc;
  };

  std::vector<double> r(n, 0.0), z(n, 0.0), p(n, 0.0), ap(n, 0.0);
  apply(x, ap);
  for (std::size_t i = 0; i < n; ++i) r[i] = mask.bits[i] ? 0.0 : b[i] - ap[i];
  const double b_norm = std::sqrt(dot(b, b));
  if (b_norm == 0.0) {
    for (std::size_t i = 0; i < n; ++i)
      if (!mask.bits[i]) out.values[i] = 0.0;
    report = {0, 0.0, true, now_seconds() - t_start};
    return out;
  }

  double r_norm = std::sqrt(dot(r, r));
  int iter = 0;
  if (r_norm > tol * b_norm) {
    for (std::size_t i = 0; i < n; ++i) z[i] = mask.bits[i] ? 0.0 : r[i] / diag[i];
    p = z;
    double rz = dot(r, z);
    for (; iter < max_iter; ++iter) {
      apply(p, ap);
      const double p_ap = dot(p, ap);
      const double step = rz / p_ap;
      for (std::size_t i = 0; i < n; ++i) {
        x[i] += step * p[i];
        r[i] -= step * ap[i];
      }
      r_norm = std::sqrt(dot(r, r));
      if (r_norm <= tol * b_norm) { ++iter; break; }
      for (std::size_t i = 0; i < n; ++i) z[i] = mask.bits[i] ? 0.0 : r[i] / diag[i];
      const double rz_next = dot(r, z);
      const double beta = rz_next / rz;
      rz = rz_next;
      for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
  }

  for (std::size_t i = 0; i < n; ++i)
    if (!mask.bits[i]) out.values[i] = x[i];
  report.iterations = iter;
  report.final_residual = r_norm / b_norm;
  report.converged = report.final_residual <= tol;
  report.wall_time = now_seconds() - t_start;
  return out;
}

inline void check_solver_input(const ImageGrid& f, const Mask& mask, const char* op) {
  require_min_size(f, op);
  if (!mask.same_shape(f)) throw std::invalid_argument(std::string(op) + ": mask dimension mismatch");
  if (has_non_finite(f)) throw std::invalid_argument(std::string(op) + ": NaN or Inf in input");
}

}  // namespace detail

// Problem: u - alpha*Laplace(u) = f off K, u = f on K, Neumann outer
// boundary. Exact Dirichlet elimination; CG warm-started from f so fully
// constrained and constant inputs return exactly.
inline std::pair<ImageGrid, SolveReport> solve_elliptic(const ImageGrid& f_data, const Mask& mask,
                                                        const SolverConfig& cfg) {
  detail::check_solver_input(f_data, mask, "solve_elliptic");
  cfg.validate();
  SolveReport report;
  ImageGrid u = detail::screened_solve(f_data, f_data, mask, cfg.alpha, cfg.tol, cfg.max_iter,
                                       f_data, report);
  return {std::move(u), report};
}

// Semi-implicit time stepping: (I - dt*Laplace) u^{n+1} = u^n off K,
// u^{n+1} = f on K, u^0 = f. One step with dt = alpha is exactly the
// elliptic decoder; many steps approach harmonic inpainting.
inline std::pair<ImageGrid, SolveReport> solve_diffusion(const ImageGrid& f_data, const Mask& mask,
                                                         const SolverConfig& cfg) {
  detail::check_solver_input(f_data, mask, "solve_diffusion");
  cfg.validate();
  if (!(cfg.dt > 0.0)) throw std::invalid_argument("solve_diffusion: dt must be > 0");
  ImageGrid u = f_data;
  SolveReport total;
  total.converged = true;
  for (int step = 0; step < cfg.n_steps; ++step) {
    SolveReport rep;
    u = detail::screened_solve(u, f_data, mask, cfg.dt, cfg.tol, cfg.max_iter, u, rep);
    total.accumulate(rep);
  }
  return {std::move(u), total};
}

// Smoothed L1 data energy used by the IRLS decoder (Huber with knee eta).
inline double l1_energy(const ImageGrid& u, const ImageGrid& f, double alpha, double eta) {
  require_same_shape(u, f, "l1_energy");
  const int w = u.width, h = u.height;
  const double h2 = u.spacing * u.spacing;
  double data = 0.0, grad = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double r = std::abs(u.at(x, y) - f.at(x, y));
      data += (r <= eta) ? r * r / (2.0 * eta) + 0.5 * eta : r;
      if (x < w - 1) {
        const double d = u.at(x + 1, y) - u.at(x, y);
        grad += d * d;
      }
      if (y < h - 1) {
        const double d = u.at(x, y + 1) - u.at(x, y);
        grad += d * d;
      }
    }
  }
  return data * h2 + 0.5 * alpha * grad;
}

// min sum |u - f| h^2 + (alpha/2) sum |grad u|^2 h^2 s.t. u = f on K,
// solved by IRLS: each outer pass reweights the data term by
// 1/max(|u - f|, eta) and reuses the screened CG solver. The weight
// update majorizes the Huber energy, so the smoothed L1 energy is
// non-increasing across outer iterations.
inline std::pair<ImageGrid, SolveReport> solve_l1(const ImageGrid& f_data, const Mask& mask,
                                                  const SolverConfig& cfg) {
  detail::check_solver_input(f_data, mask, "solve_l1");
  cfg.validate();
  SolveReport total;
  ImageGrid u = detail::screened_solve(f_data, f_data, mask, cfg.alpha, cfg.tol, cfg.max_iter,
                                       f_data, total);

  const std::size_t n = f_data.size();
  std::vector<double> weight(n, 1.0), wf(n, 0.0);
  ImageGrid rhs = f_data;
  for (int outer = 0; outer < cfg.l1_max_outer; ++outer) {
    for (std::size_t i = 0; i < n; ++i) {
      const double r = std::abs(u.values[i] - f_data.values[i]);
      weight[i] = 1.0 / std::max(r, cfg.l1_eta);
      rhs.values[i] = weight[i] * f_data.values[i];
    }
    SolveReport rep;
    ImageGrid next = detail::screened_solve(rhs, f_data, mask, cfg.alpha, cfg.tol, cfg.max_iter,
                                            u, rep, &weight);
    total.accumulate(rep);
    const double diff = rms255(next, u);
    u = std::move(next);
    if (diff < cfg.l1_outer_tol) break;
  }
  return {std::move(u), total};
}

inline std::pair<ImageGrid, SolveReport> solve(const ImageGrid& f_data, const Mask& mask,
                                               const SolverConfig& cfg) {
  switch (cfg.decoder) {
    case Decoder::diffusion: return solve_diffusion(f_data, mask, cfg);
    case Decoder::l1: return solve_l1(f_data, mask, cfg);
    case Decoder::elliptic: default: return solve_elliptic(f_data, mask, cfg);
  }
}

}  // namespace pdec
