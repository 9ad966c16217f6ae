#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "pdec/grid.hpp"
#include "pdec/solvers.hpp"

namespace pdec {

inline constexpr double kEulerGamma = 0.57721566490153286061;
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kT1 = 0.70710678118654752440;  // sqrt(2)/2, lattice half-diagonal

// Modified Bessel function of the second kind, order zero. Ascending series
// below z = 2; above, the exact Laplace-type integral
//   K0(z) = sqrt(pi/(2z)) e^-z * (2/sqrt(pi)) Int_0^inf e^-s^2 (1+s^2/(2z))^-1/2 ds
// evaluated by the trapezoid rule, which converges spectrally for this
// integrand. Both branches are accurate to well under 1e-10 on [1e-6, 30].
inline double bessel_k0(double z) {
  if (!(z > 0.0)) throw std::domain_error("bessel_k0: z must be > 0");
  if (z < 2.0) {
    const double q = 0.25 * z * z;
    double term = 1.0, i0 = 1.0, sum = 0.0, harmonic = 0.0;
    for (int k = 1; k < 64; ++k) {
      term *= q / (static_cast<double>(k) * k);
      harmonic += 1.0 / k;
      i0 += term;
      sum += term * harmonic;
      if (term * (harmonic + 1.0) < 1e-19 * i0) break;
    }
    return -(std::log(0.5 * z) + kEulerGamma) * i0 + sum;
  }
  const double step = 1.0 / 128.0;
  const double s_max = 9.0;
  double integral = 0.5;  // integrand at s=0 is 1
  for (double s = step; s <= s_max; s += step)
    integral += std::exp(-s * s) / std::sqrt(1.0 + s * s / (2.0 * z));
  integral *= step;
  return std::sqrt(kPi / (2.0 * z)) * std::exp(-z) * (2.0 / std::sqrt(kPi)) * integral;
}

// One hole radius of the topological-gradient experiment.
struct RadialSolveResult {
  double epsilon = 0.0;
  double j_diff = 0.0;      // j(K_eps) - j(K) = -(1/2) g * integral_w
  double integral_w = 0.0;  // integral of w over the ball B_eps
};

struct TopoScanResult {
  std::vector<RadialSolveResult> points;
  bool fit_valid = false;
  double fitted_exponent = 0.0;  // p in |j_diff| = C * eps^p * |ln eps|
  double ci_width = 0.0;         // width of the 95% confidence interval on p
  double log_prefactor = 0.0;
};

namespace detail {

// w - alpha*Laplace(w) = g on the disc B(0,eps), w(eps) = 0, by the radial
// two-point ODE  w'' + w'/r = (w - g)/alpha  with w'(0) = 0 on a uniform
// 1-D mesh (second order; the r=0 row uses Delta w(0) = 4(w1-w0)/dr^2).
// Returns the area integral 2*pi*Int w r dr. Entirely independent of the
// 2-D stencil machinery.
inline double radial_disc_integral(double g, double alpha, double eps, int n_nodes) {
  const int n = n_nodes;
  const double dr = eps / (n - 1);
  const double inv_dr2 = 1.0 / (dr * dr);
  std::vector<double> sub(n, 0.0), diag(n, 0.0), sup(n, 0.0), rhs(n, g);
  diag[0] = 1.0 + 4.0 * alpha * inv_dr2;
  sup[0] = -4.0 * alpha * inv_dr2;
  for (int i = 1; i < n - 1; ++i) {
    const double r = i * dr;
    sub[i] = -alpha * (inv_dr2 - 1.0 / (2.0 * r * dr));
    diag[i] = 1.0 + 2.0 * alpha * inv_dr2;
    sup[i] = -alpha * (inv_dr2 + 1.0 / (2.0 * r * dr));
  }
  sub[n - 1] = 0.0;
  diag[n - 1] = 1.0;
  rhs[n - 1] = 0.0;  // w(eps) = 0

  // Thomas algorithm
  for (int i = 1; i < n; ++i) {
    const double m = sub[i] / diag[i - 1];
    diag[i] -= m * sup[i - 1];
    rhs[i] -= m * rhs[i - 1];
  }
  std::vector<double> w(n, 0.0);
  w[n - 1] = rhs[n - 1] / diag[n - 1];
  for (int i = n - 2; i >= 0; --i) w[i] = (rhs[i] - sup[i] * w[i + 1]) / diag[i];

  double acc = 0.0;  // trapezoid of w*r
  for (int i = 0; i + 1 < n; ++i)
    acc += 0.5 * (w[i] * (i * dr) + w[i + 1] * ((i + 1) * dr)) * dr;
  return 2.0 * kPi * acc;
}

inline double student_t_975(int dof) {
  static const double table[] = {12.706, 4.303, 3.182, 2.776, 2.571,
                                 2.447,  2.365, 2.306, 2.262, 2.228};
  if (dof < 1) return std::numeric_limits<double>::infinity();
  return dof <= 10 ? table[dof - 1] : 1.96;
}

}  // namespace detail

// For each hole radius eps, solves the screened disc problem radially and
// reports j(K_eps) - j(K) = -(1/2) g Int_B w. The exponent p of
// |j_diff| = C eps^p |ln eps| is fitted over the three smallest radii
// resolved by at least 16 mesh nodes.
inline TopoScanResult topo_gradient_scan(double g_value, const std::vector<double>& eps_list,
                                         int grid_n, double alpha = 1.0) {
  if (eps_list.empty()) throw std::invalid_argument("topo_gradient_scan: empty eps list");
  if (grid_n < 512) throw std::invalid_argument("topo_gradient_scan: grid_n must be >= 512");
  if (!(alpha > 0.0)) throw std::invalid_argument("topo_gradient_scan: alpha must be > 0");
  double eps_max = 0.0;
  for (double e : eps_list) {
    if (!(e > 0.0) || !(e < 0.2))
      throw std::invalid_argument("topo_gradient_scan: eps must lie in (0, 0.2)");
    eps_max = std::max(eps_max, e);
  }
  const double dr = eps_max / (grid_n - 1);

  TopoScanResult result;
  std::vector<std::pair<double, double>> fit_points;  // (ln eps, ln(|j|/|ln eps|))
  std::vector<double> sorted_eps = eps_list;
  std::sort(sorted_eps.begin(), sorted_eps.end());
  for (double eps : sorted_eps) {
    const int n_nodes = static_cast<int>(std::lround(eps / dr)) + 1;
    if (n_nodes < 8)
      throw std::invalid_argument("topo_gradient_scan: mesh too coarse for smallest eps");
    const double integral = detail::radial_disc_integral(g_value, alpha, eps, n_nodes);
    RadialSolveResult point;
    point.epsilon = eps;
    point.integral_w = integral;
    point.j_diff = -0.5 * g_value * integral;
    result.points.push_back(point);
    if (n_nodes >= 16 && fit_points.size() < 3 && point.j_diff != 0.0)
      fit_points.emplace_back(std::log(eps),
                              std::log(std::abs(point.j_diff) / std::abs(std::log(eps))));
  }

  if (fit_points.size() == 3) {
    const int n = 3;
    double xb = 0.0, yb = 0.0;
    for (auto& [x, y] : fit_points) { xb += x; yb += y; }
    xb /= n; yb /= n;
    double sxx = 0.0, sxy = 0.0;
    for (auto& [x, y] : fit_points) { sxx += (x - xb) * (x - xb); sxy += (x - xb) * (y - yb); }
    const double slope = sxy / sxx;
    const double intercept = yb - slope * xb;
    double ss_res = 0.0;
    for (auto& [x, y] : fit_points) {
      const double r = y - (slope * x + intercept);
      ss_res += r * r;
    }
    const double se = std::sqrt(ss_res / (n - 2) / sxx);
    result.fit_valid = true;
    result.fitted_exponent = slope;
    result.ci_width = 2.0 * detail::student_t_975(n - 2) * se;
    result.log_prefactor = intercept;
  }
  return result;
}

// Rescaled compliance of the fat-pixel lattice configuration.
struct ThetaEstimate {
  double m = 0.0;
  int n = 0;         // ball count, k^2
  double alpha = 0.0;
  double theta_hat = 0.0;  // n * Int_D v dx with g = 1
};

// Builds the k x k lattice of balls with radius m/k on the unit square,
// solves v - alpha*Laplace v = 1 off K, v = 0 on K (Neumann outer boundary)
// on a grid_n x grid_n mesh, and returns n * Int v. The proofs behind the
// log bounds use exactly this configuration with g = 1.
inline ThetaEstimate theta_estimate(double m, int k, double alpha, int grid_n,
                                    double tol = 1e-8) {
  if (!(m > 0.0) || !(m < kT1))
    throw std::domain_error("theta_estimate: m must lie in (0, sqrt(2)/2)");
  if (k < 1) throw std::invalid_argument("theta_estimate: k must be >= 1");
  const double radius = m / k;
  if (radius * grid_n < 4.0)
    throw std::invalid_argument("theta_estimate: grid too coarse, need >= 4 cells per ball radius");

  const double h = 1.0 / grid_n;
  Mask mask(grid_n, grid_n, false, 0.0);
  const double r2 = radius * radius;
  for (int y = 0; y < grid_n; ++y) {
    for (int x = 0; x < grid_n; ++x) {
      const double px = (x + 0.5) * h, py = (y + 0.5) * h;
      // nearest lattice cells; balls may cross cell borders when m > 1/2
      const int cx = std::clamp(static_cast<int>(px * k), 0, k - 1);
      const int cy = std::clamp(static_cast<int>(py * k), 0, k - 1);
      bool inside = false;
      for (int by = std::max(0, cy - 1); by <= std::min(k - 1, cy + 1) && !inside; ++by) {
        for (int bx = std::max(0, cx - 1); bx <= std::min(k - 1, cx + 1) && !inside; ++bx) {
          const double dx = px - (bx + 0.5) / k, dy = py - (by + 0.5) / k;
          inside = dx * dx + dy * dy <= r2;
        }
      }
      if (inside) mask.set(x, y, true);
    }
  }

  ImageGrid rhs(grid_n, grid_n, 1.0, h);
  ImageGrid zero(grid_n, grid_n, 0.0, h);
  SolveReport report;
  const ImageGrid v = detail::screened_solve(rhs, zero, mask, alpha, tol, 0, zero, report);
  if (!report.converged) throw solver_error("theta_estimate: CG did not converge");

  ThetaEstimate est;
  est.m = m;
  est.n = k * k;
  est.alpha = alpha;
  double acc = 0.0;
  for (double val : v.values) acc += val;
  est.theta_hat = static_cast<double>(k) * k * acc * h * h;
  return est;
}

// Closed-form bounds on theta(m):
//   upper:  (pi t1^4 / (2 alpha)) (ln(1/m) + ln t1)
//   lower:  C1 ln(1/m) - (C1 ln(1/t1) + t1/alpha^2),
//           C1 = (2 pi^2 alpha - 1) / (2 pi alpha^2 (1 + 2 pi^2 alpha)),
// the lower bound being vacuous (-inf) when alpha <= 1/(2 pi^2).
inline std::pair<double, double> theta_bounds(double m, double alpha) {
  if (!(m > 0.0) || !(m < kT1))
    throw std::domain_error("theta_bounds: m must lie in (0, sqrt(2)/2)");
  if (!(alpha > 0.0)) throw std::invalid_argument("theta_bounds: alpha must be > 0");
  const double t1_4 = kT1 * kT1 * kT1 * kT1;
  const double c1_upper = kPi * t1_4 / (2.0 * alpha);
  const double upper = c1_upper * std::log(1.0 / m) + c1_upper * std::log(kT1);

  double lower = -std::numeric_limits<double>::infinity();
  const double num = 2.0 * kPi * kPi * alpha - 1.0;
  if (num > 0.0) {
    const double c1 = num / (2.0 * kPi * alpha * alpha * (1.0 + 2.0 * kPi * kPi * alpha));
    const double c2 = c1 * std::log(1.0 / kT1) + kT1 / (alpha * alpha);
    lower = c1 * std::log(1.0 / m) - c2;
  }
  return {lower, upper};
}

}  // namespace pdec
