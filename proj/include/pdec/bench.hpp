#pragma once

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "pdec/grid.hpp"
#include "pdec/io.hpp"
#include "pdec/preprocess.hpp"
#include "pdec/selection.hpp"
#include "pdec/solvers.hpp"

namespace pdec {

// One benchmark measurement; the CSV rows mirror these fields.
struct BenchRecord {
  std::string image_id;
  std::string method;             // L2-T | L2-H | BTREE | RAND
  std::string criterion_variant;  // plain | sharpen | prefilter
  std::string decoder;            // elliptic | diffusion | l1
  std::string noise;              // gaussian sigma, or "sp<ps>+<pp>" for impulse noise
  double budget = 0.0;
  std::string seed;               // integer, or "mean" for the per-cell aggregate
  double error_rms255 = 0.0;      // reconstruction vs the CLEAN image
  double noisy_error_rms255 = 0.0;
  std::size_t mask_count = 0;
  double select_time_s = 0.0;
  double solve_time_s = 0.0;
};

struct BenchConfig {
  std::vector<std::string> images;   // file paths, or "synthetic"
  std::vector<std::string> methods;  // l2t, l2h, btree, rand
  std::string variant = "plain";     // plain | sharpen | prefilter
  double beta = 0.0;
  std::vector<NoiseSpec> noises;
  std::vector<double> budgets;
  std::vector<std::uint64_t> seeds;
  SolverConfig solver;
  bool timing = false;         // measure phases (single-threaded, median of 3)
  bool write_artifacts = true; // masks/ and recon/ under outdir
  int threads = 0;             // 0 = hardware concurrency
  std::string outdir;          // empty = no files, records only
};

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline std::string noise_token(const NoiseSpec& n) {
  if (n.kind == NoiseSpec::Kind::gaussian) return format_double(n.sigma);
  return "sp" + format_double(n.p_salt) + "+" + format_double(n.p_pepper);
}

inline std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == '.' || c == '+' || c == '/' || c == ' ') c = 'p';
  return s;
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t x = seed + salt * 0x9e3779b97f4a7c15ULL;
  return Rng::splitmix64(x);
}

inline double median3(double a, double b, double c) {
  return std::max(std::min(a, b), std::min(std::max(a, b), c));
}

}  // namespace detail

inline std::string bench_csv_header() {
  return "image_id,method,criterion_variant,decoder,sigma,budget,seed,error_rms255,"
         "noisy_error_rms255,mask_count,select_time_s,solve_time_s";
}

inline std::string bench_csv_row(const BenchRecord& r) {
  std::ostringstream os;
  os << r.image_id << ',' << r.method << ',' << r.criterion_variant << ',' << r.decoder << ','
     << r.noise << ',' << detail::format_double(r.budget) << ',' << r.seed << ','
     << detail::format_double(r.error_rms255) << ','
     << detail::format_double(r.noisy_error_rms255) << ',' << r.mask_count << ','
     << detail::format_double(r.select_time_s) << ',' << detail::format_double(r.solve_time_s);
  return os.str();
}

// Structured 256x256 fixture standing in for the paper's test portrait:
// smooth non-harmonic background, linear ramp, a set of disc edges spread
// over the frame, and a fine texture patch that attracts the hard threshold.
inline ImageGrid make_synthetic_image(int width = 256, int height = 256) {
  ImageGrid img(width, height);
  const double w = width, h = height;
  struct Disc { double cx, cy, r, level; };
  const Disc discs[] = {
      {0.24, 0.26, 0.13, 0.85}, {0.72, 0.22, 0.10, 0.15}, {0.28, 0.72, 0.09, 0.95},
      {0.56, 0.55, 0.07, 0.05}, {0.82, 0.62, 0.055, 0.75},
  };
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double u = (x + 0.5) / w, v = (y + 0.5) / h;
      // ramp + gentle curved background
      double val = 0.35 + 0.18 * u + 0.10 * v;
      val += 0.10 * std::sin(2.3 * kPi * u + 0.4) * std::sin(1.7 * kPi * v + 1.1);
      for (const auto& d : discs) {
        const double dx = u - d.cx, dy = v - d.cy;
        if (dx * dx + dy * dy <= d.r * d.r) val = d.level;
      }
      // fine texture patch, bottom-left quadrant
      if (u > 0.06 && u < 0.34 && v > 0.40 && v < 0.60) {
        val = 0.5 + 0.22 * std::sin(2.0 * kPi * 14.0 * u) * std::sin(2.0 * kPi * 12.0 * v);
      }
      img.at(x, y) = std::clamp(val, 0.0, 1.0);
    }
  }
  return img;
}

struct BttcSearchResult {
  double threshold = 0.0;
  std::size_t achieved_count = 0;
  bool reached = false;  // within +-5% of the requested budget
};

// Inverse map budget -> threshold, bisection on the (non-increasing) vertex
// count. Reports the nearest achievable count when the budget cannot be hit.
inline BttcSearchResult btree_threshold_search(const ImageGrid& image, double target_budget,
                                               int max_depth = 64) {
  if (!(target_budget > 0.0) || !(target_budget < 1.0) ||
      (target_budget >= 1.0))
    throw std::invalid_argument("btree_threshold_search: target budget must be in (0,1)");
  const double n = static_cast<double>(image.size());
  const double target = target_budget * n;
  auto count_at = [&](double thr) {
    return mask_bttc(image, BttcParams{thr, max_depth}).count();
  };

  BttcSearchResult best;
  double lo = 0.0, hi = 256.0;
  std::size_t count_lo = count_at(lo);
  best.threshold = lo;
  best.achieved_count = count_lo;
  if (static_cast<double>(count_lo) < target * 0.95) {
    // even threshold 0 cannot produce enough vertices (depth cap / grid)
    best.reached = std::abs(static_cast<double>(count_lo) - target) <= 0.05 * target;
    return best;
  }
  for (int it = 0; it < 48; ++it) {
    const double mid = 0.5 * (lo + hi);
    const std::size_t c = count_at(mid);
    if (std::abs(static_cast<double>(c) - target) <
        std::abs(static_cast<double>(best.achieved_count) - target)) {
      best.threshold = mid;
      best.achieved_count = c;
    }
    if (std::abs(static_cast<double>(c) - target) <= 0.05 * target) {
      best.threshold = mid;
      best.achieved_count = c;
      best.reached = true;
      return best;
    }
    (static_cast<double>(c) > target ? lo : hi) = mid;
  }
  best.reached = std::abs(static_cast<double>(best.achieved_count) - target) <= 0.05 * target;
  return best;
}

struct CellResult {
  BenchRecord record;
  Mask mask;
  ImageGrid reconstruction;
};

namespace detail {

inline ImageGrid apply_noise(const ImageGrid& f, const NoiseSpec& noise) {
  if (noise.kind == NoiseSpec::Kind::gaussian)
    return noise.sigma > 0.0 ? add_gaussian(f, noise.sigma, noise.seed) : f;
  return add_salt_pepper(f, noise.p_salt, noise.p_pepper, noise.seed);
}

inline const char* decoder_name(Decoder d) {
  switch (d) {
    case Decoder::diffusion: return "diffusion";
    case Decoder::l1: return "l1";
    default: return "elliptic";
  }
}

}  // namespace detail

// One cell of the experiment matrix. Selection and decoding both see the
// noisy data (or its sharpened/pre-filtered version: the data-improvement
// transforms also modify the stored values); the error is always measured
// against the clean image.
inline CellResult run_cell(const ImageGrid& clean, const std::string& image_id,
                           const std::string& method, const std::string& variant, double beta,
                           NoiseSpec noise, double budget, std::uint64_t seed,
                           const SolverConfig& solver, bool timing = false) {
  noise.seed = detail::mix_seed(seed, 1);
  const ImageGrid noisy = detail::apply_noise(clean, noise);

  ImageGrid data = noisy;         // what the decoder stores on K
  CriterionSpec crit_spec = CriterionSpec::plain();
  if (variant == "sharpen") {
    crit_spec = CriterionSpec::sharpen(beta);
    data = clamped01(sharpen(noisy, beta));
  } else if (variant == "prefilter") {
    crit_spec = CriterionSpec::prefilter(beta);
    data = clamped01(prefilter(noisy, beta));
  } else if (variant != "plain") {
    throw std::invalid_argument("run_cell: unknown criterion variant '" + variant + "'");
  }

  auto build_mask = [&]() -> Mask {
    if (method == "l2t") return mask_hard_threshold(criterion(noisy, crit_spec), budget);
    if (method == "l2h") return mask_density_halftone(criterion(noisy, crit_spec), budget);
    if (method == "rand")
      return mask_random(clean.width, clean.height, budget, detail::mix_seed(seed, 2));
    if (method == "btree") {
      const auto search = btree_threshold_search(data, budget);
      Mask m = mask_bttc(data, BttcParams{search.threshold, 64});
      m.budget = budget;
      return m;
    }
    throw std::invalid_argument("run_cell: unknown method '" + method + "'");
  };

  CellResult cell;
  double t_sel = 0.0, t_solve = 0.0;
  if (timing) {
    double ts[3], tv[3];
    for (int rep = 0; rep < 3; ++rep) {
      const double t0 = pdec::detail::now_seconds();
      cell.mask = build_mask();
      ts[rep] = pdec::detail::now_seconds() - t0;
    }
    SolveReport rep_last;
    for (int rep = 0; rep < 3; ++rep) {
      auto [u, rep_solver] = solve(data, cell.mask, solver);
      cell.reconstruction = std::move(u);
      rep_last = rep_solver;
      tv[rep] = rep_solver.wall_time;
    }
    t_sel = detail::median3(ts[0], ts[1], ts[2]);
    t_solve = detail::median3(tv[0], tv[1], tv[2]);
  } else {
    cell.mask = build_mask();
    cell.reconstruction = solve(data, cell.mask, solver).first;
  }

  cell.record.image_id = image_id;
  cell.record.method = method == "l2t"     ? "L2-T"
                       : method == "l2h"   ? "L2-H"
                       : method == "btree" ? "BTREE"
                                           : "RAND";
  cell.record.criterion_variant = variant;
  cell.record.decoder = detail::decoder_name(solver.decoder);
  cell.record.noise = detail::noise_token(noise);
  cell.record.budget = budget;
  cell.record.seed = std::to_string(seed);
  cell.record.error_rms255 = rms255(clean, cell.reconstruction);
  cell.record.noisy_error_rms255 = rms255(clean, noisy);
  cell.record.mask_count = cell.mask.count();
  cell.record.select_time_s = t_sel;
  cell.record.solve_time_s = t_solve;
  return cell;
}

// Whole matrix: images x methods x noises x budgets x seeds, one record per
// cell per seed plus a per-cell mean row. Cells run on a thread pool unless
// timings are requested; identical seeds give byte-identical CSVs.
inline std::vector<BenchRecord> run_matrix(const BenchConfig& cfg) {
  if (cfg.images.empty() || cfg.methods.empty() || cfg.noises.empty() || cfg.budgets.empty() ||
      cfg.seeds.empty())
    throw std::invalid_argument("run_matrix: empty parameter list");

  struct Job {
    std::size_t image_idx;
    std::string method;
    NoiseSpec noise;
    double budget;
    std::uint64_t seed;
  };
  std::vector<std::pair<std::string, ImageGrid>> images;
  for (const auto& name : cfg.images) {
    if (name == "synthetic") {
      images.emplace_back("synthetic", make_synthetic_image());
    } else {
      auto channels = load_image(name);
      if (channels.size() != 1)
        throw std::invalid_argument("run_matrix: color images go through run_color: " + name);
      images.emplace_back(std::filesystem::path(name).stem().string(), std::move(channels[0]));
    }
  }

  std::vector<Job> jobs;
  for (std::size_t ii = 0; ii < images.size(); ++ii)
    for (const auto& method : cfg.methods)
      for (const auto& noise : cfg.noises)
        for (double budget : cfg.budgets)
          for (std::uint64_t seed : cfg.seeds)
            jobs.push_back({ii, method, noise, budget, seed});

  std::vector<CellResult> cells(jobs.size());
  std::vector<std::string> failures(jobs.size());
  auto worker_body = [&](std::size_t j) {
    const Job& job = jobs[j];
    try {
      cells[j] = run_cell(images[job.image_idx].second, images[job.image_idx].first, job.method,
                          cfg.variant, cfg.beta, job.noise, job.budget, job.seed, cfg.solver,
                          cfg.timing);
    } catch (const std::exception& e) {
      failures[j] = e.what();  // recorded in the row, the run continues
      cells[j].record.image_id = images[job.image_idx].first;
      cells[j].record.method = job.method;
      cells[j].record.criterion_variant = cfg.variant;
      cells[j].record.decoder = detail::decoder_name(cfg.solver.decoder);
      cells[j].record.noise = detail::noise_token(job.noise);
      cells[j].record.budget = job.budget;
      cells[j].record.seed = std::to_string(job.seed);
      cells[j].record.error_rms255 = -1.0;
      cells[j].record.noisy_error_rms255 = -1.0;
    }
  };

  unsigned n_threads = cfg.timing ? 1u
                                  : (cfg.threads > 0 ? static_cast<unsigned>(cfg.threads)
                                                     : std::thread::hardware_concurrency());
  n_threads = std::max(1u, std::min<unsigned>(n_threads, static_cast<unsigned>(jobs.size())));
  if (n_threads == 1) {
    for (std::size_t j = 0; j < jobs.size(); ++j) worker_body(j);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t)
      pool.emplace_back([&]() {
        for (std::size_t j = next.fetch_add(1); j < jobs.size(); j = next.fetch_add(1))
          worker_body(j);
      });
    for (auto& th : pool) th.join();
  }

  // per-cell mean over seeds, appended after each cell's seed rows
  std::vector<BenchRecord> records;
  const std::size_t n_seeds = cfg.seeds.size();
  for (std::size_t base = 0; base < jobs.size(); base += n_seeds) {
    BenchRecord mean_row = cells[base].record;
    double err = 0.0, nerr = 0.0, ts = 0.0, tv = 0.0, count = 0.0;
    for (std::size_t s = 0; s < n_seeds; ++s) {
      const BenchRecord& r = cells[base + s].record;
      records.push_back(r);
      err += r.error_rms255;
      nerr += r.noisy_error_rms255;
      ts += r.select_time_s;
      tv += r.solve_time_s;
      count += static_cast<double>(r.mask_count);
    }
    mean_row.seed = "mean";
    mean_row.error_rms255 = err / n_seeds;
    mean_row.noisy_error_rms255 = nerr / n_seeds;
    mean_row.select_time_s = ts / n_seeds;
    mean_row.solve_time_s = tv / n_seeds;
    mean_row.mask_count = static_cast<std::size_t>(std::llround(count / n_seeds));
    records.push_back(mean_row);
  }

  if (!cfg.outdir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.outdir);
    std::ofstream csv(fs::path(cfg.outdir) / "results.csv", std::ios::binary);
    csv << bench_csv_header() << "\n";
    for (const auto& r : records) csv << bench_csv_row(r) << "\n";
    if (cfg.write_artifacts) {
      fs::create_directories(fs::path(cfg.outdir) / "masks");
      fs::create_directories(fs::path(cfg.outdir) / "recon");
      for (std::size_t j = 0; j < jobs.size(); ++j) {
        if (!failures[j].empty()) continue;
        const BenchRecord& r = cells[j].record;
        const std::string stem = detail::sanitize(r.image_id + "_" + r.method + "_" + r.noise +
                                                  "_" + detail::format_double(r.budget) + "_s" +
                                                  r.seed);
        save_mask(cells[j].mask, (fs::path(cfg.outdir) / "masks" / (stem + ".pbm")).string());
        save_image(clamped01(cells[j].reconstruction),
                   (fs::path(cfg.outdir) / "recon" / (stem + ".pgm")).string());
      }
    }
  }
  return records;
}

struct ColorRunResult {
  std::vector<ImageGrid> reconstruction;  // 3 channels
  std::vector<Mask> masks;                // one per channel
  std::size_t union_count = 0;
  std::size_t intersection_count = 0;
};

// RGB strategy: one mask per channel, independent selection and decoding.
// The three masks need not share pixels; union/intersection sizes are
// reported alongside.
inline ColorRunResult run_color(const std::vector<ImageGrid>& rgb, const std::string& method,
                                double budget, const SolverConfig& solver,
                                std::uint64_t seed = 0) {
  if (rgb.size() != 3) throw std::invalid_argument("run_color: expected a 3-channel image");
  ColorRunResult out;
  for (int c = 0; c < 3; ++c) {
    const ImageGrid& channel = rgb[c];
    Mask mask;
    if (method == "l2t")
      mask = mask_hard_threshold(criterion(channel, CriterionSpec::plain()), budget);
    else if (method == "l2h")
      mask = mask_density_halftone(criterion(channel, CriterionSpec::plain()), budget);
    else if (method == "rand")
      mask = mask_random(channel.width, channel.height, budget,
                         detail::mix_seed(seed, 10 + static_cast<std::uint64_t>(c)));
    else if (method == "btree")
      mask = mask_bttc(channel, BttcParams{btree_threshold_search(channel, budget).threshold, 64});
    else
      throw std::invalid_argument("run_color: unknown method '" + method + "'");
    out.reconstruction.push_back(solve(channel, mask, solver).first);
    out.masks.push_back(std::move(mask));
  }
  for (std::size_t i = 0; i < out.masks[0].size(); ++i) {
    const bool a = out.masks[0].bits[i], b = out.masks[1].bits[i], c = out.masks[2].bits[i];
    out.union_count += (a || b || c);
    out.intersection_count += (a && b && c);
  }
  return out;
}

}  // namespace pdec
