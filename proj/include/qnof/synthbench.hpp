// Synthetic low-rank recovery benchmarks: planted-factor trials and the
// exact-recovery phase diagram.
#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "qnof/qsvd.hpp"
#include "qnof/rng.hpp"
#include "qnof/solvers.hpp"

namespace qnof {

struct TrialSpec {
  Eigen::Index n = 50;
  Eigen::Index rank = 2;
  double miss_rate = 0.05;
  double noise_rate = 0.05;
  int trials = 10;
  std::uint64_t seed = 0;
  double success_threshold = 1e-8;
  SolverParams params;
};

struct TrialRecord {
  Eigen::Index n = 0;
  Eigen::Index rank = 0;
  double miss_rate = 0.0;
  double noise_rate = 0.0;
  int trial = 0;
  Eigen::Index recovered_rank = 0;
  double rel_error = 0.0;
  bool success = false;
  int iterations = 0;
  double wall_time_ms = 0.0;
  SolverTrace trace;
};

/// n-by-n quaternion matrix of exact rank r: A (n-by-r) times B (r-by-n),
/// both with independent standard-normal quaternion components.
inline QuatMatrix random_lowrank(Eigen::Index n, Eigen::Index r,
                                 std::uint64_t seed) {
  if (r < 1 || r > n)
    throw std::invalid_argument("random_lowrank: rank out of range");
  Rng rng(seed);
  const QuatMatrix a = random_normal_quat(n, r, rng);
  const QuatMatrix b = random_normal_quat(r, n, rng);
  return qmat_mul(a, b);
}

namespace detail {

struct PlantedProblem {
  QuatMatrix x0;
  QuatMatrix observed;
  Mask omega;
};

// Plants X0, hides round(miss_rate n^2) entries, then overwrites
// round(noise_rate * #observed) observed entries with impulse values whose
// components are uniform over [-c, c], c = max entry modulus of X0.
inline PlantedProblem plant(const TrialSpec& spec, std::uint64_t seed) {
  PlantedProblem prob;
  prob.x0 = random_lowrank(spec.n, spec.rank, seed);
  Rng rng(seed ^ 0x9e3779b97f4a7c15ull);

  const std::int64_t total = std::int64_t(spec.n) * std::int64_t(spec.n);
  const auto n_miss =
      std::int64_t(std::llround(spec.miss_rate * double(total)));
  auto order = sample_without_replacement(total, total, rng);
  prob.omega = Mask::Constant(spec.n, spec.n, true);
  for (std::int64_t i = 0; i < n_miss; ++i) {
    const auto idx = order[static_cast<std::size_t>(i)];
    prob.omega(idx % spec.n, idx / spec.n) = false;
  }

  const std::int64_t observed = total - n_miss;
  const auto n_noise =
      std::int64_t(std::llround(spec.noise_rate * double(observed)));
  const double c = norms(prob.x0).linf;
  std::uniform_real_distribution<double> uni(-c, c);
  prob.observed = prob.x0;
  for (std::int64_t i = 0; i < n_noise; ++i) {
    const auto idx = order[static_cast<std::size_t>(n_miss + i)];
    prob.observed.set(idx % spec.n, idx / spec.n,
                      Quaternion{uni(rng), uni(rng), uni(rng), uni(rng)});
  }
  prob.observed = project_mask(prob.observed, prob.omega, true);
  return prob;
}

inline int thread_budget() {
  if (const char* env = std::getenv("QNOF_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

}  // namespace detail

/// One planted RMC trial; the per-trial seed is spec.seed ^ trial index.
inline TrialRecord run_trial(const TrialSpec& spec, int trial_index) {
  const std::uint64_t seed = spec.seed ^ std::uint64_t(trial_index);
  const auto prob = detail::plant(spec, seed);

  const auto t0 = std::chrono::steady_clock::now();
  const RecoveryResult sol = solve_rmc(prob.observed, prob.omega, spec.params);
  const auto t1 = std::chrono::steady_clock::now();

  TrialRecord rec;
  rec.n = spec.n;
  rec.rank = spec.rank;
  rec.miss_rate = spec.miss_rate;
  rec.noise_rate = spec.noise_rate;
  rec.trial = trial_index;
  rec.rel_error = fro_norm(sol.x - prob.x0) / fro_norm(prob.x0);
  rec.recovered_rank = numeric_rank(sol.x, 1e-6);
  rec.success = rec.rel_error <= spec.success_threshold;
  rec.iterations = sol.iterations;
  rec.wall_time_ms =
      std::chrono::duration<double, std::milli>(t1 - t0).count();
  rec.trace = std::move(sol.trace);
  return rec;
}

/// All trials of one spec, parallel across trials (QNOF_THREADS caps the
/// worker count). Records come back ordered by trial index.
inline std::vector<TrialRecord> run_trials(const TrialSpec& spec) {
  std::vector<TrialRecord> records(static_cast<std::size_t>(spec.trials));
  const int workers =
      std::min(detail::thread_budget(), std::max(1, spec.trials));
  if (workers <= 1) {
    for (int t = 0; t < spec.trials; ++t)
      records[static_cast<std::size_t>(t)] = run_trial(spec, t);
    return records;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int t = next.fetch_add(1); t < spec.trials; t = next.fetch_add(1))
        records[static_cast<std::size_t>(t)] = run_trial(spec, t);
    });
  }
  for (auto& th : pool) th.join();
  return records;
}

struct PhaseCell {
  Eigen::Index rank = 0;
  double corruption = 0.0;  // the varied rate (noise or missing)
  double recovery_rate = 0.0;
  std::vector<TrialRecord> records;
};

enum class PhaseAxis { kNoise, kMissing };

struct PhaseGrid {
  Eigen::Index n = 50;
  std::vector<Eigen::Index> ranks;   // default 2..16 step 2
  std::vector<double> levels;        // default 0.05..0.75 step 0.05
  PhaseAxis axis = PhaseAxis::kNoise;
  double fixed_rate = 0.05;  // the rate on the non-varied axis
  int trials = 10;
  std::uint64_t seed = 0;
  double success_threshold = 1e-8;
  SolverParams params;

  static PhaseGrid defaults() {
    PhaseGrid g;
    for (Eigen::Index r = 2; r <= 16; r += 2) g.ranks.push_back(r);
    for (int i = 1; i <= 15; ++i) g.levels.push_back(0.05 * i);
    return g;
  }
};

/// Recovery-rate grid over (rank, corruption level); row-major cells with
/// ranks outer, levels inner.
inline std::vector<PhaseCell> phase_diagram(const PhaseGrid& grid) {
  std::vector<PhaseCell> cells;
  cells.reserve(grid.ranks.size() * grid.levels.size());
  for (const auto rank : grid.ranks) {
    for (const auto level : grid.levels) {
      TrialSpec spec;
      spec.n = grid.n;
      spec.rank = rank;
      spec.trials = grid.trials;
      spec.success_threshold = grid.success_threshold;
      spec.params = grid.params;
      if (grid.axis == PhaseAxis::kNoise) {
        spec.noise_rate = level;
        spec.miss_rate = grid.fixed_rate;
      } else {
        spec.miss_rate = level;
        spec.noise_rate = grid.fixed_rate;
      }
      // distinct cells must not share per-trial seeds
      spec.seed = grid.seed ^ (std::uint64_t(rank) << 32) ^
                  (std::uint64_t(std::llround(level * 1000)) << 16);
      PhaseCell cell;
      cell.rank = rank;
      cell.corruption = level;
      cell.records = run_trials(spec);
      int ok = 0;
      for (const auto& r : cell.records) ok += r.success ? 1 : 0;
      cell.recovery_rate = double(ok) / double(std::max(1, grid.trials));
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

/// One row per trial. wall_time_ms is machine-dependent; every other
/// column is reproducible from the seed.
inline void write_trials_csv(std::ostream& os,
                             const std::vector<TrialRecord>& records) {
  os << "n,rank,miss_rate,noise_rate,trial,recovered_rank,rel_error,success,"
        "iterations,wall_time_ms\n";
  for (const auto& r : records) {
    os << r.n << ',' << r.rank << ',' << r.miss_rate << ',' << r.noise_rate
       << ',' << r.trial << ',' << r.recovered_rank << ','
       << std::setprecision(17) << r.rel_error << ',' << (r.success ? 1 : 0)
       << ',' << r.iterations << ',' << std::setprecision(6) << r.wall_time_ms
       << '\n';
  }
}

inline void write_phase_csv(std::ostream& cells_os,
                            const std::vector<PhaseCell>& cells) {
  cells_os << "rank,corruption,recovery_rate\n";
  for (const auto& c : cells)
    cells_os << c.rank << ',' << c.corruption << ',' << c.recovery_rate
             << '\n';
}

}  // namespace qnof
