#pragma once

#include <atomic>
#include <cmath>
#include <thread>
#include <utility>
#include <vector>

#include "pngdyn/abm.hpp"
#include "pngdyn/error.hpp"
#include "pngdyn/game.hpp"
#include "pngdyn/ode.hpp"
#include "pngdyn/qre.hpp"

namespace pngdyn {

// Runs n_replicates independent simulations differing only by sub-seed.
// Replicates may execute concurrently (each owns its ensemble); results are
// deterministic regardless of the jobs count.
inline std::vector<Trajectory> run_replicates(const NetworkGame& game,
                                              const SimulationConfig& base, int n_replicates,
                                              int jobs = 1) {
  if (n_replicates < 1) throw DomainError("run_replicates: need at least 1 replicate");
  std::vector<Trajectory> out(n_replicates);
  jobs = std::max(1, std::min(jobs, n_replicates));
  std::atomic<int> next{0};
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errors(jobs);
  for (int w = 0; w < jobs; ++w) {
    workers.emplace_back([&, w] {
      try {
        for (int r = next.fetch_add(1); r < n_replicates; r = next.fetch_add(1)) {
          SimulationConfig cfg = base;
          cfg.seed = derive_seed(base.seed, static_cast<std::uint64_t>(r));
          out[r] = run_simulation(game, cfg);
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : workers) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

// Pointwise average of trajectories recorded on identical t grids.
inline Trajectory average_trajectories(const std::vector<Trajectory>& trajs) {
  if (trajs.empty()) throw DomainError("average_trajectories: empty input");
  Trajectory mean = trajs[0];
  mean.snapshots.clear();
  for (std::size_t rec = 0; rec < mean.records.size(); ++rec) {
    for (std::size_t r = 1; r < trajs.size(); ++r) {
      const auto& other = trajs[r].records[rec];
      if (other.t != mean.records[rec].t)
        throw ShapeError("average_trajectories: record grids differ");
      for (std::size_t i = 0; i < mean.records[rec].mean_policy.size(); ++i)
        for (std::size_t a = 0; a < mean.records[rec].mean_policy[i].size(); ++a) {
          mean.records[rec].mean_policy[i][a] += other.mean_policy[i][a];
          mean.records[rec].mean_regret[i][a] += other.mean_regret[i][a];
          mean.records[rec].regret_variance[i][a] += other.regret_variance[i][a];
        }
    }
    const double inv = 1.0 / double(trajs.size());
    for (auto& pop : mean.records[rec].mean_policy)
      for (auto& v : pop) v *= inv;
    for (auto& pop : mean.records[rec].mean_regret)
      for (auto& v : pop) v *= inv;
    for (auto& pop : mean.records[rec].regret_variance)
      for (auto& v : pop) v *= inv;
  }
  return mean;
}

// First and second sample moments of a recorded state, for seeding the moment
// ODE from a simulated ensemble.
inline MomentState moments_from_record(const TrajectoryRecord& rec) {
  MomentState st;
  st.mean = rec.mean_regret;
  st.variance = rec.regret_variance;
  return st;
}

// Least-squares slope of log(y) against log(t) over t in [t_lo, t_hi].
// Points with y <= 0 are skipped; returns NaN when fewer than two remain.
inline double loglog_slope(const std::vector<std::pair<double, double>>& series,
                           double t_lo, double t_hi) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (auto [t, y] : series) {
    if (t < t_lo || t > t_hi || !(y > 0.0)) continue;
    const double lx = std::log(t), ly = std::log(y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) return std::nan("");
  const double denom = double(n) * sxx - sx * sx;
  return (double(n) * sxy - sx * sy) / denom;
}

// max over populations and actions of the recorded regret variance, per time.
inline std::vector<std::pair<double, double>> max_variance_series(const Trajectory& traj) {
  std::vector<std::pair<double, double>> out;
  out.reserve(traj.records.size());
  for (const auto& rec : traj.records) {
    double worst = 0.0;
    for (const auto& pop : rec.regret_variance)
      for (double v : pop) worst = std::max(worst, v);
    out.emplace_back(double(rec.t), worst);
  }
  return out;
}

// per-(population, action) variance series, for slope checks
inline std::vector<std::pair<double, double>> variance_series(const Trajectory& traj,
                                                              std::size_t pop,
                                                              std::size_t action) {
  std::vector<std::pair<double, double>> out;
  out.reserve(traj.records.size());
  for (const auto& rec : traj.records)
    out.emplace_back(double(rec.t), rec.regret_variance[pop][action]);
  return out;
}

// Sup-norm gap between a simulated mean-policy trajectory and the moment-model
// policies (softmax of the model means), evaluated on the recorded t grid.
inline double abm_ode_policy_gap(const Trajectory& traj, const OdeSolution& sol,
                                 const NetworkGame& game, double lambda,
                                 double t_lo = 1.0,
                                 double t_hi = std::numeric_limits<double>::infinity()) {
  const MomentLayout layout(game);
  double worst = 0.0;
  for (const auto& rec : traj.records) {
    if (rec.t < t_lo || rec.t > t_hi) continue;
    const MomentState st = layout.unpack(sol.eval(double(rec.t)));
    for (std::size_t i = 0; i < st.mean.size(); ++i) {
      std::vector<double> x(st.mean[i].size());
      softmax_into(st.mean[i], lambda, x);
      for (std::size_t a = 0; a < x.size(); ++a)
        worst = std::max(worst, std::fabs(x[a] - rec.mean_policy[i][a]));
    }
  }
  return worst;
}

// Residual of the recorded mean policies under the logit response map.
inline double record_qre_residual(const TrajectoryRecord& rec, const NetworkGame& game,
                                  double lambda) {
  PolicyProfile x = rec.mean_policy;
  for (auto& pop : x) {
    double sum = 0.0;
    for (double v : pop) sum += v;
    for (auto& v : pop) v /= sum;  // averaging can drift a few ulp off the simplex
  }
  return qre_residual(game, x, lambda);
}

// Sup distance from a recorded mean policy to the nearest enumerated
// equilibrium; returns the cluster index through best_idx.
inline double nearest_equilibrium_gap(const TrajectoryRecord& rec,
                                      const std::vector<QreSolution>& clusters,
                                      std::size_t* best_idx = nullptr) {
  if (clusters.empty()) throw DomainError("nearest_equilibrium_gap: no equilibria");
  double best = std::numeric_limits<double>::infinity();
  std::size_t arg = 0;
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    double d = 0.0;
    for (std::size_t i = 0; i < rec.mean_policy.size(); ++i)
      d = std::max(d, max_abs_diff(rec.mean_policy[i],
                                   clusters[c].policies[i].probabilities()));
    if (d < best) {
      best = d;
      arg = c;
    }
  }
  if (best_idx) *best_idx = arg;
  return best;
}

}  // namespace pngdyn
