#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pngdyn/error.hpp"
#include "pngdyn/game.hpp"
#include "pngdyn/policy.hpp"
#include "pngdyn/rng.hpp"

namespace pngdyn {

// ---------------------------------------------------------------------------
// Elementary regret-matching operations
// ---------------------------------------------------------------------------

// r(a) = u(a) - x.u; by construction x.r = 0 up to rounding.
inline std::vector<double> instantaneous_regret(const PolicyVector& x,
                                                std::span<const double> payoffs) {
  if (x.size() != payoffs.size())
    throw ShapeError("instantaneous_regret: dimension mismatch");
  if (!all_finite(payoffs)) throw NumericError("instantaneous_regret: non-finite payoff");
  const double expected = dot(x.probabilities(), payoffs);
  std::vector<double> r(payoffs.size());
  for (std::size_t a = 0; a < r.size(); ++a) r[a] = payoffs[a] - expected;
  return r;
}

// Running average step: R + (r - R)/t, the t-th sample entering the mean.
// t = 1 returns r exactly.
inline std::vector<double> update_cumulative_regret(std::span<const double> cumulative,
                                                    std::span<const double> instant,
                                                    long t) {
  if (t < 1) throw DomainError("update_cumulative_regret: t must be >= 1");
  if (cumulative.size() != instant.size())
    throw ShapeError("update_cumulative_regret: dimension mismatch");
  std::vector<double> out(cumulative.size());
  const double inv_t = 1.0 / static_cast<double>(t);
  for (std::size_t a = 0; a < out.size(); ++a)
    out[a] = cumulative[a] + (instant[a] - cumulative[a]) * inv_t;
  return out;
}

// ---------------------------------------------------------------------------
// Ensemble state
// ---------------------------------------------------------------------------

// Per-population block of agents: row k holds agent k's cumulative regrets and
// the softmax policy derived from them.
struct PopulationBlock {
  std::size_t n_agents = 0;
  std::size_t n_actions = 0;
  std::vector<double> regrets;   // n_agents x n_actions, row-major
  std::vector<double> policies;  // same layout

  std::span<double> regret_row(std::size_t k) {
    return {regrets.data() + k * n_actions, n_actions};
  }
  std::span<const double> regret_row(std::size_t k) const {
    return {regrets.data() + k * n_actions, n_actions};
  }
  std::span<const double> policy_row(std::size_t k) const {
    return {policies.data() + k * n_actions, n_actions};
  }
};

struct AgentEnsemble {
  std::vector<PopulationBlock> pops;

  std::size_t num_populations() const { return pops.size(); }

  void refresh_policies(double lambda) {
    for (auto& p : pops)
      for (std::size_t k = 0; k < p.n_agents; ++k)
        softmax_into(p.regret_row(k), lambda,
                     {p.policies.data() + k * p.n_actions, p.n_actions});
  }
};

struct PopulationStats {
  std::vector<double> mean_regret;
  std::vector<double> mean_policy;
  std::vector<double> regret_variance;  // per action, 1/N population variance
};

// Population mean of regrets and policies plus the per-action regret variance.
// The variance uses the two-pass centered formula: late-time variances sit many
// orders of magnitude below the squared means.
inline std::vector<PopulationStats> ensemble_statistics(const AgentEnsemble& ens) {
  std::vector<PopulationStats> out(ens.pops.size());
  for (std::size_t i = 0; i < ens.pops.size(); ++i) {
    const auto& p = ens.pops[i];
    if (p.n_agents == 0) throw DomainError("ensemble_statistics: empty population");
    auto& st = out[i];
    st.mean_regret.assign(p.n_actions, 0.0);
    st.mean_policy.assign(p.n_actions, 0.0);
    st.regret_variance.assign(p.n_actions, 0.0);
    std::vector<double> lo(p.regret_row(0).begin(), p.regret_row(0).end());
    std::vector<double> hi = lo;
    for (std::size_t k = 0; k < p.n_agents; ++k) {
      auto r = p.regret_row(k);
      auto x = p.policy_row(k);
      for (std::size_t a = 0; a < p.n_actions; ++a) {
        st.mean_regret[a] += r[a];
        st.mean_policy[a] += x[a];
        lo[a] = std::min(lo[a], r[a]);
        hi[a] = std::max(hi[a], r[a]);
      }
    }
    const double inv_n = 1.0 / static_cast<double>(p.n_agents);
    for (std::size_t a = 0; a < p.n_actions; ++a) {
      st.mean_regret[a] *= inv_n;
      st.mean_policy[a] *= inv_n;
    }
    for (std::size_t k = 0; k < p.n_agents; ++k) {
      auto r = p.regret_row(k);
      for (std::size_t a = 0; a < p.n_actions; ++a) {
        const double d = r[a] - st.mean_regret[a];
        st.regret_variance[a] += d * d;
      }
    }
    for (std::size_t a = 0; a < p.n_actions; ++a) {
      // a degenerate column is exactly homogeneous; the mean's rounding must
      // not manufacture a phantom variance there
      st.regret_variance[a] = (lo[a] == hi[a]) ? 0.0 : st.regret_variance[a] * inv_n;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Simulation configuration
// ---------------------------------------------------------------------------

enum class InitFamily { normal };

struct InitSpec {
  InitFamily family = InitFamily::normal;
  double mean = 1.0;                                  // scalar fallback
  std::vector<std::vector<double>> population_means;  // optional per-population mean vectors
  double sd = 0.1;
  bool truncate_positive = false;  // resample until every entry is > 0

  void validate() const {
    if (sd < 0.0) throw DomainError("InitSpec: sd must be >= 0");
  }
};

struct SimulationConfig {
  std::size_t agents_per_population = 100;
  double lambda = 1.0;
  long steps = 10000;
  InitSpec init;
  std::uint64_t seed = 0;
  long record_every = 1;
  std::vector<long> snapshot_times;  // per-agent regret dumps at these t

  void validate() const {
    if (agents_per_population < 1)
      throw DomainError("SimulationConfig: need at least 1 agent per population");
    if (lambda < 0.0) throw DomainError("SimulationConfig: lambda must be >= 0");
    if (steps < 1) throw DomainError("SimulationConfig: steps must be >= 1");
    if (record_every < 1) throw DomainError("SimulationConfig: record_every must be >= 1");
    init.validate();
  }
};

// ---------------------------------------------------------------------------
// Trajectory
// ---------------------------------------------------------------------------

struct TrajectoryRecord {
  long t = 0;
  // indexed [population][action]
  std::vector<std::vector<double>> mean_policy;
  std::vector<std::vector<double>> mean_regret;
  std::vector<std::vector<double>> regret_variance;
};

struct AgentSnapshot {
  long t = 0;
  int population = 0;
  std::vector<std::vector<double>> regrets;  // [agent][action]
};

struct Trajectory {
  std::vector<TrajectoryRecord> records;
  std::vector<AgentSnapshot> snapshots;

  const TrajectoryRecord& at_time(long t) const {
    for (const auto& r : records)
      if (r.t == t) return r;
    throw NotFoundError("Trajectory: no record at t = " + std::to_string(t));
  }
};

// ---------------------------------------------------------------------------
// Initialization and stepping
// ---------------------------------------------------------------------------

// Draws every agent's regret entries independently from the configured normal
// distribution; with truncate_positive, entries are redrawn until positive
// ("positive normal"), capped at 1000 redraws per entry.
inline AgentEnsemble init_regrets(const NetworkGame& game, const SimulationConfig& config) {
  config.validate();
  if (!config.init.population_means.empty() &&
      config.init.population_means.size() != game.num_populations())
    throw ShapeError("init_regrets: one mean vector per population required");
  Rng rng(derive_seed(config.seed, 0x494e4954ULL));  // init stream
  AgentEnsemble ens;
  ens.pops.resize(game.num_populations());
  for (std::size_t i = 0; i < game.num_populations(); ++i) {
    auto& p = ens.pops[i];
    p.n_agents = config.agents_per_population;
    p.n_actions = game.num_actions(static_cast<int>(i));
    p.regrets.resize(p.n_agents * p.n_actions);
    p.policies.resize(p.n_agents * p.n_actions);
    std::vector<double> means(p.n_actions, config.init.mean);
    if (!config.init.population_means.empty()) {
      const auto& mv = config.init.population_means[i];
      if (mv.size() == 1)
        means.assign(p.n_actions, mv[0]);
      else if (mv.size() == p.n_actions)
        means = mv;
      else
        throw ShapeError("init_regrets: mean vector has wrong dimension");
    }
    for (std::size_t k = 0; k < p.n_agents; ++k) {
      auto row = p.regret_row(k);
      for (std::size_t a = 0; a < p.n_actions; ++a) {
        double v = rng.normal(means[a], config.init.sd);
        if (config.init.truncate_positive) {
          int tries = 0;
          while (v <= 0.0) {
            if (++tries > 1000)
              throw InitError("init_regrets: positive-normal rejection cap exceeded");
            v = rng.normal(means[a], config.init.sd);
          }
        }
        row[a] = v;
      }
    }
  }
  ens.refresh_policies(config.lambda);
  return ens;
}

// One synchronous update: (i) population mean policies, (ii) every agent's
// instantaneous regret against neighbor means, (iii) running-average regret
// update with divisor t, (iv) softmax policy refresh. Deterministic; payoffs
// are expectations against mean policies, never sampled actions.
inline void simulation_step(AgentEnsemble& ens, const NetworkGame& game, double lambda,
                            long t) {
  if (t < 1) throw DomainError("simulation_step: t must be >= 1");
  const std::size_t n = ens.pops.size();
  if (n != game.num_populations())
    throw ShapeError("simulation_step: ensemble does not match game");
  // (i) mean policies
  std::vector<std::vector<double>> mean_policy(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = ens.pops[i];
    mean_policy[i].assign(p.n_actions, 0.0);
    for (std::size_t k = 0; k < p.n_agents; ++k) {
      auto x = p.policy_row(k);
      for (std::size_t a = 0; a < p.n_actions; ++a) mean_policy[i][a] += x[a];
    }
    const double inv = 1.0 / static_cast<double>(p.n_agents);
    for (auto& v : mean_policy[i]) v *= inv;
  }
  // (ii)+(iii) regret updates against the frozen means
  const double inv_t = 1.0 / static_cast<double>(t);
  for (std::size_t i = 0; i < n; ++i) {
    auto& p = ens.pops[i];
    const std::vector<double> u =
        mean_payoff_from_profile(game, static_cast<int>(i), mean_policy);
    for (std::size_t k = 0; k < p.n_agents; ++k) {
      auto x = p.policy_row(k);
      auto r = p.regret_row(k);
      double expected = 0.0;
      for (std::size_t a = 0; a < p.n_actions; ++a) expected += x[a] * u[a];
      for (std::size_t a = 0; a < p.n_actions; ++a) {
        const double inst = u[a] - expected;
        r[a] += (inst - r[a]) * inv_t;
      }
    }
  }
  // (iv) policies from the new regrets
  ens.refresh_policies(lambda);
}

// Runs the ensemble for config.steps updates and records sampled statistics.
// Time labels count the samples inside the running regret average: the initial
// draw is the t = 1 sample, so the update after step s uses divisor t = s + 1
// and the recorded trajectory ends at t = steps + 1. This keeps the empirical
// variance on the sigma^2/t^2 decay curve implied by the running average.
inline Trajectory run_simulation(const NetworkGame& game, const SimulationConfig& config) {
  config.validate();
  AgentEnsemble ens = init_regrets(game, config);
  Trajectory traj;

  auto record = [&](long t) {
    auto stats = ensemble_statistics(ens);
    TrajectoryRecord rec;
    rec.t = t;
    for (auto& st : stats) {
      rec.mean_policy.push_back(std::move(st.mean_policy));
      rec.mean_regret.push_back(std::move(st.mean_regret));
      rec.regret_variance.push_back(std::move(st.regret_variance));
    }
    traj.records.push_back(std::move(rec));
  };
  auto snapshot = [&](long t) {
    for (std::size_t i = 0; i < ens.pops.size(); ++i) {
      const auto& p = ens.pops[i];
      AgentSnapshot s;
      s.t = t;
      s.population = static_cast<int>(i);
      s.regrets.resize(p.n_agents);
      for (std::size_t k = 0; k < p.n_agents; ++k) {
        auto row = p.regret_row(k);
        s.regrets[k].assign(row.begin(), row.end());
      }
      traj.snapshots.push_back(std::move(s));
    }
  };
  auto wants_snapshot = [&](long t) {
    return std::find(config.snapshot_times.begin(), config.snapshot_times.end(), t) !=
           config.snapshot_times.end();
  };

  record(1);
  if (wants_snapshot(1)) snapshot(1);
  const long t_final = config.steps + 1;
  for (long t = 2; t <= t_final; ++t) {
    simulation_step(ens, game, config.lambda, t);
    if (t % config.record_every == 0 || t == t_final) record(t);
    if (wants_snapshot(t)) snapshot(t);
  }
  return traj;
}

// First recorded t at which every population's largest per-action regret
// variance falls below the threshold.
inline std::optional<long> homogeneity_time(const Trajectory& traj, double threshold) {
  // threshold 0 is allowed and never reached: variances are nonnegative and
  // the comparison is strict
  if (threshold < 0.0) throw DomainError("homogeneity_time: threshold must be >= 0");
  for (const auto& rec : traj.records) {
    double worst = 0.0;
    for (const auto& pop : rec.regret_variance)
      for (double v : pop) worst = std::max(worst, v);
    if (worst < threshold) return rec.t;
  }
  return std::nullopt;
}

inline constexpr double kDefaultHomogeneityThreshold = 1e-4;

}  // namespace pngdyn
