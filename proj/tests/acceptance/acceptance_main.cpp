// Acceptance suite: end-to-end checks of the ensemble dynamics, the moment
// model, and the equilibrium solvers at fixed tolerances. Prints one pass/fail
// line per criterion and exits nonzero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "pngdyn/pngdyn.hpp"

using namespace pngdyn;

namespace {

int g_failures = 0;

void criterion(int number, const std::string& name, double runtime_limit_s,
               const std::function<bool(std::string&)>& body) {
  const auto start = std::chrono::steady_clock::now();
  std::string detail;
  bool ok = false;
  try {
    ok = body(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (secs >= runtime_limit_s) {
    ok = false;
    detail += " [over the " + std::to_string(int(runtime_limit_s)) + "s runtime bound]";
  }
  std::printf("[%s] criterion %d: %s (%.1fs)%s%s\n", ok ? "PASS" : "FAIL", number,
              name.c_str(), secs, detail.empty() ? "" : " | ", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

SimulationConfig base_config(std::size_t agents, long steps, std::uint64_t seed,
                             double sd = 0.1, double mean = 1.0) {
  SimulationConfig cfg;
  cfg.agents_per_population = agents;
  cfg.lambda = 1.0;
  cfg.steps = steps;
  cfg.init.mean = mean;
  cfg.init.sd = sd;
  cfg.seed = seed;
  cfg.record_every = 1;
  return cfg;
}

const std::vector<std::string>& all_games() { return builtin_game_names(); }

// 1. Every per-population/action regret variance decays with log-log slope
//    -2 +/- 0.15 over t in [10, 1e3]; the integrated variance ODE matches the
//    sigma^2/t^2 closed form to 1e-6 relative. All games are evaluated and the
//    worst regression slope per game is reported either way.
bool run_criterion_1(std::string& detail) {
  bool ok = true;
  std::string slopes = "worst slopes:";
  for (const auto& name : all_games()) {
    auto game = builtin_game(name);
    auto cfg = base_config(100, 1000, 0xC1);
    auto traj = run_simulation(game, cfg);
    double worst = -2.0;
    for (std::size_t i = 0; i < game.num_populations(); ++i)
      for (std::size_t a = 0; a < game.num_actions(static_cast<int>(i)); ++a) {
        const double slope = loglog_slope(variance_series(traj, i, a), 10.0, 1000.0);
        if (std::fabs(slope + 2.0) > std::fabs(worst + 2.0)) worst = slope;
        if (!(std::fabs(slope + 2.0) <= 0.15)) ok = false;
      }
    char buf[64];
    std::snprintf(buf, sizeof(buf), " %s %.3f", name.c_str(), worst);
    slopes += buf;

    // model side: integrate the variance system and compare to the closed form
    MomentState st;
    for (std::size_t i = 0; i < game.num_populations(); ++i) {
      st.mean.emplace_back(game.num_actions(static_cast<int>(i)), 1.0);
      st.variance.emplace_back(game.num_actions(static_cast<int>(i)), 0.01);
    }
    auto sol = integrate_moments(game, 1.0, st, 1.0, 1000.0, steps_for_span(1.0, 1000.0));
    const MomentLayout layout(game);
    for (double t : {10.0, 100.0, 1000.0}) {
      const MomentState at = layout.unpack(sol.eval(t));
      for (const auto& pop : at.variance)
        for (double v : pop) {
          const double exact = 0.01 / (t * t);
          if (std::fabs(v - exact) > 1e-6 * exact) {
            detail = name + ": integrated variance off the closed form";
            return false;
          }
        }
    }
  }
  detail = slopes + " (bound -2 +/- 0.15; model closed form verified to 1e-6)";
  return ok;
}

// 2. Weighted zero-sum games: the replicate-averaged mean policy at t = 1e4
//    sits within 1e-2 of the solver QRE, and enumeration finds exactly one
//    cluster at lambda in {0.5, 1, 2}.
bool run_criterion_2(std::string& detail) {
  for (const char* name : {"PE", "AMP", "RPS"}) {
    auto game = builtin_game(name);
    for (double lambda : {0.5, 1.0, 2.0}) {
      auto clusters = enumerate_qre(game, lambda, 100, 0xC2);
      if (clusters.size() != 1) {
        detail = std::string(name) + ": expected a unique equilibrium, got " +
                 std::to_string(clusters.size());
        return false;
      }
    }
    auto cfg = base_config(100, 10000, 0xC2);
    cfg.record_every = 10000;
    auto trajs = run_replicates(game, cfg, 50, 1);
    auto mean = average_trajectories(trajs);
    auto qre = enumerate_qre(game, 1.0, 100, 0xC2);
    const auto& rec = mean.at_time(10000);
    double gap = 0.0;
    for (std::size_t i = 0; i < rec.mean_policy.size(); ++i)
      gap = std::max(gap, max_abs_diff(rec.mean_policy[i], qre[0].policies[i].probabilities()));
    if (!(gap <= 1e-2)) {
      detail = std::string(name) + ": policy-QRE gap " + std::to_string(gap);
      return false;
    }
  }
  return true;
}

// 3. Weighted potential games: PD and SH land on their unique QRE within 1e-2;
//    every BoS replicate lands on one of the three enumerated QREs within
//    1e-2 and diverse initializations reach at least two distinct ones.
bool run_criterion_3(std::string& detail) {
  for (const char* name : {"PD", "SH"}) {
    auto game = builtin_game(name);
    auto qre = enumerate_qre(game, 1.0, 100, 0xC3);
    if (qre.size() != 1) {
      detail = std::string(name) + ": expected one equilibrium";
      return false;
    }
    auto cfg = base_config(100, 10000, 0xC3);
    cfg.record_every = 10000;
    auto trajs = run_replicates(game, cfg, 50, 1);
    auto mean = average_trajectories(trajs);
    const auto& rec = mean.at_time(10000);
    double gap = 0.0;
    for (std::size_t i = 0; i < rec.mean_policy.size(); ++i)
      gap = std::max(gap, max_abs_diff(rec.mean_policy[i], qre[0].policies[i].probabilities()));
    if (!(gap <= 1e-2)) {
      detail = std::string(name) + ": policy-QRE gap " + std::to_string(gap);
      return false;
    }
  }

  auto bos = builtin_game("BoS");
  auto clusters = enumerate_qre(bos, 1.0, 200, 0xC3);
  if (clusters.size() != 3) {
    detail = "BoS: expected 3 equilibria, got " + std::to_string(clusters.size());
    return false;
  }
  std::set<std::size_t> reached;
  Rng mean_rng(0xB05);
  for (int rep = 0; rep < 24; ++rep) {
    auto cfg = base_config(100, 10000, derive_seed(0xC3B, rep));
    cfg.record_every = 10000;
    cfg.init.population_means = {
        {2.0 * mean_rng.uniform01(), 2.0 * mean_rng.uniform01()},
        {2.0 * mean_rng.uniform01(), 2.0 * mean_rng.uniform01()}};
    auto traj = run_simulation(bos, cfg);
    std::size_t idx = 0;
    const double gap = nearest_equilibrium_gap(traj.records.back(), clusters, &idx);
    if (!(gap <= 1e-2)) {
      detail = "BoS replicate " + std::to_string(rep) + ": gap to nearest equilibrium " +
               std::to_string(gap);
      return false;
    }
    reached.insert(idx);
  }
  if (reached.size() < 2) {
    detail = "BoS: all replicates reached the same equilibrium";
    return false;
  }
  return true;
}

// 4. Model/simulation agreement: with N = 1000 and matched initial moments the
//    mean-policy trajectories stay within 0.05 sup-norm over t in [1, 1e4].
//    All games are evaluated and every gap is reported either way. BoS starts
//    inside one coordination basin; a symmetric start sits on the saddle where
//    trajectory comparison measures sensitivity, not model quality.
bool run_criterion_4(std::string& detail) {
  bool ok = true;
  std::string gaps = "sup gaps:";
  for (const auto& name : all_games()) {
    auto game = builtin_game(name);
    auto cfg = base_config(1000, 10000, 0xC4);
    cfg.record_every = 1;
    if (name == "BoS") cfg.init.population_means = {{2.0, 0.5}, {2.0, 0.5}};
    auto traj = run_simulation(game, cfg);
    const MomentState init = moments_from_record(traj.records.front());
    auto sol = integrate_moments(game, 1.0, init, 1.0, 10001.0,
                                 steps_for_span(1.0, 10001.0, 2000));
    const double gap = abm_ode_policy_gap(traj, sol, game, 1.0);
    if (!(gap < 0.05)) ok = false;
    char buf[64];
    std::snprintf(buf, sizeof(buf), " %s %.4f", name.c_str(), gap);
    gaps += buf;
  }
  detail = gaps + " (bound 0.05)";
  return ok;
}

// 5. Heterogeneity ordering on Watts-Strogatz networks: the mean homogeneity
//    time is monotone nondecreasing in the initial spread.
bool run_criterion_5(std::string& detail) {
  for (const char* name : {"PD", "RPS"}) {
    auto bimatrix = builtin_game(name);
    auto edges = generate_graph({GraphKind::watts_strogatz, 10, 4, 0.3, 0xC5});
    auto game = assign_payoffs(edges, 10, bimatrix);

    // paired per-population mean offsets shared across both spread levels
    std::vector<std::vector<std::vector<double>>> rep_means(10);
    for (int r = 0; r < 10; ++r) {
      Rng rng(derive_seed(0xC5AA, r));
      rep_means[r].resize(10);
      for (int i = 0; i < 10; ++i)
        rep_means[r][i].assign(game.num_actions(i), 1.0 + 0.25 * rng.normal());
    }

    double prev_mean_time = -1.0;
    for (double sd : {0.05, 0.1}) {
      double sum = 0.0;
      for (int r = 0; r < 10; ++r) {
        auto cfg = base_config(100, 400, derive_seed(0xC5, r), sd);
        cfg.init.population_means = rep_means[r];
        auto traj = run_simulation(game, cfg);
        auto t = homogeneity_time(traj, 1e-4);
        if (!t) {
          detail = std::string(name) + ": homogeneity never reached at sd " +
                   std::to_string(sd);
          return false;
        }
        sum += double(*t);
      }
      const double mean_time = sum / 10.0;
      if (prev_mean_time >= 0.0 && mean_time < prev_mean_time) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%s: mean time %.2f at sd=0.1 < %.2f at sd=0.05",
                      name, mean_time, prev_mean_time);
        detail = buf;
        return false;
      }
      prev_mean_time = mean_time;
    }
  }
  return true;
}

// 6. Limit-dynamics equivalence: softmax of the regret flow reproduces the
//    policy flow within 1e-6, and both vanish (< 1e-8) at every solver QRE.
bool run_criterion_6(std::string& detail) {
  for (const auto& name : all_games()) {
    auto game = builtin_game(name);
    const double lambda = 1.0;
    Rng rng(0xC6);
    std::vector<std::vector<double>> x0(2), r0(2);
    for (int i = 0; i < 2; ++i) {
      x0[i] = rng.dirichlet_uniform(game.num_actions(i));
      for (auto& v : x0[i]) v = 0.1 / game.num_actions(i) + 0.9 * v;
      double sum = 0.0;
      for (double v : x0[i]) sum += v;
      for (auto& v : x0[i]) v /= sum;
      r0[i].resize(x0[i].size());
      for (std::size_t a = 0; a < x0[i].size(); ++a) r0[i][a] = std::log(x0[i][a]) / lambda;
    }
    auto rpath = integrate_limit_regret(game, lambda, r0, 1.0, 10000.0, 40000);
    auto xpath = integrate_policy(game, lambda, x0, 1.0, 10000.0, 40000);
    const MomentLayout layout(game);
    double worst = 0.0;
    for (std::size_t g = 0; g < rpath.times.size(); g += 61) {
      const MomentState st = layout.unpack(rpath.states[g]);
      std::size_t off = 0;
      for (std::size_t i = 0; i < st.mean.size(); ++i) {
        std::vector<double> x(st.mean[i].size());
        softmax_into(st.mean[i], lambda, x);
        for (std::size_t a = 0; a < x.size(); ++a)
          worst = std::max(worst, std::fabs(x[a] - xpath.states[g][off++]));
      }
    }
    if (!(worst < 1e-6)) {
      detail = name + ": flow mismatch " + std::to_string(worst);
      return false;
    }

    for (const auto& sol : enumerate_qre(game, lambda, 60, 0xC6)) {
      const auto xrhs = smooth_q_learning_rhs(game, sol.profile(), lambda);
      std::vector<std::vector<double>> rstar(2);
      for (int i = 0; i < 2; ++i) {
        const auto u = mean_payoff_from_profile(game, i, sol.profile());
        const double xu = dot(sol.policies[i].probabilities(), u);
        rstar[i].resize(u.size());
        for (std::size_t a = 0; a < u.size(); ++a) rstar[i][a] = u[a] - xu;
      }
      const auto rrhs = limit_regret_rhs(game, rstar, lambda);
      for (const auto& pop : {xrhs, rrhs})
        for (const auto& vec : pop)
          for (double v : vec)
            if (!(std::fabs(v) < 1e-8)) {
              detail = name + ": dynamics not stationary at the equilibrium";
              return false;
            }
    }
  }
  return true;
}

// 7. Numerical property suite: analytic-vs-FD derivatives < 1e-5 over 100
//    random states per game; simplex sums within 1e-12 after every operation;
//    x.r = 0 within 1e-12 per agent step; RK4 order-4 convergence on the
//    variance closed form; bit-identical reruns under fixed seeds.
bool run_criterion_7(std::string& detail) {
  for (const auto& name : all_games()) {
    auto game = builtin_game(name);
    Rng rng(0xC7);
    for (int draw = 0; draw < 100; ++draw) {
      std::vector<std::vector<double>> means(2);
      for (int i = 0; i < 2; ++i) {
        means[i].resize(game.num_actions(i));
        for (auto& v : means[i]) v = -2.0 + 4.0 * rng.uniform01();
      }
      const double err = derivative_check(game, means, 1.0);
      if (!(err < 1e-5)) {
        detail = name + ": derivative error " + std::to_string(err);
        return false;
      }
    }
  }

  // simplex preservation and per-agent regret orthogonality along a run
  auto game = builtin_game("SH");
  auto cfg = base_config(50, 200, 0xC7);
  auto ens = init_regrets(game, cfg);
  for (long t = 2; t <= 201; ++t) {
    // orthogonality is checked on the state the step computes regrets from
    std::vector<std::vector<double>> mean_policy(2);
    for (std::size_t i = 0; i < 2; ++i) {
      const auto st = ensemble_statistics(ens)[i];
      mean_policy[i] = st.mean_policy;
    }
    for (std::size_t i = 0; i < 2; ++i) {
      const auto u = mean_payoff_from_profile(game, static_cast<int>(i), mean_policy);
      const auto& p = ens.pops[i];
      for (std::size_t k = 0; k < p.n_agents; ++k) {
        const auto x = p.policy_row(k);
        double xr = 0.0, sum = 0.0;
        for (std::size_t a = 0; a < p.n_actions; ++a) {
          const double expected = dot(x, u);
          xr += x[a] * (u[a] - expected);
          sum += x[a];
        }
        if (!(std::fabs(xr) <= 1e-12) || !(std::fabs(sum - 1.0) <= 1e-12)) {
          detail = "agent state violated simplex/orthogonality at t=" + std::to_string(t);
          return false;
        }
      }
    }
    simulation_step(ens, game, cfg.lambda, t);
  }

  // RK4 order on the variance law
  RhsInT rhs_fn = [](double t, std::span<const double> y, std::span<double> dy) {
    for (std::size_t k = 0; k < y.size(); ++k) dy[k] = -2.0 * y[k] / t;
  };
  const double e8 = std::fabs(integrate(rhs_fn, {9.0}, 1.0, 3.0, 8).states.back()[0] - 1.0);
  const double e16 = std::fabs(integrate(rhs_fn, {9.0}, 1.0, 3.0, 16).states.back()[0] - 1.0);
  const double ratio = e8 / e16;
  if (!(ratio > 12.0 && ratio < 20.0)) {
    detail = "RK4 error ratio " + std::to_string(ratio) + " not ~16";
    return false;
  }

  // bit-identical reruns
  auto t1 = run_simulation(builtin_game("PD"), base_config(100, 500, 0xC7F));
  auto t2 = run_simulation(builtin_game("PD"), base_config(100, 500, 0xC7F));
  for (std::size_t k = 0; k < t1.records.size(); ++k)
    if (t1.records[k].mean_policy != t2.records[k].mean_policy ||
        t1.records[k].mean_regret != t2.records[k].mean_regret ||
        t1.records[k].regret_variance != t2.records[k].regret_variance) {
      detail = "rerun differed at record " + std::to_string(k);
      return false;
    }
  return true;
}

// 8. Temperature limit: lambda = 100 equilibria within 0.05 of the mixed Nash
//    points of the zero-sum games.
bool run_criterion_8(std::string& detail) {
  struct Expect {
    const char* game;
    std::vector<std::vector<double>> nash;
  };
  const std::vector<Expect> cases = {
      {"PE", {{3.0 / 7, 4.0 / 7}, {2.0 / 7, 5.0 / 7}}},
      {"AMP", {{1.0 / 3, 2.0 / 3}, {2.0 / 3, 1.0 / 3}}},
      {"RPS", {{1.0 / 3, 1.0 / 3, 1.0 / 3}, {1.0 / 3, 1.0 / 3, 1.0 / 3}}},
  };
  for (const auto& c : cases) {
    auto game = builtin_game(c.game);
    auto clusters = enumerate_qre(game, 100.0, 100, 0xC8);
    if (clusters.empty()) {
      detail = std::string(c.game) + ": no equilibrium found at lambda=100";
      return false;
    }
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t a = 0; a < c.nash[i].size(); ++a)
        if (!(std::fabs(clusters[0].policies[i][a] - c.nash[i][a]) < 0.05)) {
          detail = std::string(c.game) + ": equilibrium too far from the Nash point";
          return false;
        }
  }
  return true;
}

}  // namespace

int main() {
  criterion(1, "variance decay law (slope -2, closed form)", 60, run_criterion_1);
  criterion(2, "convergence to the unique QRE in weighted zero-sum games", 300,
            run_criterion_2);
  criterion(3, "convergence into the QRE set in weighted potential games", 300,
            run_criterion_3);
  criterion(4, "simulation/model agreement at N = 1000", 300, run_criterion_4);
  criterion(5, "homogeneity time ordering on Watts-Strogatz networks", 600,
            run_criterion_5);
  criterion(6, "limit-dynamics equivalence and stationarity", 300, run_criterion_6);
  criterion(7, "numerical property suite", 300, run_criterion_7);
  criterion(8, "high-temperature equilibria near the mixed Nash points", 300,
            run_criterion_8);
  if (g_failures == 0) {
    std::printf("all 8 criteria passed\n");
    return 0;
  }
  std::printf("%d criterion(s) failed\n", g_failures);
  return 1;
}
