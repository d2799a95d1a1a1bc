// Experiment runner for regret-matching ensembles on population network
// games: simulation, moment-model integration, QRE enumeration, model/ABM
// comparison and heterogeneity sweeps. Outputs are CSV files plus
// self-contained SVG plots; every command is reproducible from (config, seed).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "pngdyn/pngdyn.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace pngdyn;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitDivergence = 3;
constexpr int kExitIo = 4;

struct CliError : std::runtime_error {
  CliError(std::string msg, int code) : std::runtime_error(std::move(msg)), exit_code(code) {}
  int exit_code;
};

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream f(path);
  if (!f) throw CliError("cannot open config file: " + path, kExitIo);
  try {
    json doc;
    f >> doc;
    return doc;
  } catch (const json::exception& e) {
    throw CliError("config parse error in " + path + ": " + e.what(), kExitConfig);
  }
}

// flag > config > env/default
template <typename T>
T resolve(const CLI::Option* opt, const T& flag_value, const json& cfg,
          const std::string& key, const T& fallback) {
  if (opt && opt->count() > 0) return flag_value;
  if (!key.empty()) {
    const json* node = &cfg;
    std::istringstream keys(key);
    std::string part;
    bool found = true;
    while (std::getline(keys, part, '.')) {
      if (node->contains(part)) {
        node = &(*node)[part];
      } else {
        found = false;
        break;
      }
    }
    if (found) {
      try {
        return node->get<T>();
      } catch (const json::exception& e) {
        throw CliError("config key '" + key + "': " + e.what(), kExitConfig);
      }
    }
  }
  return fallback;
}

std::uint64_t default_seed() {
  if (const char* env = std::getenv("PNGDYN_SEED")) {
    try {
      return std::stoull(env);
    } catch (...) {
      throw CliError("PNGDYN_SEED is not an integer", kExitConfig);
    }
  }
  return 0;
}

struct GameOptions {
  std::string name;
  std::string file;
  std::string graph_kind;
  int graph_n = 0;
  int graph_k = 0;
  double graph_beta = -1.0;
  std::uint64_t graph_seed = 0;

  CLI::Option* name_opt = nullptr;
  CLI::Option* file_opt = nullptr;
  CLI::Option* kind_opt = nullptr;
  CLI::Option* n_opt = nullptr;
  CLI::Option* k_opt = nullptr;
  CLI::Option* beta_opt = nullptr;
  CLI::Option* gseed_opt = nullptr;

  void attach(CLI::App* cmd) {
    name_opt = cmd->add_option("--game", name, "builtin game name (PE, RPS, AMP, PD, SH, BoS)");
    file_opt = cmd->add_option("--game-file", file, "JSON game definition file");
    kind_opt = cmd->add_option("--graph", graph_kind,
                               "graph kind: edge, complete, ring, watts_strogatz");
    n_opt = cmd->add_option("--graph-n", graph_n, "population count for generated graphs");
    k_opt = cmd->add_option("--graph-k", graph_k, "Watts-Strogatz mean degree (even)");
    beta_opt = cmd->add_option("--graph-beta", graph_beta, "Watts-Strogatz rewiring probability");
    gseed_opt = cmd->add_option("--graph-seed", graph_seed, "graph generation seed");
  }

  NetworkGame resolve_game(const json& cfg) const {
    std::string game_name = resolve(name_opt, name, cfg, "game", std::string());
    std::string game_file = resolve(file_opt, file, cfg, "game_file", std::string());
    if (cfg.contains("game") && cfg["game"].is_object())
      game_file = cfg["game"].value("file", game_file);
    if (!game_file.empty() && !game_name.empty())
      throw CliError("give either --game or --game-file, not both", kExitConfig);
    if (game_file.empty() && game_name.empty())
      throw CliError("no game given (--game or --game-file)", kExitConfig);

    NetworkGame base = game_file.empty() ? builtin_game(game_name) : load_game_file(game_file);

    GraphSpec spec;
    spec.kind = graph_kind_from_string(
        resolve(kind_opt, graph_kind, cfg, "graph.kind", std::string("edge")));
    spec.n = resolve(n_opt, graph_n, cfg, "graph.n", 2);
    spec.k = resolve(k_opt, graph_k, cfg, "graph.k", 4);
    spec.beta = resolve(beta_opt, graph_beta, cfg, "graph.beta", 0.3);
    spec.seed = resolve(gseed_opt, graph_seed, cfg, "graph.seed", std::uint64_t{0});
    if (spec.kind == GraphKind::edge && spec.n == 2) return base;
    return assign_payoffs(generate_graph(spec), spec.n, base);
  }
};

struct SimOptions {
  std::size_t agents = 100;
  double lambda = 1.0;
  long steps = 10000;
  long record_every = 1;
  std::uint64_t seed = 0;
  double mean = 1.0;
  double sd = 0.1;
  bool truncate = false;
  std::vector<long> snapshot_steps;

  CLI::Option *agents_opt = nullptr, *lambda_opt = nullptr, *steps_opt = nullptr,
              *record_opt = nullptr, *seed_opt = nullptr, *mean_opt = nullptr,
              *sd_opt = nullptr, *trunc_opt = nullptr, *snap_opt = nullptr;

  void attach(CLI::App* cmd) {
    agents_opt = cmd->add_option("--agents", agents, "agents per population");
    lambda_opt = cmd->add_option("--lambda", lambda, "softmax temperature");
    steps_opt = cmd->add_option("--steps", steps, "simulation steps");
    record_opt = cmd->add_option("--record-every", record_every, "recording stride");
    seed_opt = cmd->add_option("--seed", seed, "base seed (PNGDYN_SEED as default)");
    mean_opt = cmd->add_option("--mean", mean, "initial regret mean");
    sd_opt = cmd->add_option("--sd", sd, "initial regret standard deviation");
    trunc_opt = cmd->add_flag("--truncate-positive", truncate,
                              "resample initial regrets until positive");
    snap_opt = cmd->add_option("--snapshot-steps", snapshot_steps,
                               "times at which per-agent regrets are dumped");
  }

  SimulationConfig resolve_config(const json& cfg) const {
    SimulationConfig out;
    out.agents_per_population =
        resolve(agents_opt, agents, cfg, "sim.agents", std::size_t{100});
    out.lambda = resolve(lambda_opt, lambda, cfg, "sim.lambda", 1.0);
    out.steps = resolve(steps_opt, steps, cfg, "sim.steps", 10000L);
    out.record_every = resolve(record_opt, record_every, cfg, "sim.record_every", 1L);
    out.seed = resolve(seed_opt, seed, cfg, "sim.seed", default_seed());
    out.init.mean = resolve(mean_opt, mean, cfg, "sim.init.mean", 1.0);
    out.init.sd = resolve(sd_opt, sd, cfg, "sim.init.sd", 0.1);
    out.init.truncate_positive =
        resolve(trunc_opt, truncate, cfg, "sim.init.truncate_positive", false);
    out.snapshot_times =
        resolve(snap_opt, snapshot_steps, cfg, "sim.snapshot_steps", std::vector<long>{});
    if (cfg.contains("sim") && cfg["sim"].contains("init") &&
        cfg["sim"]["init"].contains("population_means"))
      out.init.population_means =
          cfg["sim"]["init"]["population_means"].get<std::vector<std::vector<double>>>();
    return out;
  }
};

fs::path ensure_outdir(const std::string& out) {
  fs::path dir = out.empty() ? fs::path(".") : fs::path(out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw CliError("cannot create output directory " + dir.string(), kExitIo);
  return dir;
}

std::string rep_name(int r) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "sim_rep%03d.csv", r);
  return buf;
}

// ---------------------------------------------------------------------------

int cmd_games_list() {
  std::cout << "name  populations  actions        class\n";
  for (const auto& name : builtin_game_names()) {
    auto g = builtin_game(name);
    std::ostringstream actions;
    for (std::size_t i = 0; i < g.num_populations(); ++i) {
      if (i) actions << " x ";
      actions << g.num_actions(static_cast<int>(i));
    }
    std::string klass = "-";
    if (auto w = find_zero_sum_weights(g); w && w->residual < 1e-9) {
      std::ostringstream k;
      k << "weighted zero-sum (w = " << w->weights[0] << ", " << w->weights[1] << ")";
      klass = k.str();
    } else {
      klass = "weighted potential";
    }
    std::cout << name << std::string(6 - name.size(), ' ') << g.num_populations()
              << "            " << actions.str() << "          " << klass << "\n";
  }
  return kExitOk;
}

int cmd_simulate(const GameOptions& gopt, const SimOptions& sopt, const json& cfg,
                 int replicates, int jobs, const std::string& out) {
  const NetworkGame game = gopt.resolve_game(cfg);
  const SimulationConfig sim = sopt.resolve_config(cfg);
  const fs::path dir = ensure_outdir(out);

  auto trajs = run_replicates(game, sim, replicates, jobs);
  for (int r = 0; r < replicates; ++r) {
    write_trajectory_csv((dir / rep_name(r)).string(), trajs[r], game);
    if (!trajs[r].snapshots.empty()) {
      char buf[48];
      std::snprintf(buf, sizeof(buf), "sim_rep%03d_snapshots.csv", r);
      write_snapshots_csv((dir / buf).string(), trajs[r], game);
    }
  }
  const Trajectory mean = average_trajectories(trajs);
  write_trajectory_csv((dir / "sim_mean.csv").string(), mean, game);

  const auto& last = mean.records.back();
  std::cout << "simulate: " << game.name() << ", " << replicates << " replicate(s), t = "
            << last.t << "\n";
  for (std::size_t i = 0; i < last.mean_policy.size(); ++i) {
    std::cout << "  population " << (i + 1) << " mean policy:";
    for (std::size_t a = 0; a < last.mean_policy[i].size(); ++a)
      std::cout << ' ' << game.actions(static_cast<int>(i)).labels[a] << '='
                << last.mean_policy[i][a];
    std::cout << "\n";
  }
  std::cout << "  wrote " << replicates << " replicate file(s) + sim_mean.csv to "
            << dir.string() << "\n";
  return kExitOk;
}

int cmd_ode(const GameOptions& gopt, const json& cfg, double lambda, double t0, double t1,
            std::size_t steps_per_decade, const std::string& closure, double mean0,
            double var0, const std::string& out,
            const CLI::Option* lambda_opt, const CLI::Option* t0_opt,
            const CLI::Option* t1_opt,
            const CLI::Option* spd_opt, const CLI::Option* closure_opt,
            const CLI::Option* mean_opt, const CLI::Option* var_opt) {
  const NetworkGame game = gopt.resolve_game(cfg);
  const double lam = resolve(lambda_opt, lambda, cfg, "ode.lambda", 1.0);
  const double t_start = resolve(t0_opt, t0, cfg, "ode.t0", 1.0);
  const double t_end = resolve(t1_opt, t1, cfg, "ode.t1", 1e4);
  if (!(t_start > 0.0) || !(t_end > t_start))
    throw CliError("ode: need 0 < t0 < t1", kExitConfig);
  const std::size_t spd =
      resolve(spd_opt, steps_per_decade, cfg, "ode.steps_per_decade", kDefaultStepsPerDecade);
  const ClosureVariant variant = closure_from_string(
      resolve(closure_opt, closure, cfg, "ode.closure", std::string("hessian")));
  const double m0 = resolve(mean_opt, mean0, cfg, "ode.mean", 1.0);
  const double v0 = resolve(var_opt, var0, cfg, "ode.variance", 0.01);
  if (v0 < 0.0) throw CliError("initial variance must be >= 0", kExitConfig);

  MomentState st;
  for (std::size_t i = 0; i < game.num_populations(); ++i) {
    st.mean.emplace_back(game.num_actions(static_cast<int>(i)), m0);
    st.variance.emplace_back(game.num_actions(static_cast<int>(i)), v0);
  }
  if (cfg.contains("ode") && cfg["ode"].contains("population_means"))
    st.mean = cfg["ode"]["population_means"].get<std::vector<std::vector<double>>>();
  if (cfg.contains("ode") && cfg["ode"].contains("population_variances"))
    st.variance = cfg["ode"]["population_variances"].get<std::vector<std::vector<double>>>();

  const fs::path dir = ensure_outdir(out);
  auto sol = integrate_moments(game, lam, st, t_start, t_end,
                               steps_for_span(t_start, t_end, spd), variant);
  write_moment_solution_csv((dir / "ode.csv").string(), sol, game, lam);
  const MomentLayout layout(game);
  const MomentState fin = layout.unpack(sol.states.back());
  std::cout << "ode: " << game.name() << ", t = " << sol.times.back() << "\n";
  for (std::size_t i = 0; i < fin.mean.size(); ++i) {
    std::vector<double> x(fin.mean[i].size());
    softmax_into(fin.mean[i], lam, x);
    std::cout << "  population " << (i + 1) << " model policy:";
    for (std::size_t a = 0; a < x.size(); ++a)
      std::cout << ' ' << game.actions(static_cast<int>(i)).labels[a] << '=' << x[a];
    std::cout << "\n";
  }
  std::cout << "  wrote ode.csv to " << dir.string() << "\n";
  return kExitOk;
}

int cmd_qre(const GameOptions& gopt, const json& cfg, double lambda, int starts,
            std::uint64_t seed, double tol, double merge_radius, const std::string& out,
            const CLI::Option* lambda_opt, const CLI::Option* starts_opt,
            const CLI::Option* seed_opt, const CLI::Option* tol_opt,
            const CLI::Option* merge_opt) {
  const NetworkGame game = gopt.resolve_game(cfg);
  const double lam = resolve(lambda_opt, lambda, cfg, "qre.lambda", 1.0);
  const int n_starts = resolve(starts_opt, starts, cfg, "qre.starts", 100);
  const std::uint64_t sd = resolve(seed_opt, seed, cfg, "qre.seed", default_seed());
  const double tl = resolve(tol_opt, tol, cfg, "qre.tol", kQreDefaultTol);
  const double mr = resolve(merge_opt, merge_radius, cfg, "qre.merge_radius",
                            kQreDefaultMergeRadius);

  auto clusters = enumerate_qre(game, lam, n_starts, sd, tl, mr);
  const fs::path dir = ensure_outdir(out);
  write_qre_csv((dir / "qre.csv").string(), clusters, game);

  std::cout << "qre: " << game.name() << ", lambda = " << lam << ", " << clusters.size()
            << " equilibrium cluster(s)\n";
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    std::cout << "  [" << c << "] residual=" << clusters[c].residual
              << " iterations=" << clusters[c].iterations << " method=" << clusters[c].method;
    for (std::size_t i = 0; i < clusters[c].policies.size(); ++i) {
      std::cout << "  pop" << (i + 1) << "=(";
      for (std::size_t a = 0; a < clusters[c].policies[i].size(); ++a)
        std::cout << (a ? ", " : "") << clusters[c].policies[i][a];
      std::cout << ")";
    }
    std::cout << "\n";
  }
  std::cout << "  wrote qre.csv to " << dir.string() << "\n";
  return kExitOk;
}

int cmd_compare(const GameOptions& gopt, const SimOptions& sopt, const json& cfg,
                int qre_starts, const std::string& out) {
  const NetworkGame game = gopt.resolve_game(cfg);
  const SimulationConfig sim = sopt.resolve_config(cfg);
  const fs::path dir = ensure_outdir(out);

  Trajectory traj = run_simulation(game, sim);
  write_trajectory_csv((dir / "abm.csv").string(), traj, game);

  // moment model seeded from the realized ensemble moments
  const MomentState init = moments_from_record(traj.records.front());
  const double t_end = double(sim.steps + 1);
  auto sol = integrate_moments(game, sim.lambda, init, 1.0, t_end,
                               steps_for_span(1.0, t_end, 2000));
  write_moment_solution_csv((dir / "ode.csv").string(), sol, game, sim.lambda);

  auto clusters = enumerate_qre(game, sim.lambda, qre_starts, sim.seed);

  const double gap = abm_ode_policy_gap(traj, sol, game, sim.lambda);
  const double resid = record_qre_residual(traj.records.back(), game, sim.lambda);
  std::size_t nearest = 0;
  const double eq_gap = nearest_equilibrium_gap(traj.records.back(), clusters, &nearest);

  // one plot per population/action: solid simulation, dashed model, dotted
  // equilibrium levels
  const MomentLayout layout(game);
  for (std::size_t i = 0; i < game.num_populations(); ++i) {
    for (std::size_t a = 0; a < game.num_actions(static_cast<int>(i)); ++a) {
      const std::string label = game.actions(static_cast<int>(i)).labels[a];
      LinePlot plot("population " + std::to_string(i + 1) + ", action " + label, "t",
                    "mean probability");
      plot.set_log_x(true);
      Series abm;
      for (const auto& rec : traj.records) {
        abm.x.push_back(double(rec.t));
        abm.y.push_back(rec.mean_policy[i][a]);
      }
      abm.label = "simulation";
      plot.add_series(std::move(abm));
      Series model;
      for (std::size_t g = 0; g < sol.times.size(); g += 23) {
        const MomentState st = layout.unpack(sol.states[g]);
        std::vector<double> x(st.mean[i].size());
        softmax_into(st.mean[i], sim.lambda, x);
        model.x.push_back(sol.times[g]);
        model.y.push_back(x[a]);
      }
      model.label = "model";
      model.style = LineStyle::dashed;
      plot.add_series(std::move(model));
      for (const auto& c : clusters) plot.add_hline(c.policies[i][a]);
      plot.render((dir / ("compare_p" + std::to_string(i + 1) + "_" + label + ".svg")).string());
    }
  }

  std::ofstream report(dir / "report.txt");
  report << "game: " << game.name() << "\nlambda: " << sim.lambda
         << "\nagents: " << sim.agents_per_population << "\nsteps: " << sim.steps
         << "\nsup_policy_gap_abm_vs_model: " << format_double(gap)
         << "\nterminal_qre_residual: " << format_double(resid)
         << "\nnearest_equilibrium: " << nearest
         << "\nnearest_equilibrium_gap: " << format_double(eq_gap) << "\n";
  report.close();

  std::cout << "compare: " << game.name() << "\n  sup |simulation - model| = " << gap
            << "\n  terminal fixed-point residual = " << resid
            << "\n  nearest equilibrium gap = " << eq_gap << " (cluster " << nearest
            << ")\n  wrote abm.csv, ode.csv, report.txt and SVG plots to " << dir.string()
            << "\n";
  return kExitOk;
}

int cmd_sweep(const GameOptions& gopt, const SimOptions& sopt, const json& cfg,
              std::vector<double> sds, int replicates, int jobs, double threshold,
              double mean_spread, const std::string& out, const CLI::Option* sds_opt,
              const CLI::Option* thresh_opt, const CLI::Option* spread_opt) {
  const NetworkGame game = gopt.resolve_game(cfg);
  SimulationConfig base = sopt.resolve_config(cfg);
  std::vector<double> sd_values =
      resolve(sds_opt, sds, cfg, "sweep.sds", std::vector<double>{0.05, 0.1});
  const double thresh =
      resolve(thresh_opt, threshold, cfg, "sweep.threshold", kDefaultHomogeneityThreshold);
  const double spread = resolve(spread_opt, mean_spread, cfg, "sweep.mean_spread", 0.25);
  if (sd_values.empty()) throw CliError("sweep: need at least one sd value", kExitConfig);

  const fs::path dir = ensure_outdir(out);
  std::ofstream agg(dir / "sweep.csv");
  agg << "sd,replicate,homogeneity_time,terminal_qre_residual,variance_slope\n";

  // per-population initial means drawn once per replicate, shared across sd
  // values so the comparison is paired
  std::vector<std::vector<std::vector<double>>> rep_means(replicates);
  for (int r = 0; r < replicates; ++r) {
    Rng rng(derive_seed(base.seed ^ 0x5745ULL, r));
    rep_means[r].resize(game.num_populations());
    for (std::size_t i = 0; i < game.num_populations(); ++i)
      rep_means[r][i].assign(game.num_actions(static_cast<int>(i)),
                             base.init.mean + spread * rng.normal());
  }

  std::ofstream varcsv(dir / "sweep_variance.csv");
  varcsv << "sd,t,mean_max_variance\n";
  LinePlot plot(game.name() + ": regret variance decay", "t", "max regret variance");
  plot.set_log_x(true);
  plot.set_log_y(true);

  std::cout << "sweep: " << game.name() << ", " << replicates << " replicate(s) per sd\n";
  double guide_anchor = -1.0;
  for (double sd : sd_values) {
    SimulationConfig cfg_sd = base;
    cfg_sd.init.sd = sd;
    std::vector<Trajectory> trajs(replicates);
    std::vector<SimulationConfig> cfgs(replicates, cfg_sd);
    for (int r = 0; r < replicates; ++r) {
      cfgs[r].init.population_means = rep_means[r];
      cfgs[r].seed = derive_seed(base.seed, r);
    }
    {
      std::atomic<int> next{0};
      const int workers_n = std::max(1, std::min(jobs, replicates));
      std::vector<std::thread> workers;
      std::vector<std::exception_ptr> errors(workers_n);
      for (int w = 0; w < workers_n; ++w)
        workers.emplace_back([&, w] {
          try {
            for (int r = next.fetch_add(1); r < replicates; r = next.fetch_add(1))
              trajs[r] = run_simulation(game, cfgs[r]);
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      for (auto& t : workers) t.join();
      for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    }

    double homog_sum = 0.0;
    int homog_count = 0;
    std::vector<double> mean_maxvar;
    std::vector<double> grid;
    for (int r = 0; r < replicates; ++r) {
      const auto series = max_variance_series(trajs[r]);
      if (grid.empty())
        for (const auto& [t, v] : series) {
          grid.push_back(t);
          mean_maxvar.push_back(0.0);
        }
      for (std::size_t k = 0; k < series.size(); ++k) mean_maxvar[k] += series[k].second;
      const auto homog = homogeneity_time(trajs[r], thresh);
      const double slope =
          loglog_slope(series, 10.0, std::min(1000.0, double(trajs[r].records.back().t)));
      const double resid = record_qre_residual(trajs[r].records.back(), game, cfg_sd.lambda);
      agg << format_double(sd) << ',' << r << ','
          << (homog ? std::to_string(*homog) : std::string("-1")) << ','
          << format_double(resid) << ',' << format_double(slope) << "\n";
      if (homog) {
        homog_sum += double(*homog);
        ++homog_count;
      }
    }
    for (auto& v : mean_maxvar) v /= double(replicates);
    Series s;
    s.x = grid;
    s.y = mean_maxvar;
    {
      std::ostringstream lbl;
      lbl << "sd = " << sd;
      s.label = lbl.str();
    }
    plot.add_series(std::move(s));
    for (std::size_t k = 0; k < grid.size(); ++k)
      varcsv << format_double(sd) << ',' << format_double(grid[k]) << ','
             << format_double(mean_maxvar[k]) << "\n";
    if (guide_anchor < 0 && mean_maxvar.size() > 10) guide_anchor = mean_maxvar[0];
    std::cout << "  sd = " << sd << ": mean homogeneity time = "
              << (homog_count ? homog_sum / homog_count : -1.0) << " (threshold " << thresh
              << ", " << homog_count << "/" << replicates << " reached)\n";
  }
  // slope -2 reference through the first curve's starting point
  if (guide_anchor > 0) {
    const double t1 = 1.0, t2 = double(base.steps + 1);
    plot.add_guide(t1, guide_anchor, t2, guide_anchor / ((t2 / t1) * (t2 / t1)));
  }
  plot.render((dir / "sweep_variance.svg").string());
  std::cout << "  wrote sweep.csv, sweep_variance.csv, sweep_variance.svg to "
            << dir.string() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"regret-matching dynamics on population network games"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "JSON config file (flags override)");

  // games list
  auto* games = app.add_subcommand("games", "game catalogue");
  games->require_subcommand(1);
  games->add_subcommand("list", "list builtin games");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "run ensemble simulations");
  GameOptions sim_game;
  SimOptions sim_opts;
  sim_game.attach(simulate);
  sim_opts.attach(simulate);
  int replicates = 1, jobs = 1;
  std::string out;
  auto* reps_opt = simulate->add_option("--replicates", replicates, "independent replicates");
  auto* jobs_opt = simulate->add_option("--jobs", jobs, "max concurrent replicates");
  simulate->add_option("--out", out, "output directory");

  // ode
  auto* ode = app.add_subcommand("ode", "integrate the moment model");
  GameOptions ode_game;
  ode_game.attach(ode);
  double ode_lambda = 1.0, ode_t0 = 1.0, ode_t1 = 1e4, ode_mean = 1.0, ode_var = 0.01;
  std::size_t ode_spd = kDefaultStepsPerDecade;
  std::string ode_closure = "hessian", ode_out;
  auto* ode_lambda_opt = ode->add_option("--lambda", ode_lambda, "softmax temperature");
  auto* ode_t0_opt = ode->add_option("--t0", ode_t0, "integration start time");
  auto* ode_t1_opt = ode->add_option("--t1", ode_t1, "integration end time");
  auto* ode_spd_opt = ode->add_option("--steps-per-decade", ode_spd, "RK4 steps per decade");
  auto* ode_closure_opt =
      ode->add_option("--closure", ode_closure, "closure variant: hessian | gradient_squared");
  auto* ode_mean_opt = ode->add_option("--mean", ode_mean, "initial mean regret");
  auto* ode_var_opt = ode->add_option("--variance", ode_var, "initial regret variance");
  ode->add_option("--out", ode_out, "output directory");

  // qre
  auto* qre = app.add_subcommand("qre", "enumerate quantal response equilibria");
  GameOptions qre_game;
  qre_game.attach(qre);
  double qre_lambda = 1.0, qre_tol = kQreDefaultTol, qre_merge = kQreDefaultMergeRadius;
  int qre_starts = 100;
  std::uint64_t qre_seed = 0;
  std::string qre_out;
  auto* qre_lambda_opt = qre->add_option("--lambda", qre_lambda, "softmax temperature");
  auto* qre_starts_opt = qre->add_option("--starts", qre_starts, "multistart count");
  auto* qre_seed_opt = qre->add_option("--seed", qre_seed, "multistart seed");
  auto* qre_tol_opt = qre->add_option("--tol", qre_tol, "fixed-point tolerance");
  auto* qre_merge_opt = qre->add_option("--merge-radius", qre_merge, "cluster merge radius");
  qre->add_option("--out", qre_out, "output directory");

  // compare
  auto* compare = app.add_subcommand("compare", "overlay simulation, model and equilibria");
  GameOptions cmp_game;
  SimOptions cmp_opts;
  cmp_game.attach(compare);
  cmp_opts.attach(compare);
  int cmp_qre_starts = 100;
  std::string cmp_out;
  compare->add_option("--qre-starts", cmp_qre_starts, "multistart count for equilibria");
  compare->add_option("--out", cmp_out, "output directory");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "heterogeneity sweep on a network");
  GameOptions swp_game;
  SimOptions swp_opts;
  swp_game.attach(sweep);
  swp_opts.attach(sweep);
  std::vector<double> swp_sds;
  int swp_replicates = 10, swp_jobs = 1;
  double swp_threshold = kDefaultHomogeneityThreshold, swp_spread = 0.25;
  std::string swp_out;
  auto* swp_sds_opt = sweep->add_option("--sds", swp_sds, "initial sd values to sweep");
  auto* swp_reps_opt = sweep->add_option("--replicates", swp_replicates, "replicates per sd");
  auto* swp_jobs_opt = sweep->add_option("--jobs", swp_jobs, "max concurrent replicates");
  auto* swp_thresh_opt =
      sweep->add_option("--threshold", swp_threshold, "homogeneity variance threshold");
  auto* swp_spread_opt =
      sweep->add_option("--mean-spread", swp_spread, "sd of per-population mean offsets");
  sweep->add_option("--out", swp_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    const json cfg = load_config(config_path);
    if (games->parsed()) return cmd_games_list();
    if (simulate->parsed()) {
      const int reps = resolve(reps_opt, replicates, cfg, "replicates", 1);
      const int j = resolve(jobs_opt, jobs, cfg, "jobs", 1);
      return cmd_simulate(sim_game, sim_opts, cfg, reps, j,
                          resolve(simulate->get_option("--out"), out, cfg, "out",
                                  std::string(".")));
    }
    if (ode->parsed())
      return cmd_ode(ode_game, cfg, ode_lambda, ode_t0, ode_t1, ode_spd, ode_closure,
                     ode_mean, ode_var,
                     resolve(ode->get_option("--out"), ode_out, cfg, "out", std::string(".")),
                     ode_lambda_opt, ode_t0_opt, ode_t1_opt, ode_spd_opt, ode_closure_opt,
                     ode_mean_opt, ode_var_opt);
    if (qre->parsed())
      return cmd_qre(qre_game, cfg, qre_lambda, qre_starts, qre_seed, qre_tol, qre_merge,
                     resolve(qre->get_option("--out"), qre_out, cfg, "out", std::string(".")),
                     qre_lambda_opt, qre_starts_opt, qre_seed_opt, qre_tol_opt, qre_merge_opt);
    if (compare->parsed())
      return cmd_compare(cmp_game, cmp_opts, cfg, cmp_qre_starts,
                         resolve(compare->get_option("--out"), cmp_out, cfg, "out",
                                 std::string(".")));
    if (sweep->parsed()) {
      const int reps = resolve(swp_reps_opt, swp_replicates, cfg, "replicates", 10);
      const int j = resolve(swp_jobs_opt, swp_jobs, cfg, "jobs", 1);
      return cmd_sweep(swp_game, swp_opts, cfg, swp_sds, reps, j, swp_threshold, swp_spread,
                       resolve(sweep->get_option("--out"), swp_out, cfg, "out",
                               std::string(".")),
                       swp_sds_opt, swp_thresh_opt, swp_spread_opt);
    }
    std::cerr << "no subcommand given\n";
    return kExitConfig;
  } catch (const CliError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code;
  } catch (const DivergenceError& e) {
    std::cerr << "numeric divergence: " << e.what() << " (t = " << e.t << ")\n";
    return kExitDivergence;
  } catch (const NotFoundError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    const std::string what = e.what();
    return what.find("open") != std::string::npos ? kExitIo : kExitConfig;
  }
}
