#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "pngdyn/abm.hpp"
#include "pngdyn/error.hpp"
#include "pngdyn/game.hpp"
#include "pngdyn/ode.hpp"
#include "pngdyn/qre.hpp"

namespace pngdyn {

// All CSV output uses '.' decimals, ',' separators, a header row and 17
// significant digits, so parsing a file back reproduces the doubles exactly.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  return f;
}

}  // namespace detail

inline constexpr const char* kTrajectoryHeader =
    "t,population,action,mean_policy,mean_regret,regret_variance";

inline void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                                 const NetworkGame& game) {
  auto f = detail::open_out(path);
  f << kTrajectoryHeader << "\n";
  for (const auto& rec : traj.records) {
    for (std::size_t i = 0; i < rec.mean_policy.size(); ++i) {
      const auto& labels = game.actions(static_cast<int>(i)).labels;
      for (std::size_t a = 0; a < rec.mean_policy[i].size(); ++a) {
        f << rec.t << ',' << (i + 1) << ',' << labels[a] << ','
          << format_double(rec.mean_policy[i][a]) << ','
          << format_double(rec.mean_regret[i][a]) << ','
          << format_double(rec.regret_variance[i][a]) << "\n";
      }
    }
  }
}

// Rebuilds a trajectory from the shared CSV schema. Action labels are returned
// alongside so callers can check consistency against a game definition.
struct ParsedTrajectory {
  Trajectory trajectory;
  std::vector<std::vector<std::string>> action_labels;  // per population
};

inline ParsedTrajectory read_trajectory_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open for reading: " + path);
  std::string line;
  if (!std::getline(f, line)) throw std::runtime_error("empty CSV: " + path);
  if (line.find("t,population,action") != 0)
    throw std::runtime_error("unexpected CSV header in " + path);

  ParsedTrajectory out;
  TrajectoryRecord* cur = nullptr;
  std::string cur_t_field;  // records group on the verbatim t field
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    const auto cols = detail::split_csv_line(line);
    if (cols.size() != 6) throw std::runtime_error("malformed CSV row in " + path);
    const long t = std::strtol(cols[0].c_str(), nullptr, 10);
    const std::size_t pop = static_cast<std::size_t>(std::strtol(cols[1].c_str(), nullptr, 10)) - 1;
    if (!cur || cur_t_field != cols[0]) {
      cur_t_field = cols[0];
      out.trajectory.records.emplace_back();
      cur = &out.trajectory.records.back();
      cur->t = t;
    }
    while (cur->mean_policy.size() <= pop) {
      cur->mean_policy.emplace_back();
      cur->mean_regret.emplace_back();
      cur->regret_variance.emplace_back();
    }
    while (out.action_labels.size() <= pop) out.action_labels.emplace_back();
    if (out.trajectory.records.size() == 1)
      out.action_labels[pop].push_back(cols[2]);
    cur->mean_policy[pop].push_back(std::strtod(cols[3].c_str(), nullptr));
    cur->mean_regret[pop].push_back(std::strtod(cols[4].c_str(), nullptr));
    cur->regret_variance[pop].push_back(std::strtod(cols[5].c_str(), nullptr));
  }
  return out;
}

inline void write_snapshots_csv(const std::string& path, const Trajectory& traj,
                                const NetworkGame& game) {
  auto f = detail::open_out(path);
  f << "t,population,agent,action,regret\n";
  for (const auto& s : traj.snapshots) {
    const auto& labels = game.actions(s.population).labels;
    for (std::size_t k = 0; k < s.regrets.size(); ++k)
      for (std::size_t a = 0; a < s.regrets[k].size(); ++a)
        f << s.t << ',' << (s.population + 1) << ',' << k << ',' << labels[a] << ','
          << format_double(s.regrets[k][a]) << "\n";
  }
}

// Writes a moment-system solution in the trajectory schema (policies are the
// softmax of the mean regrets), decimated to at most max_rows grid points.
inline void write_moment_solution_csv(const std::string& path, const OdeSolution& sol,
                                      const NetworkGame& game, double lambda,
                                      std::size_t max_rows = 2000) {
  const MomentLayout layout(game);
  auto f = detail::open_out(path);
  f << kTrajectoryHeader << "\n";
  const std::size_t n = sol.times.size();
  const std::size_t stride = std::max<std::size_t>(1, n / max_rows);
  for (std::size_t g = 0; g < n; ++g) {
    if (g % stride != 0 && g != n - 1) continue;
    const MomentState st = layout.unpack(sol.states[g]);
    for (std::size_t i = 0; i < st.mean.size(); ++i) {
      std::vector<double> x(st.mean[i].size());
      softmax_into(st.mean[i], lambda, x);
      const auto& labels = game.actions(static_cast<int>(i)).labels;
      for (std::size_t a = 0; a < x.size(); ++a)
        f << format_double(sol.times[g]) << ',' << (i + 1) << ',' << labels[a] << ','
          << format_double(x[a]) << ',' << format_double(st.mean[i][a]) << ','
          << format_double(st.variance[i][a]) << "\n";
    }
  }
}

inline void write_qre_csv(const std::string& path, const std::vector<QreSolution>& clusters,
                          const NetworkGame& game) {
  auto f = detail::open_out(path);
  f << "cluster,lambda,population,action,probability,residual,iterations,method\n";
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    const auto& sol = clusters[c];
    for (std::size_t i = 0; i < sol.policies.size(); ++i) {
      const auto& labels = game.actions(static_cast<int>(i)).labels;
      for (std::size_t a = 0; a < sol.policies[i].size(); ++a)
        f << c << ',' << format_double(sol.lambda) << ',' << (i + 1) << ',' << labels[a]
          << ',' << format_double(sol.policies[i][a]) << ','
          << format_double(sol.residual) << ',' << sol.iterations << ',' << sol.method
          << "\n";
    }
  }
}

}  // namespace pngdyn
