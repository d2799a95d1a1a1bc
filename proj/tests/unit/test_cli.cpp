#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "pngdyn/csv.hpp"

using namespace pngdyn;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("pngdyn_cli_" + std::to_string(std::rand()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

int run(const std::string& args) {
  const std::string cmd = std::string(PNGDYN_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("cli: games list") { CHECK(run("games list") == 0); }

TEST_CASE("cli: simulate writes replicate files plus the average") {
  TempDir tmp;
  const std::string out = tmp.path.string();
  CHECK(run("simulate --game PD --agents 20 --steps 50 --replicates 3 --seed 7 --out " +
            out) == 0);
  CHECK(fs::exists(tmp.path / "sim_rep000.csv"));
  CHECK(fs::exists(tmp.path / "sim_rep001.csv"));
  CHECK(fs::exists(tmp.path / "sim_rep002.csv"));
  CHECK(fs::exists(tmp.path / "sim_mean.csv"));

  // reruns are byte-identical
  TempDir tmp2;
  CHECK(run("simulate --game PD --agents 20 --steps 50 --replicates 3 --seed 7 --out " +
            tmp2.path.string()) == 0);
  CHECK(slurp(tmp.path / "sim_mean.csv") == slurp(tmp2.path / "sim_mean.csv"));
  CHECK(slurp(tmp.path / "sim_rep002.csv") == slurp(tmp2.path / "sim_rep002.csv"));
}

TEST_CASE("cli: zero-spread simulation has an identically zero variance column") {
  TempDir tmp;
  CHECK(run("simulate --game RPS --agents 10 --steps 20 --sd 0 --seed 1 --out " +
            tmp.path.string()) == 0);
  auto parsed = read_trajectory_csv((tmp.path / "sim_rep000.csv").string());
  for (const auto& rec : parsed.trajectory.records)
    for (const auto& pop : rec.regret_variance)
      for (double v : pop) CHECK(v == 0.0);
}

TEST_CASE("cli: ode command integrates the closed-form variance") {
  TempDir tmp;
  CHECK(run("ode --game PD --t1 3 --mean 0 --variance 9 --steps-per-decade 2000 --out " +
            tmp.path.string()) == 0);
  auto parsed = read_trajectory_csv((tmp.path / "ode.csv").string());
  const auto& last = parsed.trajectory.records.back();
  CHECK(last.regret_variance[0][0] == doctest::Approx(1.0).epsilon(1e-6));

  // nonunit start time: Var(t1) = Var(t0) * (t0/t1)^2
  TempDir tmp2;
  CHECK(run("ode --game PD --t0 2 --t1 6 --mean 0 --variance 9 --steps-per-decade 2000 "
            "--out " +
            tmp2.path.string()) == 0);
  auto parsed2 = read_trajectory_csv((tmp2.path / "ode.csv").string());
  CHECK(parsed2.trajectory.records.back().regret_variance[1][1] ==
        doctest::Approx(1.0).epsilon(1e-6));
  CHECK(run("ode --game PD --t0 5 --t1 2") == 2);  // invalid span
}

TEST_CASE("cli: qre enumeration output") {
  TempDir tmp;
  CHECK(run("qre --game BoS --lambda 1 --starts 200 --out " + tmp.path.string()) == 0);
  std::ifstream f(tmp.path / "qre.csv");
  std::string line;
  std::getline(f, line);
  CHECK(line == "cluster,lambda,population,action,probability,residual,iterations,method");
  std::set<std::string> clusters;
  while (std::getline(f, line))
    if (!line.empty()) clusters.insert(line.substr(0, line.find(',')));
  CHECK(clusters.size() == 3);

  TempDir tmp2;
  CHECK(run("qre --game RPS --lambda 1 --starts 50 --out " + tmp2.path.string()) == 0);
  std::ifstream f2(tmp2.path / "qre.csv");
  std::getline(f2, line);
  std::set<std::string> c2;
  while (std::getline(f2, line))
    if (!line.empty()) c2.insert(line.substr(0, line.find(',')));
  CHECK(c2.size() == 1);
}

TEST_CASE("cli: compare emits plots and a report") {
  TempDir tmp;
  CHECK(run("compare --game PD --agents 50 --steps 200 --seed 5 --qre-starts 30 --out " +
            tmp.path.string()) == 0);
  CHECK(fs::exists(tmp.path / "abm.csv"));
  CHECK(fs::exists(tmp.path / "ode.csv"));
  CHECK(fs::exists(tmp.path / "report.txt"));
  CHECK(fs::exists(tmp.path / "compare_p1_C.svg"));
  CHECK(fs::exists(tmp.path / "compare_p2_D.svg"));
  const std::string report = slurp(tmp.path / "report.txt");
  CHECK(report.find("sup_policy_gap_abm_vs_model") != std::string::npos);
  CHECK(report.find("terminal_qre_residual") != std::string::npos);

  // the SVG is a pure view: numeric outputs identical with plots present
  auto parsed = read_trajectory_csv((tmp.path / "abm.csv").string());
  CHECK(parsed.trajectory.records.size() > 10);
}

TEST_CASE("cli: sweep aggregates homogeneity times") {
  TempDir tmp;
  CHECK(run("sweep --game PD --graph watts_strogatz --graph-n 10 --graph-k 4 "
            "--graph-beta 0.3 --agents 20 --steps 200 --replicates 2 --sds 0.05 "
            "--sds 0.1 --seed 9 --out " +
            tmp.path.string()) == 0);
  CHECK(fs::exists(tmp.path / "sweep.csv"));
  CHECK(fs::exists(tmp.path / "sweep_variance.csv"));
  CHECK(fs::exists(tmp.path / "sweep_variance.svg"));
  std::ifstream f(tmp.path / "sweep.csv");
  std::string line;
  std::getline(f, line);
  CHECK(line == "sd,replicate,homogeneity_time,terminal_qre_residual,variance_slope");
  int rows = 0;
  while (std::getline(f, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 4);  // 2 sds x 2 replicates
}

TEST_CASE("cli: config file keys with flag overrides") {
  TempDir tmp;
  {
    std::ofstream cfg(tmp.path / "cfg.json");
    cfg << R"({"game": "PD", "sim": {"agents": 15, "steps": 40, "seed": 2},
               "replicates": 2, "out": ")"
        << tmp.path.string() << R"("})";
  }
  CHECK(run("--config " + (tmp.path / "cfg.json").string() + " simulate") == 0);
  CHECK(fs::exists(tmp.path / "sim_rep001.csv"));
  // flag overrides the config's replicate count
  TempDir tmp2;
  CHECK(run("--config " + (tmp.path / "cfg.json").string() +
            " simulate --replicates 1 --out " + tmp2.path.string()) == 0);
  CHECK(fs::exists(tmp2.path / "sim_rep000.csv"));
  CHECK_FALSE(fs::exists(tmp2.path / "sim_rep001.csv"));
}

TEST_CASE("cli: error exit codes") {
  CHECK(run("simulate --game NOPE") == 2);                       // unknown game
  CHECK(run("simulate --game PD --lambda -1") == 2);             // domain error
  CHECK(run("qre --game PD --tol -1") == 2);                     // domain error
  CHECK(run("simulate --game-file /definitely/missing.json") == 4);
  CHECK(run("totally-unknown-subcommand") != 0);
}
