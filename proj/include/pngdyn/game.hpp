#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pngdyn/error.hpp"
#include "pngdyn/matrix.hpp"
#include "pngdyn/policy.hpp"

namespace pngdyn {

// Finite, ordered action set of one population.
struct ActionSpace {
  std::vector<std::string> labels;

  std::size_t size() const { return labels.size(); }

  void validate() const {
    if (labels.size() < 2) throw DomainError("ActionSpace: need at least 2 actions");
    for (std::size_t a = 0; a < labels.size(); ++a)
      for (std::size_t b = a + 1; b < labels.size(); ++b)
        if (labels[a] == labels[b])
          throw DomainError("ActionSpace: duplicate action label '" + labels[a] + "'");
  }
};

// One undirected edge carrying both directed payoff matrices, each stored in
// row-form for its own population: payoff_ij is |S_i| x |S_j| with population i
// as the row player, payoff_ji is |S_j| x |S_i| with population j as row player.
struct Edge {
  int i = 0;
  int j = 0;
  Matrix payoff_ij;
  Matrix payoff_ji;
};

// Game on a population graph. Populations are indexed 0..n-1 internally;
// external formats use 1-based ids. Immutable after construction.
class NetworkGame {
 public:
  NetworkGame(std::string name, std::vector<ActionSpace> populations,
              std::vector<Edge> edges)
      : name_(std::move(name)),
        populations_(std::move(populations)),
        edges_(std::move(edges)) {
    validate();
    build_incidence();
  }

  const std::string& name() const { return name_; }
  std::size_t num_populations() const { return populations_.size(); }
  const ActionSpace& actions(int i) const { return populations_[i]; }
  std::size_t num_actions(int i) const { return populations_[i].size(); }
  const std::vector<Edge>& edges() const { return edges_; }

  // Neighbor populations V_i.
  const std::vector<int>& neighbors(int i) const { return neighbors_[i]; }
  std::size_t degree(int i) const { return neighbors_[i].size(); }

  // Row-form payoff matrix of population i against neighbor j (|S_i| x |S_j|).
  const Matrix& payoff(int i, int j) const {
    auto it = directed_.find({i, j});
    if (it == directed_.end())
      throw InputError("NetworkGame: populations " + std::to_string(i + 1) + " and " +
                       std::to_string(j + 1) + " are not adjacent");
    return *it->second;
  }

 private:
  void validate() const {
    if (populations_.size() < 2)
      throw DomainError("NetworkGame: need at least 2 populations");
    for (const auto& p : populations_) p.validate();
    std::map<std::pair<int, int>, bool> seen;
    for (const auto& e : edges_) {
      const int n = static_cast<int>(populations_.size());
      if (e.i < 0 || e.i >= n || e.j < 0 || e.j >= n)
        throw ShapeError("NetworkGame: edge endpoint out of range");
      if (e.i == e.j) throw DomainError("NetworkGame: self-loop");
      auto key = std::minmax(e.i, e.j);
      if (seen.count({key.first, key.second}))
        throw DomainError("NetworkGame: duplicate edge");
      seen[{key.first, key.second}] = true;
      if (e.payoff_ij.rows() != populations_[e.i].size() ||
          e.payoff_ij.cols() != populations_[e.j].size())
        throw ShapeError("NetworkGame: payoff_ij has wrong shape");
      if (e.payoff_ji.rows() != populations_[e.j].size() ||
          e.payoff_ji.cols() != populations_[e.i].size())
        throw ShapeError("NetworkGame: payoff_ji has wrong shape");
      if (!e.payoff_ij.all_finite() || !e.payoff_ji.all_finite())
        throw NumericError("NetworkGame: non-finite payoff entry");
    }
    // every population needs at least one neighbor
    std::vector<int> deg(populations_.size(), 0);
    for (const auto& e : edges_) {
      ++deg[e.i];
      ++deg[e.j];
    }
    for (std::size_t i = 0; i < deg.size(); ++i)
      if (deg[i] == 0)
        throw DomainError("NetworkGame: population " + std::to_string(i + 1) +
                          " has no neighbors");
  }

  void build_incidence() {
    neighbors_.assign(populations_.size(), {});
    for (const auto& e : edges_) {
      neighbors_[e.i].push_back(e.j);
      neighbors_[e.j].push_back(e.i);
      directed_[{e.i, e.j}] = &e.payoff_ij;
      directed_[{e.j, e.i}] = &e.payoff_ji;
    }
  }

  std::string name_;
  std::vector<ActionSpace> populations_;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> neighbors_;
  std::map<std::pair<int, int>, const Matrix*> directed_;
};

// Weights and optional per-edge potential used by the game-class verifiers.
struct GameClassSpec {
  std::vector<double> weights;               // one positive weight per population
  std::vector<Matrix> potentials;            // one |S_i| x |S_j| matrix per edge

  void validate_weights(std::size_t n_pops) const {
    if (weights.size() != n_pops)
      throw ShapeError("GameClassSpec: one weight per population required");
    for (double w : weights)
      if (!(w > 0.0)) throw DomainError("GameClassSpec: weights must be positive");
  }
};

// ---------------------------------------------------------------------------
// Builtin two-population games (standard bimatrices; row player = population 1).
// ---------------------------------------------------------------------------

namespace detail {

inline NetworkGame make_bimatrix_game(std::string name, ActionSpace a1, ActionSpace a2,
                                      Matrix payoff_1, Matrix payoff_2_row_form) {
  std::vector<Edge> edges;
  edges.push_back({0, 1, std::move(payoff_1), std::move(payoff_2_row_form)});
  return NetworkGame(std::move(name), {std::move(a1), std::move(a2)}, std::move(edges));
}

}  // namespace detail

// Names: PE (presidential election), RPS (rock-paper-scissors),
// AMP (asymmetric matching pennies), PD (prisoner's dilemma), SH (stag hunt),
// BoS (battle of the sexes). Column players' payoffs are stored transposed,
// in row-form for their own population.
inline NetworkGame builtin_game(std::string_view name) {
  if (name == "PE") {
    return detail::make_bimatrix_game(
        "PE", {{"E", "S"}}, {{"M", "T"}},
        Matrix::from_rows({{3, -1}, {-2, 1}}),
        Matrix::from_rows({{-3, 2}, {1, -1}}));
  }
  if (name == "RPS") {
    Matrix a = Matrix::from_rows({{0, 1, -1}, {-1, 0, 1}, {1, -1, 0}});
    Matrix b(3, 3);
    for (std::size_t r = 0; r < 3; ++r)
      for (std::size_t c = 0; c < 3; ++c) b(r, c) = -a(c, r);
    return detail::make_bimatrix_game("RPS", {{"R", "P", "S"}}, {{"R", "P", "S"}},
                                      std::move(a), std::move(b));
  }
  if (name == "AMP") {
    return detail::make_bimatrix_game(
        "AMP", {{"H", "T"}}, {{"H", "T"}},
        Matrix::from_rows({{2, -2}, {0, 2}}),
        Matrix::from_rows({{-4, 0}, {4, -4}}));
  }
  if (name == "PD") {
    Matrix a = Matrix::from_rows({{6, 2}, {8, 2}});
    return detail::make_bimatrix_game("PD", {{"C", "D"}}, {{"C", "D"}}, a, a);
  }
  if (name == "SH") {
    Matrix a = Matrix::from_rows({{10, 1}, {8, 5}});
    return detail::make_bimatrix_game("SH", {{"S", "H"}}, {{"S", "H"}}, a, a);
  }
  if (name == "BoS") {
    return detail::make_bimatrix_game(
        "BoS", {{"F", "B"}}, {{"F", "B"}},
        Matrix::from_rows({{10, 0}, {0, 5}}),
        Matrix::from_rows({{5, 0}, {0, 10}}));
  }
  throw NotFoundError("unknown builtin game '" + std::string(name) +
                      "' (known: PE, RPS, AMP, PD, SH, BoS)");
}

inline const std::vector<std::string>& builtin_game_names() {
  static const std::vector<std::string> names = {"PE", "RPS", "AMP", "PD", "SH", "BoS"};
  return names;
}

// ---------------------------------------------------------------------------
// Expected payoffs
// ---------------------------------------------------------------------------

// u_i = (1/|V_i|) sum_{j in V_i} A_ij xbar_j. Fast path: profile holds one mean
// policy per population (only neighbors of i are read).
inline std::vector<double> mean_payoff_from_profile(const NetworkGame& game, int i,
                                                    std::span<const std::vector<double>> profile) {
  const auto& nbrs = game.neighbors(i);
  std::vector<double> u(game.num_actions(i), 0.0);
  const double inv_deg = 1.0 / static_cast<double>(nbrs.size());
  for (int j : nbrs) {
    const Matrix& a = game.payoff(i, j);
    if (profile[j].size() != a.cols())
      throw ShapeError("mean_payoff: neighbor policy has wrong dimension");
    mat_vec_add(a, profile[j], inv_deg, u);
  }
  return u;
}

// Checked variant taking exactly the neighbor mean policies of population i.
inline std::vector<double> mean_payoff_vector(const NetworkGame& game, int i,
                                              const std::map<int, PolicyVector>& neighbor_means) {
  const auto& nbrs = game.neighbors(i);
  for (int j : nbrs)
    if (!neighbor_means.count(j))
      throw InputError("mean_payoff_vector: missing mean policy for neighbor " +
                       std::to_string(j + 1));
  if (neighbor_means.size() != nbrs.size())
    throw InputError("mean_payoff_vector: policies supplied for non-neighbors");
  std::vector<double> u(game.num_actions(i), 0.0);
  const double inv_deg = 1.0 / static_cast<double>(nbrs.size());
  for (int j : nbrs) {
    const Matrix& a = game.payoff(i, j);
    const PolicyVector& x = neighbor_means.at(j);
    if (x.size() != a.cols())
      throw ShapeError("mean_payoff_vector: neighbor policy has wrong dimension");
    mat_vec_add(a, x.probabilities(), inv_deg, u);
  }
  return u;
}

// ---------------------------------------------------------------------------
// Game-class verification
// ---------------------------------------------------------------------------

// Weighted zero-sum defect: max over edges (i,j) of the max-norm of
// w_i A_ij + w_j A_ji^T. Zero means the weighted payoffs cancel for every
// mixed profile.
inline double verify_weighted_zero_sum(const NetworkGame& game,
                                       std::span<const double> weights) {
  GameClassSpec spec;
  spec.weights.assign(weights.begin(), weights.end());
  spec.validate_weights(game.num_populations());
  double residual = 0.0;
  for (const auto& e : game.edges()) {
    for (std::size_t a = 0; a < e.payoff_ij.rows(); ++a)
      for (std::size_t b = 0; b < e.payoff_ij.cols(); ++b) {
        const double v = weights[e.i] * e.payoff_ij(a, b) + weights[e.j] * e.payoff_ji(b, a);
        residual = std::max(residual, std::fabs(v));
      }
  }
  return residual;
}

// Weighted potential defect: max violation of the per-edge difference identity
//   A_ij(a,b) - A_ij(a',b) = w_i [U(a,b) - U(a',b)]
// over all pure profiles and both roles of every edge (U indexed by the
// lower-id population's action first).
inline double verify_weighted_potential(const NetworkGame& game,
                                        std::span<const double> weights,
                                        std::span<const Matrix> potentials) {
  GameClassSpec spec;
  spec.weights.assign(weights.begin(), weights.end());
  spec.validate_weights(game.num_populations());
  if (potentials.size() != game.edges().size())
    throw ShapeError("verify_weighted_potential: one potential matrix per edge required");
  double residual = 0.0;
  for (std::size_t k = 0; k < game.edges().size(); ++k) {
    const Edge& e = game.edges()[k];
    const Matrix& u = potentials[k];
    const std::size_t si = e.payoff_ij.rows();
    const std::size_t sj = e.payoff_ij.cols();
    if (u.rows() != si || u.cols() != sj)
      throw ShapeError("verify_weighted_potential: potential matrix has wrong shape");
    // role i: vary own action a -> a' at fixed opponent action b
    for (std::size_t b = 0; b < sj; ++b)
      for (std::size_t a = 0; a < si; ++a)
        for (std::size_t a2 = 0; a2 < si; ++a2) {
          const double lhs = e.payoff_ij(a, b) - e.payoff_ij(a2, b);
          const double rhs = weights[e.i] * (u(a, b) - u(a2, b));
          residual = std::max(residual, std::fabs(lhs - rhs));
        }
    // role j: vary own action b -> b' at fixed opponent action a
    for (std::size_t a = 0; a < si; ++a)
      for (std::size_t b = 0; b < sj; ++b)
        for (std::size_t b2 = 0; b2 < sj; ++b2) {
          const double lhs = e.payoff_ji(b, a) - e.payoff_ji(b2, a);
          const double rhs = weights[e.j] * (u(a, b) - u(a, b2));
          residual = std::max(residual, std::fabs(lhs - rhs));
        }
  }
  return residual;
}

struct WeightSearchResult {
  std::vector<double> weights;
  double residual = 0.0;
};

// Least-squares search for zero-sum weights of a 2-population game: the best
// (w1, w2) is the smallest eigenvector of the 2x2 Gram matrix of
// [vec(A_12), vec(A_21^T)]. Returns nothing if that vector is not positive.
inline std::optional<WeightSearchResult> find_zero_sum_weights(const NetworkGame& game) {
  if (game.num_populations() != 2 || game.edges().size() != 1)
    throw DomainError("find_zero_sum_weights: only 2-population single-edge games");
  const Edge& e = game.edges()[0];
  double g11 = 0, g12 = 0, g22 = 0;
  for (std::size_t a = 0; a < e.payoff_ij.rows(); ++a)
    for (std::size_t b = 0; b < e.payoff_ij.cols(); ++b) {
      const double v1 = e.payoff_ij(a, b);
      const double v2 = e.payoff_ji(b, a);
      g11 += v1 * v1;
      g12 += v1 * v2;
      g22 += v2 * v2;
    }
  // smallest eigenvector of [[g11,g12],[g12,g22]]
  const double tr = g11 + g22;
  const double det = g11 * g22 - g12 * g12;
  const double lam = 0.5 * (tr - std::sqrt(std::max(0.0, tr * tr - 4.0 * det)));
  double w1, w2;
  if (std::fabs(g12) > 1e-300) {
    w1 = lam - g22;
    w2 = g12;
  } else {
    // diagonal Gram: pick the axis with the smaller eigenvalue
    w1 = (g11 <= g22) ? 1.0 : 0.0;
    w2 = (g11 <= g22) ? 0.0 : 1.0;
  }
  if (w1 < 0.0) {
    w1 = -w1;
    w2 = -w2;
  }
  if (!(w1 > 0.0) || !(w2 > 0.0)) return std::nullopt;
  // normalize so the smaller weight is 1
  const double scale = 1.0 / std::min(w1, w2);
  WeightSearchResult res;
  res.weights = {w1 * scale, w2 * scale};
  res.residual = verify_weighted_zero_sum(game, res.weights);
  return res;
}

}  // namespace pngdyn
