#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "pngdyn/error.hpp"
#include "pngdyn/game.hpp"
#include "pngdyn/rng.hpp"

namespace pngdyn {

enum class GraphKind { edge, complete, ring, watts_strogatz };

inline std::string to_string(GraphKind k) {
  switch (k) {
    case GraphKind::edge: return "edge";
    case GraphKind::complete: return "complete";
    case GraphKind::ring: return "ring";
    case GraphKind::watts_strogatz: return "watts_strogatz";
  }
  return "?";
}

inline GraphKind graph_kind_from_string(std::string_view s) {
  if (s == "edge") return GraphKind::edge;
  if (s == "complete") return GraphKind::complete;
  if (s == "ring") return GraphKind::ring;
  if (s == "watts_strogatz" || s == "ws") return GraphKind::watts_strogatz;
  throw NotFoundError("unknown graph kind '" + std::string(s) + "'");
}

struct GraphSpec {
  GraphKind kind = GraphKind::edge;
  int n = 2;                 // population count
  int k = 4;                 // mean degree (Watts-Strogatz only; even)
  double beta = 0.3;         // rewiring probability (Watts-Strogatz only)
  std::uint64_t seed = 0;

  void validate() const {
    if (n < 2) throw DomainError("GraphSpec: n must be >= 2");
    if (kind == GraphKind::edge && n != 2)
      throw DomainError("GraphSpec: kind 'edge' requires n = 2");
    if (kind == GraphKind::watts_strogatz) {
      if (k % 2 != 0) throw DomainError("GraphSpec: Watts-Strogatz k must be even");
      if (k < 2 || k >= n) throw DomainError("GraphSpec: require 2 <= k < n");
      if (beta < 0.0 || beta > 1.0)
        throw DomainError("GraphSpec: beta must lie in [0, 1]");
    }
  }
};

using EdgeList = std::vector<std::pair<int, int>>;

namespace detail {

inline bool is_connected(int n, const EdgeList& edges) {
  std::vector<std::vector<int>> adj(n);
  for (auto [a, b] : edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  std::vector<bool> seen(n, false);
  std::vector<int> stack = {0};
  seen[0] = true;
  int count = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int w : adj[v])
      if (!seen[w]) {
        seen[w] = true;
        ++count;
        stack.push_back(w);
      }
  }
  return count == n;
}

// One Watts-Strogatz draw: ring lattice (each node linked to its k/2 nearest
// neighbors per side), then each lattice edge (i, i+m) is rewired with
// probability beta by replacing the far endpoint with a uniform draw among
// nodes that are neither i nor already adjacent to i.
inline EdgeList watts_strogatz_draw(int n, int k, double beta, Rng& rng) {
  std::vector<std::set<int>> adj(n);
  auto add = [&](int a, int b) {
    adj[a].insert(b);
    adj[b].insert(a);
  };
  auto remove = [&](int a, int b) {
    adj[a].erase(b);
    adj[b].erase(a);
  };
  for (int i = 0; i < n; ++i)
    for (int m = 1; m <= k / 2; ++m) add(i, (i + m) % n);
  for (int m = 1; m <= k / 2; ++m) {
    for (int i = 0; i < n; ++i) {
      const int far = (i + m) % n;
      if (!adj[i].count(far)) continue;  // already rewired away
      if (rng.uniform01() >= beta) continue;
      std::vector<int> candidates;
      candidates.reserve(n);
      for (int w = 0; w < n; ++w)
        if (w != i && !adj[i].count(w)) candidates.push_back(w);
      if (candidates.empty()) continue;  // node saturated; keep the edge
      const int pick = candidates[rng.uniform_below(candidates.size())];
      remove(i, far);
      add(i, pick);
    }
  }
  EdgeList edges;
  for (int a = 0; a < n; ++a)
    for (int b : adj[a])
      if (a < b) edges.emplace_back(a, b);
  return edges;
}

}  // namespace detail

// Deterministic given the spec (including seed). Watts-Strogatz redraws with a
// fresh sub-seed until connected, capped at 100 attempts.
inline EdgeList generate_graph(const GraphSpec& spec) {
  spec.validate();
  EdgeList edges;
  switch (spec.kind) {
    case GraphKind::edge:
      edges = {{0, 1}};
      break;
    case GraphKind::complete:
      for (int a = 0; a < spec.n; ++a)
        for (int b = a + 1; b < spec.n; ++b) edges.emplace_back(a, b);
      break;
    case GraphKind::ring:
      if (spec.n == 2) {
        edges = {{0, 1}};  // a 2-ring degenerates to one edge
        break;
      }
      for (int a = 0; a < spec.n; ++a) edges.emplace_back(std::min(a, (a + 1) % spec.n),
                                                          std::max(a, (a + 1) % spec.n));
      break;
    case GraphKind::watts_strogatz: {
      for (int attempt = 0; attempt < 100; ++attempt) {
        Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(attempt)));
        edges = detail::watts_strogatz_draw(spec.n, spec.k, spec.beta, rng);
        if (detail::is_connected(spec.n, edges)) {
          std::sort(edges.begin(), edges.end());
          return edges;
        }
      }
      throw GenerationError("generate_graph: no connected Watts-Strogatz draw in 100 attempts");
    }
  }
  std::sort(edges.begin(), edges.end());
  return edges;
}

// Places one bimatrix on every edge: the lower-id endpoint takes the row role.
// All populations share the template's first action space; requires a square
// shared action set unless the two spaces coincide.
inline NetworkGame assign_payoffs(const EdgeList& edges, int n_populations,
                                  const NetworkGame& bimatrix_template) {
  if (bimatrix_template.num_populations() != 2 || bimatrix_template.edges().size() != 1)
    throw DomainError("assign_payoffs: template must be a 2-population bimatrix game");
  const Edge& t = bimatrix_template.edges()[0];
  if (bimatrix_template.num_actions(0) != bimatrix_template.num_actions(1))
    throw ShapeError("assign_payoffs: template action spaces must have equal size");
  std::vector<ActionSpace> pops(n_populations, bimatrix_template.actions(0));
  std::vector<Edge> out;
  out.reserve(edges.size());
  for (auto [a, b] : edges) {
    const int lo = std::min(a, b), hi = std::max(a, b);
    out.push_back({lo, hi, t.payoff_ij, t.payoff_ji});
  }
  return NetworkGame(bimatrix_template.name() + "@" + std::to_string(n_populations),
                     std::move(pops), std::move(out));
}

}  // namespace pngdyn
