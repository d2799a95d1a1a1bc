#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "pngdyn/error.hpp"
#include "pngdyn/game.hpp"
#include "pngdyn/policy.hpp"
#include "pngdyn/rng.hpp"

namespace pngdyn {

using PolicyProfile = std::vector<std::vector<double>>;

namespace detail {

inline void validate_profile(const NetworkGame& game, const PolicyProfile& x) {
  if (x.size() != game.num_populations())
    throw ShapeError("policy profile: one policy per population required");
  for (std::size_t i = 0; i < x.size(); ++i)
    PolicyVector(std::vector<double>(x[i].begin(), x[i].end()));  // validates
}

}  // namespace detail

// One application of the logit response map: for each population,
// softmax(lambda * u_i) with u_i the degree-averaged payoff against the
// current profile. A quantal response equilibrium is exactly a fixed point.
inline PolicyProfile qre_map(const NetworkGame& game, const PolicyProfile& x,
                             double lambda) {
  detail::validate_profile(game, x);
  PolicyProfile out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto u = mean_payoff_from_profile(game, static_cast<int>(i), x);
    out[i].resize(u.size());
    softmax_into(u, lambda, out[i]);
  }
  return out;
}

// Fixed-point defect ||x - qre_map(x)||_inf over all populations and actions.
inline double qre_residual(const NetworkGame& game, const PolicyProfile& x,
                           double lambda) {
  const auto mapped = qre_map(game, x, lambda);
  double r = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    r = std::max(r, max_abs_diff(x[i], mapped[i]));
  return r;
}

struct QreSolution {
  std::vector<PolicyVector> policies;
  double residual = 0.0;
  double lambda = 0.0;
  long iterations = 0;
  int start_id = 0;
  bool converged = false;
  std::string method = "damped";

  PolicyProfile profile() const {
    PolicyProfile p;
    for (const auto& x : policies) p.push_back(x.vec());
    return p;
  }
};

inline constexpr double kQreDefaultDamping = 0.5;
inline constexpr double kQreDefaultTol = 1e-10;
inline constexpr long kQreDefaultMaxIters = 100000;
inline constexpr double kQreDefaultMergeRadius = 1e-4;

// Damped fixed-point iteration x <- (1-a) x + a qre_map(x). Stops when the
// max-norm update drops below tol. Non-converged runs are returned flagged,
// never dropped.
inline QreSolution solve_qre(const NetworkGame& game, double lambda,
                             const PolicyProfile& start,
                             double damping = kQreDefaultDamping,
                             double tol = kQreDefaultTol,
                             long max_iters = kQreDefaultMaxIters) {
  if (!(damping > 0.0) || damping > 1.0)
    throw DomainError("solve_qre: damping must lie in (0, 1]");
  if (!(tol > 0.0)) throw DomainError("solve_qre: tol must be > 0");
  if (max_iters < 1) throw DomainError("solve_qre: max_iters must be >= 1");
  detail::validate_profile(game, start);

  PolicyProfile x = start;
  QreSolution sol;
  sol.lambda = lambda;
  for (long it = 1; it <= max_iters; ++it) {
    const auto mapped = qre_map(game, x, lambda);
    double update = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
      for (std::size_t a = 0; a < x[i].size(); ++a) {
        const double next = (1.0 - damping) * x[i][a] + damping * mapped[i][a];
        update = std::max(update, std::fabs(next - x[i][a]));
        x[i][a] = next;
      }
    sol.iterations = it;
    if (update < tol) {
      sol.converged = true;
      break;
    }
  }
  sol.residual = qre_residual(game, x, lambda);
  for (auto& xi : x) {
    // renormalize away accumulated rounding before constructing the simplex type
    double s = 0.0;
    for (double v : xi) s += v;
    for (auto& v : xi) v /= s;
    sol.policies.emplace_back(std::move(xi));
  }
  return sol;
}

// ---------------------------------------------------------------------------
// Newton refinement in logit coordinates
// ---------------------------------------------------------------------------
//
// The damped map only reaches attracting fixed points; repelling QREs (the
// interior equilibrium of coordination games, or any zero-sum QRE once
// lambda * payoff scale makes the map's rotation too strong) are genuine
// fixed points with an empty basin. Newton on the logit-space defect
//   G(z)_ia = z_ia - lambda * (u_ia - u_i,last),   x_i = softmax([z_i; 0])
// reaches them from generic starts, so the enumerator runs it as a polish
// stage on every multistart endpoint.

namespace detail {

struct LogitCoords {
  std::vector<std::size_t> counts;  // actions per population
  std::size_t dim = 0;              // sum of (counts - 1)

  explicit LogitCoords(const NetworkGame& game) {
    for (std::size_t i = 0; i < game.num_populations(); ++i) {
      counts.push_back(game.num_actions(static_cast<int>(i)));
      dim += counts.back() - 1;
    }
  }

  PolicyProfile to_profile(std::span<const double> z) const {
    PolicyProfile x(counts.size());
    std::size_t off = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      std::vector<double> logits(counts[i], 0.0);
      for (std::size_t a = 0; a + 1 < counts[i]; ++a) logits[a] = z[off++];
      x[i].resize(counts[i]);
      softmax_into(logits, 1.0, x[i]);
    }
    return x;
  }

  std::vector<double> from_profile(const PolicyProfile& x) const {
    std::vector<double> z(dim);
    std::size_t off = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      const double floor = 1e-300;
      const double last = std::max(x[i].back(), floor);
      for (std::size_t a = 0; a + 1 < counts[i]; ++a)
        z[off++] = std::log(std::max(x[i][a], floor)) - std::log(last);
    }
    return z;
  }
};

inline std::vector<double> logit_defect(const NetworkGame& game, const LogitCoords& lc,
                                        std::span<const double> z, double lambda) {
  const PolicyProfile x = lc.to_profile(z);
  std::vector<double> g(lc.dim);
  std::size_t off = 0;
  for (std::size_t i = 0; i < lc.counts.size(); ++i) {
    const auto u = mean_payoff_from_profile(game, static_cast<int>(i), x);
    for (std::size_t a = 0; a + 1 < lc.counts[i]; ++a) {
      g[off] = z[off] - lambda * (u[a] - u.back());
      ++off;
    }
  }
  return g;
}

// Gaussian elimination with partial pivoting; returns false when singular.
inline bool solve_linear(std::vector<std::vector<double>> a, std::vector<double> b,
                         std::vector<double>& out) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
    if (std::fabs(a[piv][col]) < 1e-14) return false;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  out.assign(n, 0.0);
  for (std::size_t r = n; r-- > 0;) {
    double s = b[r];
    for (std::size_t c = r + 1; c < n; ++c) s -= a[r][c] * out[c];
    out[r] = s / a[r][r];
  }
  return true;
}

// Damped Newton with halving line search on ||G||_inf. Returns true when the
// policy-space residual meets tol; iters_used reports the steps taken.
inline bool newton_polish(const NetworkGame& game, const LogitCoords& lc,
                          std::vector<double>& z, double lambda, double tol,
                          long* iters_used = nullptr, int max_newton = 60) {
  const double fd_h = 1e-6;
  for (int it = 0; it < max_newton; ++it) {
    if (iters_used) *iters_used = it;
    const auto g = logit_defect(game, lc, z, lambda);
    if (qre_residual(game, lc.to_profile(z), lambda) < tol) return true;
    std::vector<std::vector<double>> jac(lc.dim, std::vector<double>(lc.dim));
    for (std::size_t c = 0; c < lc.dim; ++c) {
      auto zp = z, zm = z;
      zp[c] += fd_h;
      zm[c] -= fd_h;
      const auto gp = logit_defect(game, lc, zp, lambda);
      const auto gm = logit_defect(game, lc, zm, lambda);
      for (std::size_t r = 0; r < lc.dim; ++r)
        jac[r][c] = (gp[r] - gm[r]) / (2.0 * fd_h);
    }
    std::vector<double> neg_g(lc.dim), dz;
    for (std::size_t r = 0; r < lc.dim; ++r) neg_g[r] = -g[r];
    if (!solve_linear(jac, neg_g, dz)) return false;
    const double g0 = max_abs(g);
    double alpha = 1.0;
    bool accepted = false;
    while (alpha > 1e-4) {
      auto zt = z;
      for (std::size_t c = 0; c < lc.dim; ++c) zt[c] += alpha * dz[c];
      if (max_abs(logit_defect(game, lc, zt, lambda)) < g0) {
        z = std::move(zt);
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) return false;
  }
  return qre_residual(game, lc.to_profile(z), lambda) < tol;
}

}  // namespace detail

// Multistart equilibrium enumeration: n_starts Dirichlet(1) interior starts,
// each run through the damped iteration and through a Newton polish (from the
// raw start and, if needed, from the damped endpoint). Converged solutions are
// merged into clusters of sup-distance < merge_radius; one representative per
// cluster is returned, sorted by residual.
inline std::vector<QreSolution> enumerate_qre(const NetworkGame& game, double lambda,
                                              int n_starts = 100, std::uint64_t seed = 0,
                                              double tol = kQreDefaultTol,
                                              double merge_radius = kQreDefaultMergeRadius,
                                              double damping = kQreDefaultDamping) {
  if (n_starts < 1) throw DomainError("enumerate_qre: n_starts must be >= 1");
  if (!(merge_radius > 0.0)) throw DomainError("enumerate_qre: merge_radius must be > 0");
  const detail::LogitCoords lc(game);
  const long damped_budget = 2000;  // the damped stage either gets there fast or never

  std::vector<QreSolution> found;
  for (int s = 0; s < n_starts; ++s) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(s)));
    PolicyProfile start(game.num_populations());
    for (std::size_t i = 0; i < start.size(); ++i)
      start[i] = rng.dirichlet_uniform(game.num_actions(static_cast<int>(i)));

    QreSolution sol = solve_qre(game, lambda, start, damping, tol, damped_budget);
    sol.start_id = s;
    auto make_newton_solution = [&](const PolicyProfile& from, const char* method,
                                    QreSolution& out) {
      auto z = lc.from_profile(from);
      long iters = 0;
      if (!detail::newton_polish(game, lc, z, lambda, tol, &iters)) return false;
      const PolicyProfile x = lc.to_profile(z);
      out = QreSolution{};
      out.lambda = lambda;
      out.start_id = s;
      out.iterations = iters;
      out.converged = true;
      out.method = method;
      out.residual = qre_residual(game, x, lambda);
      for (const auto& xi : x) out.policies.emplace_back(std::vector<double>(xi));
      return true;
    };
    if (!sol.converged) {
      // polish from the raw start first: endpoints of divergent damped runs
      // pile up near attractors and would mask repelling equilibria
      QreSolution ns;
      if (make_newton_solution(start, "damped+newton", ns) ||
          make_newton_solution(sol.profile(), "damped+newton", ns))
        sol = std::move(ns);
    } else {
      // also probe with Newton from the raw start so repelling fixed points
      // inside an attractor's basin are not lost
      QreSolution ns;
      if (make_newton_solution(start, "newton", ns)) found.push_back(std::move(ns));
    }
    found.push_back(std::move(sol));
  }

  // cluster converged solutions
  std::vector<QreSolution> clusters;
  for (auto& sol : found) {
    if (!sol.converged) continue;
    bool merged = false;
    for (auto& rep : clusters) {
      double dist = 0.0;
      for (std::size_t i = 0; i < sol.policies.size(); ++i)
        dist = std::max(dist, max_abs_diff(sol.policies[i].probabilities(),
                                           rep.policies[i].probabilities()));
      if (dist < merge_radius) {
        if (sol.residual < rep.residual) rep = sol;
        merged = true;
        break;
      }
    }
    if (!merged) clusters.push_back(std::move(sol));
  }
  std::sort(clusters.begin(), clusters.end(),
            [](const QreSolution& a, const QreSolution& b) { return a.residual < b.residual; });
  return clusters;
}

}  // namespace pngdyn
