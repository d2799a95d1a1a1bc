#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "pngdyn/error.hpp"
#include "pngdyn/game.hpp"
#include "pngdyn/policy.hpp"

namespace pngdyn {

// Per-population first and second moments of the regret distribution.
struct MomentState {
  std::vector<std::vector<double>> mean;      // [population][action]
  std::vector<std::vector<double>> variance;  // [population][action], >= 0

  void validate(const NetworkGame& game) const {
    if (mean.size() != game.num_populations() || variance.size() != game.num_populations())
      throw ShapeError("MomentState: one mean/variance vector per population required");
    for (std::size_t i = 0; i < mean.size(); ++i) {
      if (mean[i].size() != game.num_actions(static_cast<int>(i)) ||
          variance[i].size() != game.num_actions(static_cast<int>(i)))
        throw ShapeError("MomentState: vector dimension mismatch");
      if (!all_finite(mean[i]) || !all_finite(variance[i]))
        throw NumericError("MomentState: non-finite entry");
      for (double v : variance[i])
        if (v < 0.0) throw DomainError("MomentState: negative variance");
    }
  }
};

// Which closure is used for the second-order term of the mean dynamics:
// the diagonal Hessian of the mean-field regret (default), or the squared
// first derivative.
enum class ClosureVariant { hessian_diag, gradient_squared };

inline ClosureVariant closure_from_string(std::string_view s) {
  if (s == "hessian" || s == "hessian_diag") return ClosureVariant::hessian_diag;
  if (s == "gradient_squared") return ClosureVariant::gradient_squared;
  throw NotFoundError("unknown closure variant '" + std::string(s) + "'");
}

namespace detail {

inline std::vector<std::vector<double>> profile_policies(
    const NetworkGame& game, const std::vector<std::vector<double>>& means,
    double lambda) {
  std::vector<std::vector<double>> x(means.size());
  for (std::size_t i = 0; i < means.size(); ++i) {
    x[i].resize(means[i].size());
    softmax_into(means[i], lambda, x[i]);
  }
  return x;
}

// d/dR_s and d^2/dR_s^2 of c . softmax(lambda R), evaluated at policy x:
//   first  = lambda x_s (c_s - c.x)
//   second = lambda^2 x_s (c_s - c.x) (1 - 2 x_s)
inline void softmax_dot_derivs(std::span<const double> c, std::span<const double> x,
                               double lambda, std::span<double> first,
                               std::span<double> second) {
  const double cx = dot(c, x);
  for (std::size_t s = 0; s < x.size(); ++s) {
    const double g = lambda * x[s] * (c[s] - cx);
    first[s] = g;
    second[s] = lambda * g * (1.0 - 2.0 * x[s]);
  }
}

}  // namespace detail

// Mean-field instantaneous regret of population i at the mean regrets:
// f_ia = (e_a - x_i) . u_i with x = softmax(lambda * mean) for every
// population and u_i the degree-averaged payoff vector.
inline std::vector<double> mean_field_regret(const NetworkGame& game, int i,
                                             const std::vector<std::vector<double>>& means,
                                             double lambda) {
  const auto x = detail::profile_policies(game, means, lambda);
  const auto u = mean_payoff_from_profile(game, i, x);
  const double xu = dot(x[i], u);
  std::vector<double> f(u.size());
  for (std::size_t a = 0; a < u.size(); ++a) f[a] = u[a] - xu;
  return f;
}

// Second-order closure correction to the mean regret drift of population i:
//   (1/2) sum_{h in {i} u V_i} sum_{s in S_h} d2 f_ia / dR_hs^2 * Var(R_hs)
// with cross-covariances dropped. The gradient_squared variant replaces the
// second derivative by the squared first derivative.
inline std::vector<double> variance_correction(
    const NetworkGame& game, int i, const std::vector<std::vector<double>>& means,
    const std::vector<std::vector<double>>& variances, double lambda,
    ClosureVariant variant = ClosureVariant::hessian_diag) {
  const auto x = detail::profile_policies(game, means, lambda);
  const auto u = mean_payoff_from_profile(game, i, x);
  const std::size_t si = u.size();
  std::vector<double> corr(si, 0.0);

  // own-population term: f_ia depends on R_i only through -x_i.u_i, so the
  // contribution is identical for every action a
  {
    std::vector<double> c(si), d1(si), d2(si);
    for (std::size_t s = 0; s < si; ++s) c[s] = -u[s];
    detail::softmax_dot_derivs(c, x[i], lambda, d1, d2);
    double own = 0.0;
    for (std::size_t s = 0; s < si; ++s) {
      const double w = (variant == ClosureVariant::hessian_diag) ? d2[s] : d1[s] * d1[s];
      own += w * variances[i][s];
    }
    for (std::size_t a = 0; a < si; ++a) corr[a] += own;
  }

  // neighbor terms: f_ia depends on R_j through c(a) . xbar_j with
  // c(a) = (1/|V_i|) A_ij^T (e_a - x_i)
  const double inv_deg = 1.0 / static_cast<double>(game.degree(i));
  for (int j : game.neighbors(i)) {
    const Matrix& a_ij = game.payoff(i, j);
    const std::size_t sj = a_ij.cols();
    std::vector<double> ea_minus_x(si), c(sj), d1(sj), d2(sj);
    for (std::size_t a = 0; a < si; ++a) {
      for (std::size_t s = 0; s < si; ++s) ea_minus_x[s] = (s == a ? 1.0 : 0.0) - x[i][s];
      mat_t_vec(a_ij, ea_minus_x, c);
      for (auto& v : c) v *= inv_deg;
      detail::softmax_dot_derivs(c, x[j], lambda, d1, d2);
      for (std::size_t s = 0; s < sj; ++s) {
        const double w = (variant == ClosureVariant::hessian_diag) ? d2[s] : d1[s] * d1[s];
        corr[a] += w * variances[j][s];
      }
    }
  }

  for (auto& v : corr) v *= 0.5;
  return corr;
}

// d mean_i / dt = (1/t) [f_i(mean) - mean_i] + (1/t) * correction_i
inline std::vector<std::vector<double>> mean_regret_rhs(
    const NetworkGame& game, const MomentState& state, double t, double lambda,
    ClosureVariant variant = ClosureVariant::hessian_diag) {
  if (!(t > 0.0)) throw DomainError("mean_regret_rhs: t must be > 0");
  state.validate(game);
  std::vector<std::vector<double>> rhs(state.mean.size());
  const double inv_t = 1.0 / t;
  for (std::size_t i = 0; i < state.mean.size(); ++i) {
    const auto f = mean_field_regret(game, static_cast<int>(i), state.mean, lambda);
    const auto corr =
        variance_correction(game, static_cast<int>(i), state.mean, state.variance, lambda, variant);
    rhs[i].resize(f.size());
    for (std::size_t a = 0; a < f.size(); ++a)
      rhs[i][a] = inv_t * (f[a] - state.mean[i][a] + corr[a]);
  }
  return rhs;
}

// d Var / dt = -2 Var / t, componentwise; closed form Var(t) = sigma^2 (t0/t)^2.
inline std::vector<double> variance_rhs(std::span<const double> variances, double t) {
  if (!(t > 0.0)) throw DomainError("variance_rhs: t must be > 0");
  std::vector<double> rhs(variances.size());
  for (std::size_t a = 0; a < variances.size(); ++a) {
    if (variances[a] < 0.0) throw DomainError("variance_rhs: negative variance");
    rhs[a] = -2.0 * variances[a] / t;
  }
  return rhs;
}

// Homogeneous-population limit dynamics in tau = ln t: dR_i/dtau = f_i(R) - R_i.
inline std::vector<std::vector<double>> limit_regret_rhs(
    const NetworkGame& game, const std::vector<std::vector<double>>& regrets,
    double lambda) {
  std::vector<std::vector<double>> rhs(regrets.size());
  for (std::size_t i = 0; i < regrets.size(); ++i) {
    auto f = mean_field_regret(game, static_cast<int>(i), regrets, lambda);
    rhs[i].resize(f.size());
    for (std::size_t a = 0; a < f.size(); ++a) rhs[i][a] = f[a] - regrets[i][a];
  }
  return rhs;
}

// Smooth Q-learning limit dynamics of the policies (tau time):
//   dx_ia/dtau = x_ia [ lambda u_ia - lambda x_i.u_i - ln x_ia + x_i . ln x_i ]
// Requires strictly interior policies.
inline std::vector<std::vector<double>> smooth_q_learning_rhs(
    const NetworkGame& game, const std::vector<std::vector<double>>& policies,
    double lambda) {
  for (const auto& x : policies)
    for (double v : x)
      if (!(v > 0.0))
        throw DomainError("smooth_q_learning_rhs: policy must be strictly interior");
  std::vector<std::vector<double>> rhs(policies.size());
  for (std::size_t i = 0; i < policies.size(); ++i) {
    const auto u = mean_payoff_from_profile(game, static_cast<int>(i), policies);
    const double xu = dot(policies[i], u);
    double entropy_term = 0.0;
    for (double v : policies[i]) entropy_term += v * std::log(v);
    rhs[i].resize(u.size());
    for (std::size_t a = 0; a < u.size(); ++a) {
      const double xa = policies[i][a];
      rhs[i][a] = xa * (lambda * (u[a] - xu) - std::log(xa) + entropy_term);
    }
  }
  return rhs;
}

// ---------------------------------------------------------------------------
// Fixed-step RK4 in tau = ln t
// ---------------------------------------------------------------------------

struct OdeSolution {
  std::vector<double> times;                 // in t, strictly increasing
  std::vector<std::vector<double>> states;   // flat state per grid point
  std::string scheme = "rk4";
  std::size_t steps = 0;

  // Linear interpolation in tau = ln t.
  std::vector<double> eval(double t) const {
    if (times.empty()) throw DomainError("OdeSolution: empty");
    if (t <= times.front()) return states.front();
    if (t >= times.back()) return states.back();
    const double tau = std::log(t);
    std::size_t lo = 0, hi = times.size() - 1;
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      (times[mid] <= t ? lo : hi) = mid;
    }
    const double tau0 = std::log(times[lo]), tau1 = std::log(times[hi]);
    const double w = (tau - tau0) / (tau1 - tau0);
    std::vector<double> out(states[lo].size());
    for (std::size_t k = 0; k < out.size(); ++k)
      out[k] = (1.0 - w) * states[lo][k] + w * states[hi][k];
    return out;
  }
};

// rhs is given in t (dy/dt); integration runs in tau = ln t via
// dy/dtau = t * dy/dt, which removes the 1/t stiffness near t0.
using RhsInT = std::function<void(double /*t*/, std::span<const double> /*y*/,
                                  std::span<double> /*dy_dt*/)>;

inline OdeSolution integrate(const RhsInT& rhs, std::vector<double> y0, double t0,
                             double t1, std::size_t steps) {
  if (!(t0 > 0.0) || !(t1 > t0)) throw DomainError("integrate: need 0 < t0 < t1");
  if (steps < 1) throw DomainError("integrate: steps must be >= 1");
  const double tau0 = std::log(t0), tau1 = std::log(t1);
  const double h = (tau1 - tau0) / static_cast<double>(steps);
  const std::size_t dim = y0.size();

  std::vector<double> k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
  auto rhs_tau = [&](double tau, std::span<const double> y, std::span<double> dy) {
    const double t = std::exp(tau);
    rhs(t, y, dy);
    for (auto& v : dy) v *= t;
  };

  OdeSolution sol;
  sol.steps = steps;
  sol.times.reserve(steps + 1);
  sol.states.reserve(steps + 1);
  sol.times.push_back(t0);
  sol.states.push_back(y0);

  std::vector<double> y = std::move(y0);
  for (std::size_t s = 0; s < steps; ++s) {
    const double tau = tau0 + h * static_cast<double>(s);
    rhs_tau(tau, y, k1);
    for (std::size_t d = 0; d < dim; ++d) tmp[d] = y[d] + 0.5 * h * k1[d];
    rhs_tau(tau + 0.5 * h, tmp, k2);
    for (std::size_t d = 0; d < dim; ++d) tmp[d] = y[d] + 0.5 * h * k2[d];
    rhs_tau(tau + 0.5 * h, tmp, k3);
    for (std::size_t d = 0; d < dim; ++d) tmp[d] = y[d] + h * k3[d];
    rhs_tau(tau + h, tmp, k4);
    for (std::size_t d = 0; d < dim; ++d)
      y[d] += h / 6.0 * (k1[d] + 2.0 * k2[d] + 2.0 * k3[d] + k4[d]);
    const double t_next = std::exp(tau + h);
    if (!all_finite(y))
      throw DivergenceError("integrate: non-finite state at step " + std::to_string(s + 1),
                            static_cast<long>(s + 1), t_next);
    sol.times.push_back(t_next);
    sol.states.push_back(y);
  }
  sol.times.back() = t1;  // pin the endpoint against exp/log rounding
  return sol;
}

// ---------------------------------------------------------------------------
// Packed moment system (means + variances of all populations)
// ---------------------------------------------------------------------------

struct MomentLayout {
  std::vector<std::size_t> action_counts;
  std::size_t mean_size = 0;  // variances start at this offset

  explicit MomentLayout(const NetworkGame& game) {
    for (std::size_t i = 0; i < game.num_populations(); ++i) {
      action_counts.push_back(game.num_actions(static_cast<int>(i)));
      mean_size += action_counts.back();
    }
  }

  std::size_t total() const { return 2 * mean_size; }

  std::vector<double> pack(const MomentState& st) const {
    std::vector<double> y;
    y.reserve(total());
    for (const auto& m : st.mean) y.insert(y.end(), m.begin(), m.end());
    for (const auto& v : st.variance) y.insert(y.end(), v.begin(), v.end());
    return y;
  }

  MomentState unpack(std::span<const double> y) const {
    MomentState st;
    std::size_t off = 0;
    for (std::size_t c : action_counts) {
      st.mean.emplace_back(y.begin() + off, y.begin() + off + c);
      off += c;
    }
    for (std::size_t c : action_counts) {
      st.variance.emplace_back(y.begin() + off, y.begin() + off + c);
      off += c;
    }
    return st;
  }
};

// Integrates the coupled mean-regret + variance system from t0 to t1.
inline OdeSolution integrate_moments(const NetworkGame& game, double lambda,
                                     const MomentState& initial, double t0, double t1,
                                     std::size_t steps,
                                     ClosureVariant variant = ClosureVariant::hessian_diag) {
  initial.validate(game);
  const MomentLayout layout(game);
  RhsInT rhs = [&game, lambda, variant, layout](double t, std::span<const double> y,
                                                std::span<double> dy) {
    MomentState st = layout.unpack(y);
    // the averaging dynamics never produces negative variances, but RK4 stage
    // points can graze zero from below at machine precision
    for (auto& v : st.variance)
      for (auto& e : v) e = std::max(e, 0.0);
    const auto mean_dot = mean_regret_rhs(game, st, t, lambda, variant);
    std::size_t off = 0;
    for (const auto& m : mean_dot) {
      for (double v : m) dy[off++] = v;
    }
    for (const auto& var : st.variance) {
      const auto vdot = variance_rhs(var, t);
      for (double v : vdot) dy[off++] = v;
    }
  };
  return integrate(rhs, layout.pack(initial), t0, t1, steps);
}

// Integrates the homogeneous limit dynamics dR/dtau = f(R) - R, reported on a
// t grid (tau = ln t).
inline OdeSolution integrate_limit_regret(const NetworkGame& game, double lambda,
                                          const std::vector<std::vector<double>>& regrets0,
                                          double t0, double t1, std::size_t steps) {
  MomentState st;
  st.mean = regrets0;
  for (const auto& m : regrets0) st.variance.emplace_back(m.size(), 0.0);
  st.validate(game);
  const MomentLayout layout(game);
  RhsInT rhs = [&game, lambda, layout](double t, std::span<const double> y,
                                       std::span<double> dy) {
    MomentState s = layout.unpack(y);
    const auto rdot = limit_regret_rhs(game, s.mean, lambda);
    std::size_t off = 0;
    for (const auto& m : rdot)
      for (double v : m) dy[off++] = v / t;  // tau rhs / t; integrate() multiplies back
    for (; off < y.size(); ++off) dy[off] = 0.0;
  };
  return integrate(rhs, layout.pack(st), t0, t1, steps);
}

// Integrates the smooth Q-learning policy dynamics, reported on a t grid.
// Raises DivergenceError if a coordinate collapses below 1e-300.
inline OdeSolution integrate_policy(const NetworkGame& game, double lambda,
                                    const std::vector<std::vector<double>>& policies0,
                                    double t0, double t1, std::size_t steps) {
  std::vector<std::size_t> counts;
  std::vector<double> y0;
  for (const auto& x : policies0) {
    counts.push_back(x.size());
    for (double v : x) {
      if (!(v > 0.0))
        throw DomainError("integrate_policy: start must be strictly interior");
      y0.push_back(v);
    }
  }
  RhsInT rhs = [&game, lambda, counts](double t, std::span<const double> y,
                                       std::span<double> dy) {
    std::vector<std::vector<double>> x;
    std::size_t off = 0;
    for (std::size_t c : counts) {
      x.emplace_back(y.begin() + off, y.begin() + off + c);
      off += c;
    }
    for (const auto& xi : x)
      for (double v : xi)
        if (!(v > 1e-300))
          throw DivergenceError("integrate_policy: policy hit the simplex boundary", -1, t);
    const auto xdot = smooth_q_learning_rhs(game, x, lambda);
    off = 0;
    for (const auto& xi : xdot)
      for (double v : xi) dy[off++] = v / t;
  };
  return integrate(rhs, std::move(y0), t0, t1, steps);
}

inline constexpr std::size_t kDefaultStepsPerDecade = 10000;

inline std::size_t steps_for_span(double t0, double t1,
                                  std::size_t per_decade = kDefaultStepsPerDecade) {
  const double decades = (std::log(t1) - std::log(t0)) / std::log(10.0);
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(decades * per_decade)));
}

// ---------------------------------------------------------------------------
// Derivative verification
// ---------------------------------------------------------------------------

// Compares the analytic first and second derivatives of the mean-field regret
// against central finite differences (step 1e-4). Errors are normalized by
// max(1, |analytic|); returns the worst case over all components.
inline double derivative_check(const NetworkGame& game,
                               const std::vector<std::vector<double>>& means,
                               double lambda) {
  const double h = 1e-4;
  double worst = 0.0;
  auto f_of = [&](int i, const std::vector<std::vector<double>>& m) {
    return mean_field_regret(game, i, m, lambda);
  };
  for (std::size_t i = 0; i < game.num_populations(); ++i) {
    const auto x = detail::profile_policies(game, means, lambda);
    const auto u = mean_payoff_from_profile(game, static_cast<int>(i), x);
    const std::size_t si = u.size();

    // analytic derivatives per (h, s): own population and neighbors
    std::vector<int> deps = {static_cast<int>(i)};
    for (int j : game.neighbors(static_cast<int>(i))) deps.push_back(j);

    for (int hpop : deps) {
      const std::size_t sh = game.num_actions(hpop);
      for (std::size_t s = 0; s < sh; ++s) {
        // finite differences of the whole f_i vector
        auto mp = means, mm = means;
        mp[hpop][s] += h;
        mm[hpop][s] -= h;
        const auto fp = f_of(static_cast<int>(i), mp);
        const auto fm = f_of(static_cast<int>(i), mm);
        const auto f0 = f_of(static_cast<int>(i), means);
        for (std::size_t a = 0; a < si; ++a) {
          const double fd1 = (fp[a] - fm[a]) / (2.0 * h);
          const double fd2 = (fp[a] - 2.0 * f0[a] + fm[a]) / (h * h);
          double an1, an2;
          if (hpop == static_cast<int>(i)) {
            std::vector<double> c(si), d1(si), d2(si);
            for (std::size_t q = 0; q < si; ++q) c[q] = -u[q];
            detail::softmax_dot_derivs(c, x[i], lambda, d1, d2);
            an1 = d1[s];
            an2 = d2[s];
          } else {
            const Matrix& a_ij = game.payoff(static_cast<int>(i), hpop);
            std::vector<double> ea_minus_x(si), c(a_ij.cols()), d1(a_ij.cols()),
                d2(a_ij.cols());
            for (std::size_t q = 0; q < si; ++q)
              ea_minus_x[q] = (q == a ? 1.0 : 0.0) - x[i][q];
            mat_t_vec(a_ij, ea_minus_x, c);
            const double inv_deg = 1.0 / static_cast<double>(game.degree(static_cast<int>(i)));
            for (auto& v : c) v *= inv_deg;
            detail::softmax_dot_derivs(c, x[hpop], lambda, d1, d2);
            an1 = d1[s];
            an2 = d2[s];
          }
          worst = std::max(worst, std::fabs(an1 - fd1) / std::max(1.0, std::fabs(an1)));
          worst = std::max(worst, std::fabs(an2 - fd2) / std::max(1.0, std::fabs(an2)));
        }
      }
    }
  }
  return worst;
}

}  // namespace pngdyn
