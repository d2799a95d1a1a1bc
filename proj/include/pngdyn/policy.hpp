#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "pngdyn/error.hpp"
#include "pngdyn/matrix.hpp"

namespace pngdyn {

inline constexpr double kSimplexTol = 1e-12;

// A point on the probability simplex: entries >= 0, sum == 1 within kSimplexTol.
class PolicyVector {
 public:
  explicit PolicyVector(std::vector<double> probabilities)
      : p_(std::move(probabilities)) {
    validate();
  }

  static PolicyVector uniform(std::size_t n_actions) {
    if (n_actions == 0) throw ShapeError("PolicyVector: empty action set");
    return PolicyVector(std::vector<double>(n_actions, 1.0 / double(n_actions)));
  }

  std::size_t size() const { return p_.size(); }
  double operator[](std::size_t a) const { return p_[a]; }
  std::span<const double> probabilities() const { return p_; }
  const std::vector<double>& vec() const { return p_; }

  auto begin() const { return p_.begin(); }
  auto end() const { return p_.end(); }

  friend bool operator==(const PolicyVector& a, const PolicyVector& b) {
    return a.p_ == b.p_;
  }

 private:
  void validate() const {
    if (p_.empty()) throw ShapeError("PolicyVector: empty");
    double sum = 0.0;
    for (double v : p_) {
      if (!std::isfinite(v)) throw NumericError("PolicyVector: non-finite entry");
      if (v < -kSimplexTol) throw DomainError("PolicyVector: negative entry");
      sum += v;
    }
    if (std::fabs(sum - 1.0) > kSimplexTol)
      throw DomainError("PolicyVector: entries do not sum to 1");
  }

  std::vector<double> p_;
};

// softmax(lambda * r) with max-subtraction; never overflows for finite input.
// lambda = 0 gives the uniform policy regardless of r.
inline void softmax_into(std::span<const double> regrets, double lambda,
                         std::span<double> out) {
  const std::size_t n = regrets.size();
  double m = -std::numeric_limits<double>::infinity();
  for (double v : regrets) m = std::max(m, lambda * v);
  double z = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    out[a] = std::exp(lambda * regrets[a] - m);
    z += out[a];
  }
  for (std::size_t a = 0; a < n; ++a) out[a] /= z;
}

inline PolicyVector softmax_policy(std::span<const double> regrets, double lambda) {
  if (!all_finite(regrets)) throw NumericError("softmax_policy: non-finite regret");
  if (lambda < 0.0) throw DomainError("softmax_policy: lambda must be >= 0");
  std::vector<double> out(regrets.size());
  softmax_into(regrets, lambda, out);
  return PolicyVector(std::move(out));
}

}  // namespace pngdyn
