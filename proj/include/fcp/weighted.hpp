#pragma once

// Weighted versions of a correlated counting process. For a base count law
// M and weights w, P(M^w = k) = P(M = k) w(k)/E[w(M)]. The counts N(t) of
// the correlated construction are obtained from M through the kernel
//   q(k|n,F,rho) = (1-rho) C(n,k) F^k (1-F)^(n-k) + rho F^(k/n) (1-F)^(1-k/n) 1{k in {0,n}}
// so the weighted process is again a weighted version of N(t), with
// time-dependent weights w(k,t).

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstddef>
#include <functional>
#include <sstream>
#include <utility>
#include <vector>

#include "fcp/error.hpp"
#include "fcp/pmf_table.hpp"

namespace fcp {

/// Nonnegative weights on {0, 1, 2, ...}.
class WeightFn {
 public:
  /// Relative change of the normalizer under K/2 -> K below which the
  /// truncation is accepted unconditionally.
  static constexpr double kStabilityTolerance = 1e-8;

  explicit WeightFn(std::function<double(std::size_t)> w) : w_(std::move(w)) {
    if (!w_) throw DomainError("WeightFn: empty callable");
  }

  static WeightFn constant(double c) {
    detail::require(c > 0.0 && std::isfinite(c), "WeightFn::constant: c must be finite and > 0");
    return WeightFn([c](std::size_t) { return c; });
  }
  /// Size biasing, w(k) = k.
  static WeightFn size_biased() {
    return WeightFn([](std::size_t k) { return static_cast<double>(k); });
  }
  /// w(k) = values[k]; zero beyond the vector.
  static WeightFn from_values(std::vector<double> values) {
    return WeightFn([v = std::move(values)](std::size_t k) { return k < v.size() ? v[k] : 0.0; });
  }

  double operator()(std::size_t k) const {
    const double v = w_(k);
    if (!(v >= 0.0) || !std::isfinite(v)) {
      std::ostringstream os;
      os << "WeightFn: w(" << k << ")=" << v << " must be finite and >= 0";
      throw DomainError(os.str());
    }
    return v;
  }

  /// E[w(M)] over the truncated support of base. Throws DegenerateWeights if
  /// the sum is not positive and finite, or if the partial sums over
  /// [0,K/4], [0,K/2], [0,K] show the increment from K/2 to K above
  /// kStabilityTolerance and no smaller than the one from K/4 to K/2
  /// (weights outgrowing the base tail).
  double normalizer(const PmfTable& base) const {
    const std::size_t K = base.K();
    const std::size_t half = K / 2, quarter = K / 4;
    double s_quarter = 0.0, s_half = 0.0, s_full = 0.0;
    for (std::size_t k = 0; k <= K; ++k) {
      const double term = base[k] * (*this)(k);
      s_full += term;
      if (k <= half) s_half += term;
      if (k <= quarter) s_quarter += term;
    }
    if (!(s_full > 0.0) || !std::isfinite(s_full)) {
      std::ostringstream os;
      os << "WeightFn: normalizer " << s_full << " must lie in (0, inf)";
      throw DegenerateWeights(os.str());
    }
    if (K >= 4) {
      const double late = std::abs(s_full - s_half);
      const double early = std::abs(s_half - s_quarter);
      if (late > kStabilityTolerance * s_full && late >= early) {
        std::ostringstream os;
        os << "WeightFn: truncated normalizer not settling under K doubling (relative change " << late / s_full
           << ")";
        throw DegenerateWeights(os.str());
      }
    }
    return s_full;
  }

 private:
  std::function<double(std::size_t)> w_;
};

/// P(M^w = k) = base[k] w(k)/E[w(M)] over the truncated support.
inline PmfTable weighted_pmf(const PmfTable& base, const WeightFn& wf) {
  const double norm = wf.normalizer(base);
  std::vector<double> probs(base.size());
  for (std::size_t k = 0; k < probs.size(); ++k) probs[k] = base[k] * wf(k) / norm;
  return PmfTable::from_probs(std::move(probs));
}

namespace detail {

inline void check_kernel_args(double F, double rho) {
  if (!(F >= 0.0 && F <= 1.0)) throw DomainError("q_kernel: F must lie in [0,1]");
  if (!(rho >= 0.0 && rho <= 1.0)) throw DomainError("q_kernel: rho must lie in [0,1]");
}

/// C(n,k) F^k (1-F)^(n-k), exact at F in {0, 1}.
inline double binomial_term(std::size_t k, std::size_t n, double F) {
  if (F == 0.0) return k == 0 ? 1.0 : 0.0;
  if (F == 1.0) return k == n ? 1.0 : 0.0;
  const double kd = static_cast<double>(k), nd = static_cast<double>(n);
  const double log_c = std::lgamma(nd + 1.0) - std::lgamma(kd + 1.0) - std::lgamma(nd - kd + 1.0);
  return std::exp(log_c + kd * std::log(F) + (nd - kd) * std::log1p(-F));
}

}  // namespace detail

/// q(k|n,F,rho); q(0|0,.,.) = 1.
inline double q_kernel(std::size_t k, std::size_t n, double F, double rho) {
  detail::check_kernel_args(F, rho);
  if (k > n) throw DomainError("q_kernel: k must not exceed n");
  if (n == 0) return 1.0;
  double v = (1.0 - rho) * detail::binomial_term(k, n, F);
  if (k == 0) v += rho * (1.0 - F);
  if (k == n) v += rho * F;
  return v;
}

/// P(N(t) = k) = sum_n q(k|n,F,rho) P(M = n), k = 0..K, n over the base support.
inline PmfTable process_pmf(const PmfTable& base, double F, double rho, std::size_t K) {
  detail::check_kernel_args(F, rho);
  std::vector<double> probs(K + 1, 0.0);
  for (std::size_t k = 0; k <= K; ++k)
    for (std::size_t n = k; n <= base.K(); ++n) probs[k] += q_kernel(k, n, F, rho) * base[n];
  return PmfTable::from_probs(std::move(probs));
}

/// w(k,t) = sum_n q(k|n) P(M=n) w(n) / sum_n q(k|n) P(M=n) for k = 0..K.
/// Defined up to a positive factor; the raw ratios are returned.
inline std::vector<double> weights_in_time(const PmfTable& base, const WeightFn& wf, double F, double rho,
                                           std::size_t K) {
  detail::check_kernel_args(F, rho);
  wf.normalizer(base);
  std::vector<double> out(K + 1);
  for (std::size_t k = 0; k <= K; ++k) {
    double num = 0.0, den = 0.0;
    for (std::size_t n = k; n <= base.K(); ++n) {
      const double qp = q_kernel(k, n, F, rho) * base[n];
      num += qp * wf(n);
      den += qp;
    }
    if (!(den > 0.0)) {
      std::ostringstream os;
      os << "weights_in_time: P(N(t)=" << k << ") vanishes on the truncated support";
      throw DegenerateWeights(os.str());
    }
    out[k] = num / den;
  }
  return out;
}

/// P(N^w(t) = k) = sum_n q(k|n) P(M=n) w(n) / E[w(M)], k = 0..K.
inline PmfTable weighted_process_pmf(const PmfTable& base, const WeightFn& wf, double F, double rho, std::size_t K) {
  detail::check_kernel_args(F, rho);
  const double norm = wf.normalizer(base);
  std::vector<double> probs(K + 1, 0.0);
  for (std::size_t k = 0; k <= K; ++k) {
    double s = 0.0;
    for (std::size_t n = k; n <= base.K(); ++n) s += q_kernel(k, n, F, rho) * base[n] * wf(n);
    probs[k] = s / norm;
  }
  return PmfTable::from_probs(std::move(probs));
}

namespace detail {

inline void check_uniform_poisson(double lambda, double rho, double s, double t) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("covariance: lambda must be > 0");
  if (!(rho >= 0.0 && rho <= 1.0)) throw DomainError("covariance: rho must lie in [0,1]");
  if (!(s >= 0.0 && s <= t && t <= 1.0)) throw DomainError("covariance: need 0 <= s <= t <= 1");
}

}  // namespace detail

/// Cov(N(t), N(s)) = lambda s (1 + lambda rho (1 - t)) for a Poisson(lambda)
/// total with F(t) = t on [0,1].
inline double covariance_corrected(double lambda, double rho, double s, double t) {
  detail::check_uniform_poisson(lambda, rho, s, t);
  return lambda * s * (1.0 + lambda * rho * (1.0 - t));
}

/// Cov(N(t) - N(s), N(s)) = -lambda^2 rho s (t - s), same setting.
inline double covariance_increment(double lambda, double rho, double s, double t) {
  detail::check_uniform_poisson(lambda, rho, s, t);
  return -lambda * lambda * rho * s * (t - s);
}

/// Var(N(s)) = lambda s + rho lambda^2 s (1 - s), from the mixture moments
/// (E[M] = lambda, E[M^2] = lambda + lambda^2).
inline double variance_uniform_poisson(double lambda, double rho, double s) {
  detail::check_uniform_poisson(lambda, rho, s, s);
  return lambda * s + rho * lambda * lambda * s * (1.0 - s);
}

/// Size-biased (w(k) = k) correlated Poisson(lambda) process with F(t) = t:
///   (1-rho) (lambda t)^k/k! e^(-lambda t) (1 - t + k/lambda)
///   + rho [(1-t) 1{k=0} + t lambda^(k-1) e^(-lambda)/(k-1)! 1{k>=1}].
inline PmfTable size_biased_poisson_pmf(double lambda, double rho, double t, std::size_t K) {
  detail::check_uniform_poisson(lambda, rho, t, t);
  std::vector<double> probs(K + 1, 0.0);
  const double lt = lambda * t;
  for (std::size_t k = 0; k <= K; ++k) {
    const double kd = static_cast<double>(k);
    const double pois_t = std::exp(kd * std::log(lt) - lt - std::lgamma(kd + 1.0));
    double v = (1.0 - rho) * (lt == 0.0 ? (k == 0 ? 1.0 : 0.0) : pois_t) * (1.0 - t + kd / lambda);
    if (k == 0)
      v += rho * (1.0 - t);
    else
      v += rho * t * std::exp((kd - 1.0) * std::log(lambda) - lambda - std::lgamma(kd));
    probs[k] = v;
  }
  return PmfTable::from_probs(std::move(probs));
}

}  // namespace fcp
