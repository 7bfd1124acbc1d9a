#pragma once

// Correlated fractional negative binomial process on [0, T].
//
// The total count has pgf {E_{nu,1}(-log^alpha((1-(1-p)u)/p))}^r and the
// event-time distribution is F(t) = (1/q(t) - 1)/(1/p - 1) for a
// non-increasing profile q with q(0) = 1 and q(T) = p. With A = 1/q - 1
// the uncorrelated r = 1 marginal is
//   k = 0:  E_{nu,1}(-log^alpha(1+A))
//   k >= 1: (1/k!) (-A)^k/(1+A)^k sum_h log^(-h)(1+A) s_{k,h}
//           2Psi2[(1,alpha),(1,1); (1-h,alpha),(1,nu)](-log^alpha(1+A)).

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <utility>
#include <vector>

#include "fcp/error.hpp"
#include "fcp/fracops.hpp"
#include "fcp/pmf_table.hpp"
#include "fcp/specfun.hpp"

namespace fcp {

/// The profile t -> q(t).
class QProfile {
 public:
  /// q(t) = (1 - lambda_mix)/(1 - (1 - t/T) lambda_mix).
  static QProfile mixture(double lambda_mix, double T) {
    detail::require(lambda_mix > 0.0 && lambda_mix < 1.0, "QProfile::mixture: lambda_mix must lie in (0,1)");
    detail::require(T > 0.0, "QProfile::mixture: T must be > 0");
    QProfile q;
    q.lambda_mix_ = lambda_mix;
    q.T_ = T;
    return q;
  }

  /// Mixture profile with q(T) = p, for which F(t) = t/T.
  static QProfile mixture_for(double p, double T) { return mixture(1.0 - p, T); }

  /// Piecewise-linear profile through (t_i, q_i), t_0 = 0.
  static QProfile table(std::vector<std::pair<double, double>> points) {
    if (points.size() < 2) throw InvalidProfile("QProfile::table: need at least two points");
    std::sort(points.begin(), points.end());
    if (points.front().first != 0.0) throw InvalidProfile("QProfile::table: first point must be at t=0");
    for (std::size_t i = 1; i < points.size(); ++i) {
      if (!(points[i].first > points[i - 1].first)) throw InvalidProfile("QProfile::table: duplicate sample times");
      if (points[i].second > points[i - 1].second) throw InvalidProfile("QProfile::table: q must be non-increasing");
    }
    QProfile q;
    q.T_ = points.back().first;
    q.points_ = std::move(points);
    return q;
  }

  bool is_mixture_profile() const { return lambda_mix_.has_value(); }
  double horizon() const { return T_; }

  double operator()(double t) const {
    if (lambda_mix_) {
      const double l = *lambda_mix_;
      return (1.0 - l) / (1.0 - (1.0 - t / T_) * l);
    }
    if (t <= points_.front().first) return points_.front().second;
    if (t >= points_.back().first) return points_.back().second;
    auto it = std::upper_bound(points_.begin(), points_.end(), t,
                               [](double v, const std::pair<double, double>& p) { return v < p.first; });
    const auto& [t1, q1] = *it;
    const auto& [t0, q0] = *(it - 1);
    return q0 + (q1 - q0) * (t - t0) / (t1 - t0);
  }

  /// Smallest t in [0, T] with q(t) = target, for target between q(T) and 1.
  double inverse(double target) const {
    if (lambda_mix_) {
      const double l = *lambda_mix_;
      const double s = ((1.0 - l) / target - 1.0 + l) / l;
      return std::clamp(s, 0.0, 1.0) * T_;
    }
    for (std::size_t i = 1; i < points_.size(); ++i) {
      const auto& [t0, q0] = points_[i - 1];
      const auto& [t1, q1] = points_[i];
      if (target >= q1) {
        if (q0 == q1) return t0;
        return t0 + (t1 - t0) * (q0 - target) / (q0 - q1);
      }
    }
    return points_.back().first;
  }

 private:
  QProfile() = default;
  std::optional<double> lambda_mix_;
  double T_ = 1.0;
  std::vector<std::pair<double, double>> points_;
};

struct NegBinParams {
  double p = 0.5;
  int r = 1;
  double alpha = 1.0;
  double nu = 1.0;
  double rho = 0.0;
  double T = 1.0;
  QProfile q_profile = QProfile::mixture_for(0.5, 1.0);

  /// lambda = -log p; derived, never a free parameter.
  double lambda() const { return -std::log(p); }

  void validate() const {
    detail::require(p > 0.0 && p < 1.0, "NegBinParams: p must lie in (0,1)");
    detail::require(r >= 1, "NegBinParams: r must be >= 1");
    detail::require(alpha > 0.0 && alpha <= 1.0, "NegBinParams: alpha must lie in (0,1]");
    detail::require(nu > 0.0 && nu <= 1.0, "NegBinParams: nu must lie in (0,1]");
    detail::require(rho >= 0.0 && rho <= 1.0, "NegBinParams: rho must lie in [0,1]");
    detail::require(T > 0.0 && std::isfinite(T), "NegBinParams: T must be > 0");
    if (std::abs(q_profile.horizon() - T) > 1e-12 * T) throw InvalidProfile("NegBinParams: profile horizon differs from T");
    if (std::abs(q_profile(0.0) - 1.0) > 1e-12) throw InvalidProfile("NegBinParams: q(0) must equal 1");
    if (std::abs(q_profile(T) - p) > 1e-12) throw InvalidProfile("NegBinParams: q(T) must equal p");
    constexpr int kGrid = 200;
    double prev = q_profile(0.0);
    for (int i = 1; i <= kGrid; ++i) {
      const double q = q_profile(T * i / kGrid);
      if (!(q > 0.0 && q <= 1.0)) throw InvalidProfile("NegBinParams: q(t) must lie in (0,1]");
      if (q > prev + 1e-15) throw InvalidProfile("NegBinParams: q must be non-increasing");
      prev = q;
    }
  }

  void check_time(double t) const {
    if (!(t >= 0.0 && t <= T)) {
      std::ostringstream os;
      os << "t=" << t << " outside [0, T=" << T << "]";
      throw DomainError(os.str());
    }
  }

  double q(double t) const {
    check_time(t);
    return q_profile(t);
  }
};

/// F(t) = (1/q(t) - 1)/(1/p - 1).
inline double F_negbin(const NegBinParams& params, double t) {
  params.validate();
  const double q = params.q(t);
  return (1.0 / q - 1.0) / (1.0 / params.p - 1.0);
}

namespace detail {

/// log(w)^alpha for w >= 1; roundoff-negative logs (w a hair below 1) map to 0.
/// For alpha = 1 any w > 0 is accepted.
inline double log_power(double w, double alpha) {
  if (!(w > 0.0)) throw DomainError("pgf_negbin: argument of log must be positive");
  double lw = std::log(w);
  if (alpha == 1.0) return lw;
  if (lw < 0.0) {
    if (lw > -64.0 * DBL_EPSILON) lw = 0.0;
    else throw DomainError("pgf_negbin: u > 1 leaves the real branch of log^alpha for alpha < 1");
  }
  return std::pow(lw, alpha);
}

/// {E_{nu,1}(-log^alpha((1-(1-q)u)/q))}^r.
inline double negbin_core_pgf(double alpha, double nu, int r, double q, double u, const SpecfunConfig& cfg) {
  if (q == 1.0) return 1.0;
  if (!(std::abs(u) < 1.0 / (1.0 - q))) throw DomainError("pgf_negbin: |u| must be < 1/(1-q)");
  const double x = -log_power((1.0 - (1.0 - q) * u) / q, alpha);
  return std::pow(mittag_leffler(nu, 1.0, x, cfg).value, r);
}

}  // namespace detail

/// pgf of N_rho(t):
///   rho(1-F) + rho F {E_nu(-log^a((1-(1-p)u)/p))}^r + (1-rho){E_nu(-log^a((1-(1-q)u)/q))}^r.
inline double pgf_negbin(const NegBinParams& params, double t, double u, const SpecfunConfig& cfg = {}) {
  const double F = F_negbin(params, t);
  const double q = params.q(t);
  if (u == 1.0) return 1.0;
  double g = 0.0;
  if (params.rho > 0.0) {
    const double gT = detail::negbin_core_pgf(params.alpha, params.nu, params.r, params.p, u, cfg);
    g += params.rho * (1.0 - F) + params.rho * F * gT;
  }
  if (params.rho < 1.0) g += (1.0 - params.rho) * detail::negbin_core_pgf(params.alpha, params.nu, params.r, q, u, cfg);
  return g;
}

/// The Fox-Wright parameters 2Psi2[(1,alpha),(1,1); (1-h,alpha),(1,nu)].
inline FoxWrightSpec negbin_fox_wright_spec(std::size_t h, double alpha, double nu) {
  FoxWrightSpec spec({{1.0, alpha}, {1.0, 1.0}}, {{1.0 - static_cast<double>(h), alpha}, {1.0, nu}});
  // margin alpha + nu - (alpha + 1) = nu - 1 > -1
  if (!(spec.convergence_margin() > -1.0)) throw InvalidSpec("negbin_fox_wright_spec: margin");
  return spec;
}

/// Uncorrelated r = 1 pmf for a given A = 1/q - 1, k = 0..K.
inline PmfTable negbin_core_pmf(double alpha, double nu, double A, std::size_t K, const SpecfunConfig& cfg = {}) {
  if (!(A >= 0.0) || !std::isfinite(A)) throw DomainError("negbin_core_pmf: A must be >= 0");
  std::vector<double> probs(K + 1, 0.0);
  if (A == 0.0) {
    probs[0] = 1.0;
    return PmfTable::from_probs(std::move(probs));
  }
  double max_ratio = 0.0;
  const double L = std::log1p(A);
  const double z = -std::pow(L, alpha);
  const auto p0 = mittag_leffler(nu, 1.0, z, cfg);
  probs[0] = p0.value;
  max_ratio = p0.cancellation_ratio();

  // Psi_h for h = 1..K, shared across k.
  std::vector<double> psi(K + 1, 0.0);
  for (std::size_t h = 1; h <= K; ++h) {
    const auto v = fox_wright(negbin_fox_wright_spec(h, alpha, nu), z, cfg);
    psi[h] = v.value;
    max_ratio = std::max(max_ratio, v.cancellation_ratio());
  }

  const double log_A = std::log(A);
  const double log_L = std::log(L);
  for (std::size_t k = 1; k <= K; ++k) {
    const double kd = static_cast<double>(k);
    // log|(1/k!) A^k / (1+A)^k|, sign (-1)^k
    const double log_pref = kd * (log_A - L) - std::lgamma(kd + 1.0);
    const double sign_k = (k % 2 == 0) ? 1.0 : -1.0;
    double sum = 0.0;
    double max_term = 0.0;
    for (std::size_t h = 1; h <= k; ++h) {
      const auto s = stirling_first(k, h, cfg.stirling_cap);
      if (s == 0 || psi[h] == 0.0) continue;
      const double s_abs = std::abs(s.convert_to<double>());
      const double mag = std::exp(log_pref + std::log(s_abs) - static_cast<double>(h) * log_L);
      const double term = (s < 0 ? -1.0 : 1.0) * mag * psi[h];
      sum += term;
      max_term = std::max(max_term, std::abs(term));
    }
    const double value = sign_k * sum;
    const double ratio = max_term / std::max(std::abs(value), DBL_MIN);
    if (max_term > 0.0 && ratio > cfg.cancellation_limit) {
      std::ostringstream os;
      os << "negbin_core_pmf: cancellation ratio " << ratio << " at k=" << k;
      throw CancellationLoss(os.str());
    }
    if (max_term > 0.0) max_ratio = std::max(max_ratio, ratio);
    probs[k] = value;
  }
  auto table = PmfTable::from_probs(std::move(probs));
  table.max_cancellation_ratio = max_ratio;
  return table;
}

/// P(N_rho(t) = k), k = 0..K, for r = 1:
///   (1-rho) core(t) + rho[(1/p - 1/q(t))/(1/p - 1) 1{k=0} + (1/q(t) - 1)/(1/p - 1) core(T)].
inline PmfTable pmf_negbin_r1(const NegBinParams& params, double t, std::size_t K, const SpecfunConfig& cfg = {}) {
  params.validate();
  if (params.r != 1)
    throw UnsupportedR("pmf_negbin_r1: closed-form pmf exists only for r = 1; use pgf_negbin for r >= 2");
  const double q = params.q(t);
  const double F = (1.0 / q - 1.0) / (1.0 / params.p - 1.0);
  std::vector<double> probs(K + 1, 0.0);
  double max_ratio = 0.0;
  if (params.rho < 1.0) {
    const auto core = negbin_core_pmf(params.alpha, params.nu, 1.0 / q - 1.0, K, cfg);
    for (std::size_t k = 0; k <= K; ++k) probs[k] += (1.0 - params.rho) * core[k];
    max_ratio = std::max(max_ratio, core.max_cancellation_ratio);
  }
  if (params.rho > 0.0) {
    const auto core = negbin_core_pmf(params.alpha, params.nu, 1.0 / params.p - 1.0, K, cfg);
    probs[0] += params.rho * (1.0 - F);
    for (std::size_t k = 0; k <= K; ++k) probs[k] += params.rho * F * core[k];
    max_ratio = std::max(max_ratio, core.max_cancellation_ratio);
  }
  auto table = PmfTable::from_probs(std::move(probs));
  table.max_cancellation_ratio = max_ratio;
  return table;
}

/// Result of the pgf operator-equation check for alpha = nu, r = 1.
struct OperatorResidual {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
  /// |G((1-a)/b) - 1|, the boundary condition at the base point u = 1.
  double boundary = 0.0;
};

/// Operator (O) and pgf used by the check for rho in {0, 1}.
inline OperatorOAlphaSpec negbin_operator(const NegBinParams& params, double t, int rho) {
  if (rho == 1) return {params.nu, 1.0 / params.p, (params.p - 1.0) / params.p};
  const double q = params.q(t);
  if (!(q < 1.0)) throw DomainError("operator_residual_prop33: q(t) = 1 gives a degenerate operator (t = 0)");
  return {params.nu, 1.0 / q, (q - 1.0) / q};
}

/// |(O)_nu G(u) - RHS| with
///   rho = 1: a = 1/p,    b = (p-1)/p,    RHS = -G(u) + 1 - F(t)
///   rho = 0: a = 1/q(t), b = (q(t)-1)/q(t), RHS = -G(u).
/// The operator needs a + b u > 1, i.e. u < 1.
inline OperatorResidual operator_residual_prop33(const NegBinParams& params, double t, int rho, double u,
                                                 std::size_t n_nodes = 64, const SpecfunConfig& cfg = {}) {
  params.validate();
  if (params.r != 1) throw UnsupportedR("operator_residual_prop33: requires r = 1");
  if (params.alpha != params.nu) throw DomainError("operator_residual_prop33: requires alpha == nu");
  if (rho != 0 && rho != 1) throw DomainError("operator_residual_prop33: rho must be 0 or 1");
  NegBinParams pr = params;
  pr.rho = rho;
  const auto spec = negbin_operator(pr, t, rho);
  spec.log_argument(u);  // domain check: u < 1
  if (!(u > -1.0 / (1.0 - params.p))) throw DomainError("operator_residual_prop33: u outside the pgf domain");

  auto G = [&](double v) { return pgf_negbin(pr, t, v, cfg); };
  OperatorResidual res;
  res.lhs = operator_O_alpha_quadrature(spec, G, u, n_nodes);
  const double g = G(u);
  res.rhs = rho == 1 ? -g + 1.0 - F_negbin(pr, t) : -g;
  res.residual = std::abs(res.lhs - res.rhs);
  res.boundary = std::abs(G(spec.base_point()) - 1.0);
  return res;
}

}  // namespace fcp
