#pragma once

// Correlated space-time fractional Poisson process on [0, T].
//
// The total count M_g = N(T) has pgf E_{nu,1}(-lambda^alpha T^nu (1-u)^alpha)
// and the event times have distribution function F(t) = (t/T)^(nu/alpha).
// For rho = 0 the marginal at t is the space-time fractional Poisson law
// with pgf E_{nu,1}(-lambda^alpha t^nu (1-u)^alpha); for general rho the
// marginal is the three-component mixture
//   (1-rho) P(N_0(t)=k) + rho[(1-F(t)) 1{k=0} + F(t) P(M_g=k)].

#include <cmath>
#include <cstddef>
#include <sstream>
#include <vector>

#include "fcp/error.hpp"
#include "fcp/fracops.hpp"
#include "fcp/pmf_table.hpp"
#include "fcp/specfun.hpp"

namespace fcp {

struct StfpParams {
  double alpha = 1.0;
  double nu = 1.0;
  double lambda = 1.0;
  double T = 1.0;
  double rho = 0.0;

  void validate() const {
    detail::require(alpha > 0.0 && alpha <= 1.0, "StfpParams: alpha must lie in (0,1]");
    detail::require(nu > 0.0 && nu <= 1.0, "StfpParams: nu must lie in (0,1]");
    detail::require(lambda > 0.0 && std::isfinite(lambda), "StfpParams: lambda must be > 0");
    detail::require(T > 0.0 && std::isfinite(T), "StfpParams: T must be > 0");
    detail::require(rho >= 0.0 && rho <= 1.0, "StfpParams: rho must lie in [0,1]");
  }

  void check_time(double t) const {
    if (!(t >= 0.0 && t <= T)) {
      std::ostringstream os;
      os << "t=" << t << " outside [0, T=" << T << "]";
      throw DomainError(os.str());
    }
  }
};

/// F(t) = (t/T)^(nu/alpha).
inline double F_stfp(const StfpParams& params, double t) {
  params.validate();
  params.check_time(t);
  if (t == params.T) return 1.0;
  return std::pow(t / params.T, params.nu / params.alpha);
}

/// pgf of N_rho(t):
///   rho(1-F) + rho F E_nu(-lambda^a T^nu (1-u)^a) + (1-rho) E_nu(-lambda^a t^nu (1-u)^a).
inline double pgf(const StfpParams& params, double t, double u, const SpecfunConfig& cfg = {}) {
  const double F = F_stfp(params, t);
  if (!(u >= -1.0 && u <= 1.0)) throw DomainError("pgf: u must lie in [-1,1]");
  if (u == 1.0) return 1.0;
  const double la = std::pow(params.lambda, params.alpha);
  const double w = std::pow(1.0 - u, params.alpha);
  double g = 0.0;
  if (params.rho > 0.0) {
    const double gT = mittag_leffler(params.nu, 1.0, -la * std::pow(params.T, params.nu) * w, cfg).value;
    g += params.rho * (1.0 - F) + params.rho * F * gT;
  }
  if (params.rho < 1.0) {
    const double gt = mittag_leffler(params.nu, 1.0, -la * std::pow(t, params.nu) * w, cfg).value;
    g += (1.0 - params.rho) * gt;
  }
  return g;
}

/// P(N_0(s) = k) for the uncorrelated process, given x = lambda^alpha s^nu:
///   (-1)^k/k! sum_r (-x)^r / Gamma(nu r + 1) * Gamma(alpha r + 1)/Gamma(alpha r + 1 - k).
/// The gamma ratio is the falling factorial (alpha r)_k, exactly zero where
/// Gamma(alpha r + 1 - k) has a pole.
inline SeriesValue stfp_series(double alpha, double nu, double x, std::size_t k, const SpecfunConfig& cfg = {}) {
  if (x == 0.0) return SeriesValue{k == 0 ? 1.0 : 0.0, 0.0, 1, k == 0 ? 1.0 : 0.0};
  const double log_kfact = std::lgamma(static_cast<double>(k) + 1.0);
  const double kfact = std::exp(log_kfact);
  const double sign_k = (k % 2 == 0) ? 1.0 : -1.0;
  auto term = [&](std::size_t r) {
    const double ar = alpha * static_cast<double>(r);
    const double ff = falling_factorial(ar, k);
    if (ff == 0.0) return 0.0;
    const double pg = detail::power_over_gamma(-x, r, nu * static_cast<double>(r) + 1.0);
    const double direct = sign_k * pg * ff / kfact;
    if (std::isfinite(direct) && (pg != 0.0 || r == 0)) return direct;
    // log space when the direct product over/underflows
    double log_ff = 0.0;
    double sign = sign_k * ((r % 2 == 1) ? -1.0 : 1.0);
    for (std::size_t i = 0; i < k; ++i) {
      const double f = ar - static_cast<double>(i);
      log_ff += std::log(std::abs(f));
      if (f < 0.0) sign = -sign;
    }
    const double lg = std::lgamma(nu * static_cast<double>(r) + 1.0);
    return sign * std::exp(static_cast<double>(r) * std::log(x) - lg + log_ff - log_kfact);
  };
  return sum_series(term, cfg, "stfp_series");
}

namespace detail {

struct StfpMixturePieces {
  double F;
  double x_t;
  double x_T;
};

inline StfpMixturePieces stfp_pieces(const StfpParams& params, double t) {
  const double la = std::pow(params.lambda, params.alpha);
  return {F_stfp(params, t), la * std::pow(t, params.nu), la * std::pow(params.T, params.nu)};
}

}  // namespace detail

/// P(N_rho(t) = k) for k = 0..K, with the tail mass beyond K recorded.
inline PmfTable pmf(const StfpParams& params, double t, std::size_t K, const SpecfunConfig& cfg = {}) {
  const auto pc = detail::stfp_pieces(params, t);
  std::vector<double> probs(K + 1, 0.0);
  double max_ratio = 0.0;
  for (std::size_t k = 0; k <= K; ++k) {
    double v = 0.0;
    if (params.rho < 1.0) {
      const auto s = stfp_series(params.alpha, params.nu, pc.x_t, k, cfg);
      max_ratio = std::max(max_ratio, s.max_term_magnitude > 0 ? s.cancellation_ratio() : 0.0);
      v += (1.0 - params.rho) * s.value;
    }
    if (params.rho > 0.0) {
      const auto s = stfp_series(params.alpha, params.nu, pc.x_T, k, cfg);
      max_ratio = std::max(max_ratio, s.max_term_magnitude > 0 ? s.cancellation_ratio() : 0.0);
      v += params.rho * ((k == 0 ? 1.0 - pc.F : 0.0) + pc.F * s.value);
    }
    probs[k] = v;
  }
  auto table = PmfTable::from_probs(std::move(probs));
  table.max_cancellation_ratio = max_ratio;
  return table;
}

/// Single entry P(N_rho(t) = k).
inline double pmf_entry(const StfpParams& params, double t, std::size_t k, const SpecfunConfig& cfg = {}) {
  const auto pc = detail::stfp_pieces(params, t);
  double v = 0.0;
  if (params.rho < 1.0) v += (1.0 - params.rho) * stfp_series(params.alpha, params.nu, pc.x_t, k, cfg).value;
  if (params.rho > 0.0)
    v += params.rho * ((k == 0 ? 1.0 - pc.F : 0.0) + pc.F * stfp_series(params.alpha, params.nu, pc.x_T, k, cfg).value);
  return v;
}

/// P(N_rho(t) = k) as an explicit power series in t, truncated at R terms of
/// the uncorrelated part:
///   (1-rho) sum_{r<R} c_r t^(nu r) + rho 1{k=0} + rho (P(M_g=k) - 1{k=0}) T^(-nu/alpha) t^(nu/alpha).
inline PowerSeriesInT pmf_power_series(const StfpParams& params, std::size_t k, std::size_t R = 300,
                                       const SpecfunConfig& cfg = {}) {
  params.validate();
  std::vector<PowerSeriesInT::Term> terms;
  const double la = std::pow(params.lambda, params.alpha);
  const double kfact = std::tgamma(static_cast<double>(k) + 1.0);
  const double sign_k = (k % 2 == 0) ? 1.0 : -1.0;
  if (params.rho < 1.0) {
    for (std::size_t r = 0; r < R; ++r) {
      const double ff = falling_factorial(params.alpha * static_cast<double>(r), k);
      if (ff == 0.0) continue;
      const double c = detail::power_over_gamma(-la, r, params.nu * static_cast<double>(r) + 1.0) * ff / kfact;
      if (c == 0.0 || !std::isfinite(c)) continue;
      terms.push_back({(1.0 - params.rho) * sign_k * c, params.nu * static_cast<double>(r)});
    }
  }
  if (params.rho > 0.0) {
    const double pT = pmf_entry(params, params.T, k, cfg);
    const double delta = k == 0 ? 1.0 : 0.0;
    if (k == 0) terms.push_back({params.rho, 0.0});
    const double e = params.nu / params.alpha;
    terms.push_back({params.rho * (pT - delta) / std::pow(params.T, e), e});
  }
  return PowerSeriesInT(std::move(terms));
}

/// Both sides and the absolute residual of a governing-equation check.
struct Residual {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
};

namespace detail {

/// Right-hand side of the fractional governing equation for P(N_rho(t)=k).
inline double governing_rhs(const StfpParams& params, double t, std::size_t k, const SpecfunConfig& cfg) {
  const auto Pt = pmf(params, t, k, cfg);
  const auto PT = pmf(params, params.T, k, cfg);
  const double la = std::pow(params.lambda, params.alpha);
  const double F = F_stfp(params, t);
  const double e = params.nu / params.alpha;
  const double G = detail::caputo_power_factor(e, params.nu) * std::pow(t, -params.nu);
  const double rho = params.rho;
  if (k == 0) return -la * Pt[0] + la * rho - rho * F * (la + G) * (1.0 - PT[0]);
  const double sign = (k % 2 == 0) ? 1.0 : -1.0;
  return -la * frac_difference(Pt, params.alpha, k) + la * rho * (1.0 - F) * sign * gen_binom(params.alpha, k) +
         rho * F * (la * frac_difference(PT, params.alpha, k) + G * PT[k]);
}

}  // namespace detail

/// Residual of the fractional governing equation at (t, k) with the Caputo
/// derivative taken termwise on the power series of P(N_rho(t) = k).
inline Residual governing_residual(const StfpParams& params, double t, std::size_t k, std::size_t R = 300,
                                   const SpecfunConfig& cfg = {}) {
  params.validate();
  if (!(t > 0.0 && t <= params.T)) throw DomainError("governing_residual: t must lie in (0, T]");
  Residual res;
  res.lhs = caputo_derivative_series(pmf_power_series(params, k, R, cfg), params.nu, t);
  res.rhs = detail::governing_rhs(params, t, k, cfg);
  res.residual = std::abs(res.lhs - res.rhs);
  return res;
}

/// Same check with the Caputo derivative of s -> P(N_rho(s) = k) computed by
/// quadrature (ordinary derivative when nu = 1).
inline Residual governing_residual_quadrature(const StfpParams& params, double t, std::size_t k,
                                              std::size_t n_nodes = 64, const SpecfunConfig& cfg = {}) {
  params.validate();
  if (!(t > 0.0 && t <= params.T)) throw DomainError("governing_residual_quadrature: t must lie in (0, T]");
  auto f = [&](double s) { return pmf_entry(params, s, k, cfg); };
  Residual res;
  if (params.nu == 1.0) res.lhs = detail::derivative_within(f, t, t, params.T - t, t);
  else res.lhs = caputo_derivative_quadrature(f, params.nu, t, n_nodes);
  res.rhs = detail::governing_rhs(params, t, k, cfg);
  res.residual = std::abs(res.lhs - res.rhs);
  return res;
}

/// P(N(t)=1, N(T)=1) for the correlated construction: F(t) P(M_g = 1).
/// With alpha = 1 this is (t/T)^nu lambda T^nu E^2_{nu,nu+1}(-lambda T^nu).
inline double joint_prob_brb(const StfpParams& params, double t, const SpecfunConfig& cfg = {}) {
  const double F = F_stfp(params, t);
  return F * pmf_entry(params, params.T, 1, cfg);
}

/// (t/T) lambda T^nu E^2_{nu,nu+1}(-lambda T^nu), the figure's curve.
/// Equals joint_prob_brb at alpha = 1 only for nu = 1; otherwise the ratio is (t/T)^(nu-1).
inline double joint_prob_brb_closed_form(double nu, double lambda, double T, double t, const SpecfunConfig& cfg = {}) {
  detail::require(nu > 0.0 && nu <= 1.0, "joint_prob_brb: nu must lie in (0,1]");
  detail::require(lambda > 0.0 && T > 0.0, "joint_prob_brb: lambda and T must be > 0");
  detail::require(t >= 0.0 && t <= T, "joint_prob_brb: t must lie in [0,T]");
  const double x = lambda * std::pow(T, nu);
  return (t / T) * x * gen_mittag_leffler(nu, nu + 1.0, 2.0, -x, cfg).value;
}

/// Renewal-process counterpart:
/// lambda t^nu E^2_{nu,nu+1}(-lambda t^nu) E_{nu,1}(-lambda (T-t)^nu).
inline double joint_prob_kps(double nu, double lambda, double T, double t, const SpecfunConfig& cfg = {}) {
  detail::require(nu > 0.0 && nu <= 1.0, "joint_prob_kps: nu must lie in (0,1]");
  detail::require(lambda > 0.0 && T > 0.0, "joint_prob_kps: lambda and T must be > 0");
  detail::require(t > 0.0 && t < T, "joint_prob_kps: t must lie in (0,T)");
  const double x = lambda * std::pow(t, nu);
  return x * gen_mittag_leffler(nu, nu + 1.0, 2.0, -x, cfg).value *
         mittag_leffler(nu, 1.0, -lambda * std::pow(T - t, nu), cfg).value;
}

struct Figure1Row {
  double nu;
  double p_kps;
  double p_brb;
};

/// Both joint probabilities over nu = 0.05, 0.10, ..., 1.00.
inline std::vector<Figure1Row> figure1_data(double t = 0.5, double T = 1.0, double lambda = 1.0,
                                            const SpecfunConfig& cfg = {}) {
  std::vector<Figure1Row> rows;
  rows.reserve(20);
  for (int i = 1; i <= 20; ++i) {
    const double nu = i / 20.0;
    rows.push_back({nu, joint_prob_kps(nu, lambda, T, t, cfg), joint_prob_brb_closed_form(nu, lambda, T, t, cfg)});
  }
  return rows;
}

}  // namespace fcp
