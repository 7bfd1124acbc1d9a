#pragma once

// Fractional operators: the Caputo time derivative (termwise on power series,
// and by quadrature as an independent check), the fractional difference
// (I - B)^alpha on pmf sequences, and the log-transformed Caputo-like
// operator (O)_alpha acting on functions of z through x = log(a + b z).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <sstream>
#include <utility>
#include <vector>

#include "fcp/error.hpp"
#include "fcp/pmf_table.hpp"
#include "fcp/quadrature.hpp"
#include "fcp/specfun.hpp"

namespace fcp {

/// Finite sum of coefficient * t^exponent with strictly increasing
/// exponents >= 0. Exponents closer than 1e-14 (relative) are merged.
class PowerSeriesInT {
 public:
  struct Term {
    double coefficient;
    double exponent;
  };

  PowerSeriesInT() = default;

  explicit PowerSeriesInT(std::vector<Term> terms) {
    for (const auto& t : terms) {
      if (!(t.exponent >= 0.0) || !std::isfinite(t.exponent))
        throw DomainError("PowerSeriesInT: exponents must be finite and >= 0");
      if (!std::isfinite(t.coefficient)) throw DomainError("PowerSeriesInT: non-finite coefficient");
    }
    std::sort(terms.begin(), terms.end(), [](const Term& x, const Term& y) { return x.exponent < y.exponent; });
    for (const auto& t : terms) {
      if (!terms_.empty() &&
          std::abs(t.exponent - terms_.back().exponent) <= 1e-14 * std::max(1.0, t.exponent))
        terms_.back().coefficient += t.coefficient;
      else
        terms_.push_back(t);
    }
  }

  const std::vector<Term>& terms() const { return terms_; }

  double operator()(double t) const {
    double s = 0.0;
    for (const auto& term : terms_) s += term.coefficient * (term.exponent == 0.0 ? 1.0 : std::pow(t, term.exponent));
    return s;
  }

 private:
  std::vector<Term> terms_;
};

namespace detail {

/// Gamma(mu+1)/Gamma(mu+1-nu) for mu > 0, nu in (0,1].
inline double caputo_power_factor(double mu, double nu) {
  const double lower = mu + 1.0 - nu;
  if (mu + 1.0 < 170.0) return std::tgamma(mu + 1.0) * recip_gamma_signed(lower);
  int s1 = 1, s2 = 1;
  return std::exp(log_abs_gamma(mu + 1.0, s1) - log_abs_gamma(lower, s2)) * s1 * s2;
}

inline void check_order(double nu, bool allow_one, const char* what) {
  const bool ok = allow_one ? (nu > 0.0 && nu <= 1.0) : (nu > 0.0 && nu < 1.0);
  if (!ok) throw DomainError(std::string(what) + (allow_one ? ": order must lie in (0,1]" : ": order must lie in (0,1)"));
}

}  // namespace detail

/// Caputo derivative of order nu of a power series at t > 0, by the power
/// rule d^nu t^mu = Gamma(mu+1)/Gamma(mu+1-nu) t^(mu-nu); constants map to 0.
inline double caputo_derivative_series(const PowerSeriesInT& f, double nu, double t) {
  detail::check_order(nu, true, "caputo_derivative_series");
  if (!(t > 0.0)) throw DomainError("caputo_derivative_series: t must be > 0");
  double s = 0.0;
  for (const auto& term : f.terms()) {
    if (term.exponent == 0.0 || term.coefficient == 0.0) continue;
    s += term.coefficient * detail::caputo_power_factor(term.exponent, nu) * std::pow(t, term.exponent - nu);
  }
  return s;
}

/// (1/Gamma(1-nu)) int_0^t (t-s)^(-nu) f'(s) ds by tanh-sinh quadrature, with
/// f' from finite differences evaluated inside [0, t] only. f may have a
/// weakly singular derivative at s = 0 (f(s) ~ s^mu, 0 < mu < 1).
template <class F>
double caputo_derivative_quadrature(F&& f, double nu, double t, std::size_t n_nodes = 64) {
  detail::check_order(nu, false, "caputo_derivative_quadrature");
  if (!(t > 0.0)) throw DomainError("caputo_derivative_quadrature: t must be > 0");
  auto integrand = [&](double s, double dist0, double dist_t) {
    const double fp = detail::derivative_within(f, s, dist0, dist_t, t);
    return std::pow(dist_t, -nu) * fp;
  };
  const auto res = detail::tanh_sinh(integrand, 0.0, t, n_nodes);
  return res.value * recip_gamma_signed(1.0 - nu);
}

/// (I - B)^alpha applied to a pmf sequence at index k:
/// sum_{j=0}^k (-1)^j binom(alpha, j) p[k-j].
inline double frac_difference(const PmfTable& pmf, double alpha, std::size_t k) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("frac_difference: alpha must lie in (0,1]");
  if (k > pmf.K()) throw DomainError("frac_difference: k beyond the pmf table");
  double s = 0.0;
  double coeff = 1.0;  // (-1)^j binom(alpha, j)
  for (std::size_t j = 0; j <= k; ++j) {
    s += coeff * pmf[k - j];
    coeff *= -(alpha - static_cast<double>(j)) / static_cast<double>(j + 1);
  }
  return s;
}

/// Parameters (alpha, a, b) of the operator (O)_alpha. Evaluation points z
/// must satisfy a + b z > 1 so that log(a + b z) > 0.
struct OperatorOAlphaSpec {
  double alpha;
  double a;
  double b;

  void validate() const {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("OperatorOAlphaSpec: alpha must lie in (0,1]");
    if (!std::isfinite(a) || !std::isfinite(b) || b == 0.0) throw DomainError("OperatorOAlphaSpec: need finite a and b != 0");
  }

  /// The base point (1-a)/b where a + b z = 1.
  double base_point() const { return (1.0 - a) / b; }

  /// log(a + b z); throws DomainError unless a + b z > 1.
  double log_argument(double z) const {
    const double w = a + b * z;
    if (!(w > 1.0) || !std::isfinite(w)) {
      std::ostringstream os;
      os << "(O)_alpha: need a + b z > 1, got " << w << " at z=" << z;
      throw DomainError(os.str());
    }
    return std::log(w);
  }
};

/// (O)_alpha f(z). For alpha = 1 this is (a/b + z) f'(z). For alpha in (0,1)
/// the defining integral is rewritten with y = log(a+b tau)/log(a+b z):
///   (O)_alpha f(z) = L^(-alpha)/Gamma(1-alpha) int_0^1 (1-y)^(-alpha) g'(y) dy,
/// where L = log(a + b z) and g(y) = f(tau(y)), and evaluated by quadrature.
template <class F>
double operator_O_alpha_quadrature(const OperatorOAlphaSpec& spec, F&& f, double z, std::size_t n_nodes = 64) {
  spec.validate();
  const double L = spec.log_argument(z);
  if (spec.alpha == 1.0) {
    auto fz = [&](double x) { return f(x); };
    const double h = 1e-5 * std::max(1.0, std::abs(z));
    return (spec.a / spec.b + z) * (fz(z + h) - fz(z - h)) / (2.0 * h);
  }
  const double z0 = spec.base_point();
  auto g = [&](double y) { return f(z0 + std::expm1(y * L) / spec.b); };
  return std::pow(L, -spec.alpha) * caputo_derivative_quadrature(g, spec.alpha, 1.0, n_nodes);
}

/// Closed form (O)_alpha log^beta(a+bz) = Gamma(beta+1)/Gamma(beta+1-alpha) log^(beta-alpha)(a+bz);
/// beta = 0 (a constant) maps to 0.
inline double operator_O_alpha_on_log_powers(const OperatorOAlphaSpec& spec, double beta, double z) {
  spec.validate();
  if (!(beta > -1.0)) throw DomainError("operator_O_alpha_on_log_powers: beta must be > -1");
  const double L = spec.log_argument(z);
  if (beta == 0.0) return 0.0;
  return std::tgamma(beta + 1.0) * recip_gamma_signed(beta + 1.0 - spec.alpha) * std::pow(L, beta - spec.alpha);
}

}  // namespace fcp
