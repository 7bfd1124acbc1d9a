#pragma once

// Special functions used by the counting-process formulas: Mittag-Leffler
// (two and three parameter), Fox-Wright, rising/falling factorials,
// generalized binomial coefficients, signed Stirling numbers of the first
// kind and a reciprocal gamma that is exactly zero on the poles.
//
// All series are summed in double precision with adaptive truncation. No
// asymptotic or contour-integral branch exists: large negative arguments
// surface as CancellationLoss instead of returning silently wrong digits.

#include <algorithm>
#include <array>
#include <cfloat>
#include <cmath>
#include <cstddef>
#include <mutex>
#include <numbers>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <math.h>  // lgamma_r

#include <boost/multiprecision/cpp_int.hpp>

#include "fcp/error.hpp"

namespace fcp {

struct SpecfunConfig {
  double rel_tol = 1e-12;
  std::size_t max_terms = 10'000;
  double cancellation_limit = 1e8;
  /// Largest k for which Stirling numbers may be requested.
  std::size_t stirling_cap = 64;

  void validate() const {
    detail::require(rel_tol > 0 && std::isfinite(rel_tol), "SpecfunConfig: rel_tol must be > 0");
    detail::require(max_terms >= 1, "SpecfunConfig: max_terms must be >= 1");
    detail::require(cancellation_limit > 0, "SpecfunConfig: cancellation_limit must be > 0");
  }
};

/// A summed series together with its truncation/roundoff error estimate and
/// the largest term magnitude seen (cancellation diagnostic).
struct SeriesValue {
  double value = 0.0;
  double abs_error_estimate = 0.0;
  std::size_t terms_used = 0;
  double max_term_magnitude = 0.0;

  double cancellation_ratio() const {
    return max_term_magnitude / std::max(std::abs(value), DBL_MIN);
  }
};

namespace detail {

inline bool is_nonpositive_integer(double w) { return w <= 0.0 && w == std::floor(w); }

/// sin(pi*w) with exact argument reduction, so zeros at integers are exact.
inline double sinpi(double w) {
  double r = w - 2.0 * std::round(0.5 * w);  // r in [-1, 1], exact
  if (r > 0.5) r = 1.0 - r;
  else if (r < -0.5) r = -1.0 - r;
  return std::sin(std::numbers::pi * r);
}

/// log|Gamma(w)| and the sign of Gamma(w). Re-entrant (no signgam).
inline double log_abs_gamma(double w, int& sign) {
  int s = 1;
  const double v = ::lgamma_r(w, &s);
  sign = s;
  return v;
}

}  // namespace detail

/// 1/Gamma(w) for every finite real w; exactly 0 at w = 0, -1, -2, ...
inline double recip_gamma_signed(double w) {
  if (!std::isfinite(w)) throw DomainError("recip_gamma_signed: non-finite argument");
  if (detail::is_nonpositive_integer(w)) return 0.0;
  if (w > 0.0) {
    if (w < 171.0) return 1.0 / std::tgamma(w);
    return std::exp(-std::lgamma(w));
  }
  // Reflection: 1/Gamma(w) = Gamma(1-w) sin(pi w) / pi.
  const double s = detail::sinpi(w);
  const double reflected = 1.0 - w;
  if (reflected < 171.0) return std::tgamma(reflected) * s / std::numbers::pi;
  const double mag = std::lgamma(reflected) + std::log(std::abs(s)) - std::log(std::numbers::pi);
  return std::copysign(std::exp(mag), s);
}

/// x (x-1) ... (x-k+1); equals Gamma(x+1)/Gamma(x+1-k) with the pole
/// convention of recip_gamma_signed.
inline double falling_factorial(double x, std::size_t k) {
  double p = 1.0;
  for (std::size_t i = 0; i < k; ++i) p *= x - static_cast<double>(i);
  return p;
}

/// gamma (gamma+1) ... (gamma+r-1), with (gamma)^(0) = 1.
inline double rising_factorial(double gamma, std::size_t r) {
  double p = 1.0;
  for (std::size_t i = 0; i < r; ++i) p *= gamma + static_cast<double>(i);
  return p;
}

/// Binomial coefficient of real order: prod_{i<j} (alpha - i) / j!.
inline double gen_binom(double alpha, std::size_t j) {
  double c = 1.0;
  for (std::size_t i = 0; i < j; ++i) c *= (alpha - static_cast<double>(i)) / static_cast<double>(i + 1);
  return c;
}

/// Sums term(0) + term(1) + ... until three consecutive terms fall below
/// rel_tol times the running sum. Throws NonConvergent when max_terms is
/// exhausted and CancellationLoss when max|term| / |sum| exceeds the limit.
template <class TermFn>
SeriesValue sum_series(TermFn&& term, const SpecfunConfig& cfg, std::string_view what) {
  // Neumaier-compensated accumulation.
  double sum = 0.0;
  double comp = 0.0;
  double max_term = 0.0;
  std::array<double, 3> recent{0.0, 0.0, 0.0};
  int small_run = 0;
  std::size_t n = 0;
  bool converged = false;

  for (; n < cfg.max_terms; ++n) {
    const double t = term(n);
    if (!std::isfinite(t)) {
      std::ostringstream os;
      os << what << ": non-finite term at index " << n;
      throw NonConvergent(os.str());
    }
    const double s = sum + t;
    comp += (std::abs(sum) >= std::abs(t)) ? (sum - s) + t : (t - s) + sum;
    sum = s;
    max_term = std::max(max_term, std::abs(t));
    recent[n % 3] = std::abs(t);
    if (std::abs(t) < cfg.rel_tol * std::abs(sum + comp)) {
      if (++small_run >= 3) {
        ++n;
        converged = true;
        break;
      }
    } else {
      small_run = 0;
    }
  }
  if (!converged) {
    std::ostringstream os;
    os << what << ": no convergence within " << cfg.max_terms << " terms";
    throw NonConvergent(os.str());
  }

  SeriesValue out;
  out.value = sum + comp;
  out.terms_used = n;
  out.max_term_magnitude = max_term;
  out.abs_error_estimate = recent[0] + recent[1] + recent[2] +
                           DBL_EPSILON * max_term * std::sqrt(static_cast<double>(n));
  if (out.cancellation_ratio() > cfg.cancellation_limit) {
    std::ostringstream os;
    os << what << ": cancellation ratio " << out.cancellation_ratio() << " exceeds limit "
       << cfg.cancellation_limit;
    throw CancellationLoss(os.str());
  }
  return out;
}

namespace detail {

/// sign(x)^r |x|^r / Gamma(arg), falling back to log space when the direct
/// product would overflow.
inline double power_over_gamma(double x, std::size_t r, double arg) {
  if (r == 0) return recip_gamma_signed(arg);
  if (x == 0.0) return 0.0;
  const double rd = static_cast<double>(r);
  const double log_pow = rd * std::log(std::abs(x));
  if (arg < 170.0 && std::abs(log_pow) < 700.0) return std::pow(x, rd) * recip_gamma_signed(arg);
  if (is_nonpositive_integer(arg)) return 0.0;
  int sg = 1;
  const double lg = log_abs_gamma(arg, sg);
  const double sign = ((x < 0.0 && (r % 2 == 1)) ? -1.0 : 1.0) * sg;
  return sign * std::exp(log_pow - lg);
}

inline void check_ml_args(double alpha, double beta, double x, std::string_view what) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError(std::string(what) + ": alpha must lie in (0,1]");
  if (!(beta > 0.0)) throw DomainError(std::string(what) + ": beta must be > 0");
  if (!std::isfinite(x)) throw DomainError(std::string(what) + ": argument must be finite");
}

}  // namespace detail

/// E_{alpha,beta}(x) = sum_r x^r / Gamma(alpha r + beta).
inline SeriesValue mittag_leffler(double alpha, double beta, double x, const SpecfunConfig& cfg = {}) {
  detail::check_ml_args(alpha, beta, x, "mittag_leffler");
  cfg.validate();
  if (x == 0.0) return SeriesValue{recip_gamma_signed(beta), 0.0, 1, std::abs(recip_gamma_signed(beta))};
  return sum_series(
      [&](std::size_t r) { return detail::power_over_gamma(x, r, alpha * static_cast<double>(r) + beta); },
      cfg, "mittag_leffler");
}

/// Three-parameter (Prabhakar) Mittag-Leffler
/// E^gamma_{alpha,beta}(x) = sum_r (gamma)^(r) x^r / (r! Gamma(alpha r + beta)).
inline SeriesValue gen_mittag_leffler(double alpha, double beta, double gamma, double x,
                                      const SpecfunConfig& cfg = {}) {
  detail::check_ml_args(alpha, beta, x, "gen_mittag_leffler");
  if (!std::isfinite(gamma)) throw DomainError("gen_mittag_leffler: gamma must be finite");
  cfg.validate();
  if (x == 0.0) return SeriesValue{recip_gamma_signed(beta), 0.0, 1, std::abs(recip_gamma_signed(beta))};

  // log|(gamma)^(r) x^r / r!| is accumulated incrementally; a zero factor
  // (gamma a non-positive integer) terminates the polynomial.
  const double log_abs_x = std::log(std::abs(x));
  double log_coeff = 0.0;
  double coeff_sign = 1.0;
  bool coeff_zero = false;
  std::size_t last = 0;
  return sum_series(
      [&](std::size_t r) {
        if (r > 0) {
          while (last < r) {
            const double f = (gamma + static_cast<double>(last)) / static_cast<double>(last + 1);
            if (f == 0.0) coeff_zero = true;
            else {
              log_coeff += std::log(std::abs(f)) + log_abs_x;
              if ((f < 0.0) != (x < 0.0)) coeff_sign = -coeff_sign;
            }
            ++last;
          }
        }
        if (coeff_zero) return 0.0;
        const double arg = alpha * static_cast<double>(r) + beta;
        if (arg < 170.0 && std::abs(log_coeff) < 700.0)
          return coeff_sign * std::exp(log_coeff) * recip_gamma_signed(arg);
        int sg = 1;
        const double lg = detail::log_abs_gamma(arg, sg);
        return coeff_sign * sg * std::exp(log_coeff - lg);
      },
      cfg, "gen_mittag_leffler");
}

/// One (a, alpha) or (b, beta) parameter pair of a Fox-Wright function.
struct FoxWrightParam {
  double shift;
  double scale;
};

/// Parameter lists of pPsi_q. The convergence margin
/// sum(beta_k) - sum(alpha_h) > -1 is checked at construction.
class FoxWrightSpec {
 public:
  FoxWrightSpec(std::vector<FoxWrightParam> upper, std::vector<FoxWrightParam> lower)
      : upper_(std::move(upper)), lower_(std::move(lower)) {
    for (const auto& p : upper_)
      if (!(p.scale > 0.0) || !std::isfinite(p.shift)) throw InvalidSpec("FoxWrightSpec: upper scales must be > 0");
    for (const auto& p : lower_)
      if (!(p.scale > 0.0) || !std::isfinite(p.shift)) throw InvalidSpec("FoxWrightSpec: lower scales must be > 0");
    if (!(convergence_margin() > -1.0)) {
      std::ostringstream os;
      os << "FoxWrightSpec: convergence margin " << convergence_margin() << " must exceed -1";
      throw InvalidSpec(os.str());
    }
  }

  const std::vector<FoxWrightParam>& upper() const { return upper_; }
  const std::vector<FoxWrightParam>& lower() const { return lower_; }

  double convergence_margin() const {
    double m = 0.0;
    for (const auto& p : lower_) m += p.scale;
    for (const auto& p : upper_) m -= p.scale;
    return m;
  }

 private:
  std::vector<FoxWrightParam> upper_;
  std::vector<FoxWrightParam> lower_;
};

/// pPsi_q(z) = sum_j prod Gamma(a_h + alpha_h j) / prod Gamma(b_k + beta_k j) z^j / j!.
/// A lower factor 1/Gamma(w) at a pole annihilates its term.
inline SeriesValue fox_wright(const FoxWrightSpec& spec, double z, const SpecfunConfig& cfg = {}) {
  if (!std::isfinite(z)) throw DomainError("fox_wright: argument must be finite");
  cfg.validate();

  auto term = [&](std::size_t j) {
    const double jd = static_cast<double>(j);
    double log_mag = 0.0;
    double sign = 1.0;
    for (const auto& p : spec.lower()) {
      const double w = p.shift + p.scale * jd;
      if (detail::is_nonpositive_integer(w)) return 0.0;
      int sg = 1;
      log_mag -= detail::log_abs_gamma(w, sg);
      sign *= sg;
    }
    for (const auto& p : spec.upper()) {
      const double w = p.shift + p.scale * jd;
      if (detail::is_nonpositive_integer(w)) throw DomainError("fox_wright: upper parameter hits a gamma pole");
      int sg = 1;
      log_mag += detail::log_abs_gamma(w, sg);
      sign *= sg;
    }
    if (j > 0) {
      log_mag += jd * std::log(std::abs(z)) - std::lgamma(jd + 1.0);
      if (z < 0.0 && (j % 2 == 1)) sign = -sign;
    }
    return sign * std::exp(log_mag);
  };

  if (z == 0.0) {
    const double t0 = term(0);
    return SeriesValue{t0, 0.0, 1, std::abs(t0)};
  }
  return sum_series(term, cfg, "fox_wright");
}

inline constexpr std::size_t kStirlingDefaultCap = 64;

namespace detail {

/// Lower-triangular memo of s_{k,h}; grown on demand under a writer lock so
/// concurrent first access fills it exactly once per row.
class StirlingTable {
 public:
  using Int = boost::multiprecision::cpp_int;

  static StirlingTable& instance() {
    static StirlingTable table;
    return table;
  }

  Int get(std::size_t k, std::size_t h) {
    {
      std::shared_lock lock(mutex_);
      if (k < rows_.size()) return rows_[k][h];
    }
    std::unique_lock lock(mutex_);
    grow_to(k);
    return rows_[k][h];
  }

 private:
  StirlingTable() { rows_.push_back({Int(1)}); }

  void grow_to(std::size_t k) {
    while (rows_.size() <= k) {
      const std::size_t n = rows_.size() - 1;  // build row n+1 from row n
      const auto& prev = rows_.back();
      std::vector<Int> next(n + 2, Int(0));
      for (std::size_t h = 1; h <= n + 1; ++h) {
        Int v = (h - 1 <= n) ? prev[h - 1] : Int(0);
        if (h <= n) v -= Int(n) * prev[h];
        next[h] = std::move(v);
      }
      rows_.push_back(std::move(next));
    }
  }

  std::shared_mutex mutex_;
  std::vector<std::vector<Int>> rows_;
};

}  // namespace detail

/// Signed Stirling number of the first kind s_{k,h}, exact:
/// x(x-1)...(x-k+1) = sum_h s_{k,h} x^h. Zero for h > k.
inline boost::multiprecision::cpp_int stirling_first(std::size_t k, std::size_t h,
                                                     std::size_t cap = kStirlingDefaultCap) {
  if (k > cap) {
    std::ostringstream os;
    os << "stirling_first: k=" << k << " exceeds cap " << cap;
    throw OutOfRange(os.str());
  }
  if (h > k) return 0;
  return detail::StirlingTable::instance().get(k, h);
}

inline double stirling_first_double(std::size_t k, std::size_t h, std::size_t cap = kStirlingDefaultCap) {
  return stirling_first(k, h, cap).convert_to<double>();
}

}  // namespace fcp
