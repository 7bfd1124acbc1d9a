#pragma once

// Tanh-sinh (double exponential) quadrature on a finite interval. The
// integrand receives the node together with its exact distances to both
// endpoints, so weakly singular factors such as (b - x)^(-nu) can be formed
// without cancellation right next to an endpoint.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <sstream>

#include "fcp/error.hpp"

namespace fcp::detail {

struct TanhSinhResult {
  double value = 0.0;
  double last_change = 0.0;
  std::size_t levels = 0;
  std::size_t evaluations = 0;
};

/// Integrates f(x, x - a, b - x) over [a, b]. Starts with roughly n_nodes
/// nodes and halves the step until two successive levels agree to
/// 1e-11 relative, at most max_levels times. Throws QuadratureFailure when the
/// final change still exceeds accept_rel relative (plus a tiny absolute floor).
template <class F>
TanhSinhResult tanh_sinh(F&& f, double a, double b, std::size_t n_nodes, double accept_rel = 1e-4,
                         std::size_t max_levels = 8) {
  if (!(b > a)) throw DomainError("tanh_sinh: empty interval");
  constexpr double kTMax = 6.0;
  constexpr double kHalfPi = std::numbers::pi / 2.0;
  const double half = 0.5 * (b - a);
  const double width = b - a;
  const double h0 = 2.0 * kTMax / static_cast<double>(n_nodes < 4 ? 4 : n_nodes);

  TanhSinhResult res;
  // Adds nodes t = k*h for k = first, first+stride, ... on both sides of 0.
  auto accumulate = [&](double h, std::size_t first, std::size_t stride) {
    double s = 0.0;
    for (std::size_t k = first;; k += stride) {
      const double t = static_cast<double>(k) * h;
      if (t > kTMax) break;
      const double u = kHalfPi * std::sinh(t);
      const double e = std::exp(-2.0 * u);
      const double comp = 2.0 * e / (1.0 + e);  // 1 - tanh(u)
      const double dist = half * comp;
      if (dist <= 0.0) break;
      const double w = kHalfPi * std::cosh(t) * comp * (2.0 - comp);
      s += w * (f(a + dist, dist, width - dist) + f(b - dist, width - dist, dist));
      res.evaluations += 2;
    }
    return s;
  };

  double h = h0;
  double raw = kHalfPi * f(a + half, half, half) + accumulate(h, 1, 1);
  res.evaluations += 1;
  double value = half * h * raw;
  double change = 0.0;
  for (std::size_t level = 1; level <= max_levels; ++level) {
    h *= 0.5;
    raw += accumulate(h, 1, 2);
    const double next = half * h * raw;
    change = std::abs(next - value);
    value = next;
    res.levels = level;
    if (level >= 2 && change <= 1e-11 * std::abs(value) + 1e-15) break;
  }
  res.value = value;
  res.last_change = change;
  if (!std::isfinite(value) || change > accept_rel * std::abs(value) + 1e-12) {
    std::ostringstream os;
    os << "tanh_sinh: node doubling changed the result by " << change << " (value " << value << ")";
    throw QuadratureFailure(os.str());
  }
  return res;
}

/// Derivative of f at x inside [a, b] using only points of [a, b]. The step
/// is rel_step*scale, shrunk to 1e-3 of the distance to a where f' may be
/// weakly singular; central differences where they fit, otherwise a
/// second-order backward stencil (near b).
template <class F>
double derivative_within(F& f, double x, double dist_a, double dist_b, double scale, double rel_step = 1e-5) {
  const double h = std::min(rel_step * scale, 1e-3 * dist_a);
  if (h == 0.0) return 0.0;
  if (dist_b >= h) return (f(x + h) - f(x - h)) / (2.0 * h);
  return (3.0 * f(x) - 4.0 * f(x - h) + f(x - 2.0 * h)) / (2.0 * h);
}

}  // namespace fcp::detail
