#pragma once

// Residual suite for the governing equations: the space-time fractional
// Poisson equations (termwise Caputo and quadrature), the pgf operator
// equations of the negative binomial process, and the two (O)_alpha
// identities on log powers and on Mittag-Leffler functions.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <future>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "fcp/fnegbin.hpp"
#include "fcp/fracops.hpp"
#include "fcp/stfpoisson.hpp"

namespace fcp {

struct VerifyRow {
  std::string equation;
  std::string point;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

namespace detail {

inline std::string describe(std::initializer_list<std::pair<const char*, double>> kv) {
  std::ostringstream os;
  bool first = true;
  for (const auto& [k, v] : kv) {
    os << (first ? "" : ";") << k << '=' << v;
    first = false;
  }
  return os.str();
}

inline VerifyRow make_row(std::string eq, std::string point, double residual, double tol) {
  return {std::move(eq), std::move(point), residual, tol, std::isfinite(residual) && residual <= tol};
}

}  // namespace detail

/// (alpha, nu, rho) combinations for the fractional Poisson equations; lambda = T = 1.
inline const std::vector<StfpParams>& verify_stfp_grid() {
  static const std::vector<StfpParams> grid = {
      {1.0, 1.0, 1.0, 1.0, 0.0}, {0.7, 0.5, 1.0, 1.0, 0.4}, {0.8, 0.6, 1.0, 1.0, 0.3},
      {0.5, 0.8, 1.0, 1.0, 1.0}, {0.9, 0.9, 1.0, 1.0, 0.5}, {0.6, 0.4, 1.0, 1.0, 0.0},
  };
  return grid;
}

/// All residual checks, in a fixed order. Grid points run concurrently.
inline std::vector<VerifyRow> run_verification() {
  using detail::describe;
  using detail::make_row;
  std::vector<std::future<std::vector<VerifyRow>>> jobs;

  for (const auto& params : verify_stfp_grid()) {
    jobs.push_back(std::async(std::launch::async, [params] {
      std::vector<VerifyRow> rows;
      for (double frac : {0.3, 0.6, 1.0}) {
        const double t = frac * params.T;
        for (std::size_t k = 0; k <= 3; ++k) {
          const auto point = describe({{"alpha", params.alpha}, {"nu", params.nu}, {"rho", params.rho}, {"t", t},
                                       {"k", static_cast<double>(k)}});
          rows.push_back(make_row("stfp_termwise", point, governing_residual(params, t, k).residual, 1e-6));
          rows.push_back(
              make_row("stfp_quadrature", point, governing_residual_quadrature(params, t, k).residual, 1e-3));
        }
      }
      return rows;
    }));
  }

  for (double nu : {0.5, 0.8}) {
    for (int rho : {0, 1}) {
      jobs.push_back(std::async(std::launch::async, [nu, rho] {
        std::vector<VerifyRow> rows;
        NegBinParams params;
        params.p = 0.4;
        params.alpha = params.nu = nu;
        params.rho = rho;
        params.q_profile = QProfile::mixture_for(params.p, params.T);
        const double t = 0.5 * params.T;
        for (double u : {0.25, 0.5, 0.75}) {
          const auto res = operator_residual_prop33(params, t, rho, u);
          const auto point = describe({{"alpha", nu}, {"nu", nu}, {"rho", static_cast<double>(rho)}, {"p", params.p},
                                       {"t", t}, {"u", u}});
          rows.push_back(make_row("negbin_operator", point, res.residual, 1e-3));
          rows.push_back(make_row("negbin_boundary", point, res.boundary, 1e-12));
        }
        return rows;
      }));
    }
  }

  jobs.push_back(std::async(std::launch::async, [] {
    std::vector<VerifyRow> rows;
    struct Case {
      double alpha, beta, a, b, z;
    };
    const Case cases[] = {{0.5, 0.5, 1.0, 1.0, 1.0}, {0.5, 1.0, 0.0, 1.0, std::numbers::e},
                          {0.7, 1.5, 1.0, 1.0, 2.0}, {0.3, 2.0, 2.0, 0.5, 3.0},
                          {0.8, 0.9, 1.0, 2.0, 0.7}, {0.4, 1.2, 0.5, 1.0, 1.5}};
    for (const auto& c : cases) {
      const OperatorOAlphaSpec spec{c.alpha, c.a, c.b};
      const auto f = [&](double tau) {
        const double w = c.a + c.b * tau;
        return w <= 1.0 ? 0.0 : std::pow(std::log(w), c.beta);
      };
      const double exact = operator_O_alpha_on_log_powers(spec, c.beta, c.z);
      const double quad = operator_O_alpha_quadrature(spec, f, c.z);
      const auto point =
          describe({{"alpha", c.alpha}, {"beta", c.beta}, {"a", c.a}, {"b", c.b}, {"z", c.z}});
      rows.push_back(make_row("log_power", point, std::abs(exact - quad) / std::max(1.0, std::abs(exact)), 1e-4));
    }
    return rows;
  }));

  jobs.push_back(std::async(std::launch::async, [] {
    std::vector<VerifyRow> rows;
    for (double alpha : {0.4, 0.7}) {
      for (double gamma : {0.5, 1.0, 2.0}) {
        const OperatorOAlphaSpec spec{alpha, 1.0, 1.0};
        const auto f = [&](double tau) {
          const double w = 1.0 + tau;
          const double L = w <= 1.0 ? 0.0 : std::log(w);
          return mittag_leffler(alpha, 1.0, -gamma * std::pow(L, alpha)).value;
        };
        for (double z : {0.5, 1.0, 2.0}) {
          const double lhs = operator_O_alpha_quadrature(spec, f, z);
          const auto point = describe({{"alpha", alpha}, {"gamma", gamma}, {"a", 1.0}, {"b", 1.0}, {"z", z}});
          rows.push_back(make_row("mittag_leffler_eigen", point, std::abs(lhs + gamma * f(z)), 1e-3));
        }
      }
    }
    return rows;
  }));

  std::vector<VerifyRow> out;
  for (auto& j : jobs) {
    auto rows = j.get();
    out.insert(out.end(), rows.begin(), rows.end());
  }
  return out;
}

}  // namespace fcp
