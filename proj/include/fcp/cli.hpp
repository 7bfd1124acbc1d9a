#pragma once

// Command-line front end. Every subcommand writes CSV: '#' header lines
// echo the resolved parameters as key=value (shortest round-trip form),
// other '#' lines carry diagnostics, and the body uses 17 significant
// digits. An output file is itself a valid --config file, so re-running
// with it reproduces the output byte for byte. Flags override the file.

#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "fcp/error.hpp"
#include "fcp/fnegbin.hpp"
#include "fcp/mcsim.hpp"
#include "fcp/stfpoisson.hpp"
#include "fcp/verify.hpp"
#include "fcp/weighted.hpp"

namespace fcp::cli {

enum ExitCode : int { kOk = 0, kVerifyFailed = 1, kUsage = 2, kNumeric = 3 };

/// A tail beyond kmax at or above this is flagged on the last pmf row.
inline constexpr double kTailFlagThreshold = 1e-6;

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Shortest representation that parses back to v.
inline std::string short_num(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// Reads key=value pairs from a config file. A leading '#' is ignored, so
/// CSV headers qualify; lines that are not a single key=value are skipped.
inline std::vector<std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CLI::ValidationError("--config", "cannot open " + path);
  static const std::regex kv(R"(^\s*#?\s*([A-Za-z_]+)\s*=\s*(\S+)\s*$)");
  std::vector<std::string> args;
  std::string line;
  std::smatch m;
  while (std::getline(in, line)) {
    if (std::regex_match(line, m, kv)) {
      args.push_back("--" + m[1].str());
      args.push_back(m[2].str());
    }
  }
  return args;
}

namespace detail {

struct Values {
  double alpha = 1.0, nu = 1.0, lambda = 1.0, T = 1.0, t = 0.5, rho = 0.0, p = 0.5;
  int r = 1;
  std::size_t kmax = 20;
  std::size_t paths = 100000;
  std::uint64_t seed = 42;
  std::string out;
  std::string config;
};

/// Header writer: parameters first, then free-form diagnostics.
class Csv {
 public:
  explicit Csv(std::string command) { os_ << "# fcp " << command << '\n'; }
  void param(const char* key, double v) { os_ << "# " << key << '=' << short_num(v) << '\n'; }
  void param(const char* key, std::uint64_t v) { os_ << "# " << key << '=' << v << '\n'; }
  void note(const std::string& text) { os_ << "# " << text << '\n'; }
  void header(const std::string& cols) { os_ << cols << '\n'; }
  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) os_ << (i ? "," : "") << fields[i];
    os_ << '\n';
  }
  std::string str() const { return os_.str(); }

 private:
  std::ostringstream os_;
};

inline StfpParams stfp_params(const Values& v) {
  StfpParams p{v.alpha, v.nu, v.lambda, v.T, v.rho};
  p.validate();
  p.check_time(v.t);
  return p;
}

inline NegBinParams negbin_params(const Values& v) {
  NegBinParams p;
  p.p = v.p;
  p.r = v.r;
  p.alpha = v.alpha;
  p.nu = v.nu;
  p.rho = v.rho;
  p.T = v.T;
  fcp::detail::require(v.p > 0.0 && v.p < 1.0, "p must lie in (0,1)");
  fcp::detail::require(v.T > 0.0, "T must be > 0");
  p.q_profile = QProfile::mixture_for(v.p, v.T);
  p.validate();
  p.check_time(v.t);
  return p;
}

inline void pmf_rows(Csv& csv, const PmfTable& table) {
  csv.note("tail mass beyond kmax: " + num(table.tail_mass));
  csv.header("k,probability,tail_mass_flag");
  const auto probs = table.clamped();
  for (std::size_t k = 0; k < probs.size(); ++k) {
    const bool flag = k + 1 == probs.size() && table.tail_mass >= kTailFlagThreshold;
    csv.row({std::to_string(k), num(probs[k]), flag ? "1" : "0"});
  }
}

inline std::string cmd_pmf(const Values& v) {
  const auto params = stfp_params(v);
  Csv csv("pmf");
  csv.param("alpha", v.alpha);
  csv.param("nu", v.nu);
  csv.param("lambda", v.lambda);
  csv.param("T", v.T);
  csv.param("t", v.t);
  csv.param("rho", v.rho);
  csv.param("kmax", static_cast<std::uint64_t>(v.kmax));
  pmf_rows(csv, pmf(params, v.t, v.kmax));
  return csv.str();
}

inline std::vector<double> u_grid(double lo, double hi, int n) {
  std::vector<double> u;
  for (int i = 0; i <= n; ++i) u.push_back(lo + (hi - lo) * i / n);
  return u;
}

inline std::string cmd_pgf(const Values& v) {
  const auto params = stfp_params(v);
  Csv csv("pgf");
  csv.param("alpha", v.alpha);
  csv.param("nu", v.nu);
  csv.param("lambda", v.lambda);
  csv.param("T", v.T);
  csv.param("t", v.t);
  csv.param("rho", v.rho);
  csv.header("u,pgf");
  for (double u : u_grid(-1.0, 1.0, 20)) csv.row({num(u), num(pgf(params, v.t, u))});
  return csv.str();
}

inline std::string cmd_figure1(const Values& v) {
  fcp::detail::require(v.t > 0.0 && v.t < v.T, "figure1: need 0 < t < T");
  Csv csv("figure1");
  csv.param("lambda", v.lambda);
  csv.param("T", v.T);
  csv.param("t", v.t);
  csv.header("nu,p_kps,p_brb");
  for (const auto& r : figure1_data(v.t, v.T, v.lambda)) csv.row({num(r.nu), num(r.p_kps), num(r.p_brb)});
  return csv.str();
}

inline std::string cmd_negbin(const Values& v) {
  const auto params = negbin_params(v);
  Csv csv("negbin");
  csv.param("alpha", v.alpha);
  csv.param("nu", v.nu);
  csv.param("p", v.p);
  csv.param("r", static_cast<std::uint64_t>(v.r));
  csv.param("T", v.T);
  csv.param("t", v.t);
  csv.param("rho", v.rho);
  csv.param("kmax", static_cast<std::uint64_t>(v.kmax));
  csv.note("q profile: (1 - lambda_mix)/(1 - (1 - t/T) lambda_mix) with lambda_mix = 1 - p");
  if (v.r == 1) {
    pmf_rows(csv, pmf_negbin_r1(params, v.t, v.kmax));
  } else {
    csv.note("no closed-form pmf for r >= 2; pgf table");
    csv.header("u,pgf");
    for (double u : u_grid(-1.0, 1.0, 20)) csv.row({num(u), num(pgf_negbin(params, v.t, u))});
  }
  return csv.str();
}

inline std::string cmd_weighted(const Values& v) {
  fcp::detail::require(v.t >= 0.0 && v.t <= 1.0, "weighted: t must lie in [0,1]");
  Csv csv("weighted");
  csv.param("lambda", v.lambda);
  csv.param("t", v.t);
  csv.param("rho", v.rho);
  csv.param("kmax", static_cast<std::uint64_t>(v.kmax));
  csv.note("size-biased Poisson(lambda) total, w(k) = k, F(t) = t on [0,1]");
  const auto closed = size_biased_poisson_pmf(v.lambda, v.rho, v.t, v.kmax);
  // Poisson base on a support wide enough for a 1e-16 tail.
  std::size_t n_base = v.kmax;
  while (n_base < 20 + static_cast<std::size_t>(v.lambda + 12.0 * std::sqrt(v.lambda) + 30.0)) n_base += 10;
  std::vector<double> base_probs(n_base + 1);
  for (std::size_t n = 0; n <= n_base; ++n)
    base_probs[n] = std::exp(static_cast<double>(n) * std::log(v.lambda) - v.lambda - std::lgamma(n + 1.0));
  const auto base = PmfTable::from_probs(std::move(base_probs));
  const auto wf = WeightFn::size_biased();
  const auto generic = weighted_process_pmf(base, wf, v.t, v.rho, v.kmax);
  std::vector<double> wt;
  if (v.t > 0.0) wt = weights_in_time(base, wf, v.t, v.rho, v.kmax);
  const double s = 0.5 * v.t;
  csv.note("covariance of N(t) and N(t/2): " + num(covariance_corrected(v.lambda, v.rho, s, v.t)));
  csv.note("covariance of N(t)-N(t/2) and N(t/2): " + num(covariance_increment(v.lambda, v.rho, s, v.t)));
  csv.note("variance of N(t/2): " + num(variance_uniform_poisson(v.lambda, v.rho, s)));
  csv.header("k,closed_form,generic,weight_in_time");
  for (std::size_t k = 0; k <= v.kmax; ++k)
    csv.row({std::to_string(k), num(closed[k]), num(generic[k]), wt.empty() ? "" : num(wt[k])});
  return csv.str();
}

inline std::string cmd_simulate(const Values& v) {
  const auto params = stfp_params(v);
  fcp::detail::require(v.paths >= 200, "simulate: paths must be >= 200");
  const auto cfg = stfp_sim_config(params, v.seed, v.paths);
  const auto paths = simulate(cfg);
  const auto emp = empirical_pmf(paths, v.t);
  const auto ana = pmf(params, v.t, v.kmax);
  Csv csv("simulate");
  csv.param("alpha", v.alpha);
  csv.param("nu", v.nu);
  csv.param("lambda", v.lambda);
  csv.param("T", v.T);
  csv.param("t", v.t);
  csv.param("rho", v.rho);
  csv.param("kmax", static_cast<std::uint64_t>(v.kmax));
  csv.param("paths", static_cast<std::uint64_t>(v.paths));
  csv.param("seed", v.seed);
  double tv = 0.0;
  const std::size_t kk = std::max(v.kmax, emp.counts.size());
  for (std::size_t k = 0; k <= kk; ++k) tv += std::abs(emp.table[k] - ana[k]);
  csv.note("total variation over k <= kmax and observed counts: " + num(0.5 * tv));
  if (v.t > 0.0 && v.t < v.T) {
    const auto joint = empirical_joint_11(paths, v.t);
    csv.note("joint P(N(t) = 1, N(T) = 1): empirical " + num(joint.value) + " se " + num(joint.standard_error) +
             " analytic " + num(joint_prob_brb(params, v.t)));
  }
  csv.header("k,empirical,standard_error,analytic");
  for (std::size_t k = 0; k <= v.kmax; ++k)
    csv.row({std::to_string(k), num(emp.table[k]), num(emp.standard_error(k)), num(std::max(ana[k], 0.0))});
  return csv.str();
}

inline std::string cmd_verify(bool& all_pass) {
  const auto rows = run_verification();
  Csv csv("verify");
  all_pass = std::all_of(rows.begin(), rows.end(), [](const VerifyRow& r) { return r.pass; });
  csv.note(std::to_string(rows.size()) + " checks, " +
           std::to_string(std::count_if(rows.begin(), rows.end(), [](const VerifyRow& r) { return !r.pass; })) +
           " failed");
  csv.header("equation,point,residual,tolerance,pass");
  for (const auto& r : rows) csv.row({r.equation, r.point, num(r.residual), num(r.tolerance), r.pass ? "1" : "0"});
  return csv.str();
}

}  // namespace detail

/// Runs the CLI on args (without the program name). Returns the exit code.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  detail::Values v;
  CLI::App app{"Correlated fractional counting processes: pmf/pgf tables, verification and simulation", "fcp"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);

  auto add = [&](CLI::App* sub, std::initializer_list<const char*> keys) {
    for (const char* key : keys) {
      const std::string k = key;
      const std::string flag = "--" + k;
      if (k == "alpha") sub->add_option(flag, v.alpha, "space order in (0,1]");
      else if (k == "nu") sub->add_option(flag, v.nu, "time order in (0,1]");
      else if (k == "lambda") sub->add_option(flag, v.lambda, "rate > 0");
      else if (k == "T") sub->add_option(flag, v.T, "horizon > 0");
      else if (k == "t") sub->add_option(flag, v.t, "time in [0,T]");
      else if (k == "rho") sub->add_option(flag, v.rho, "correlation in [0,1]");
      else if (k == "p") sub->add_option(flag, v.p, "q(T) in (0,1)");
      else if (k == "r") sub->add_option(flag, v.r, "negative binomial order >= 1");
      else if (k == "kmax") sub->add_option(flag, v.kmax, "largest k in the table");
      else if (k == "paths") sub->add_option(flag, v.paths, "Monte Carlo paths");
      else if (k == "seed") sub->add_option(flag, v.seed, "RNG seed");
    }
    sub->add_option("--out", v.out, "output file (default stdout)");
    sub->add_option("--config", v.config, "key=value file; flags take precedence");
  };
  auto* pmf_cmd = app.add_subcommand("pmf", "fractional Poisson pmf table");
  add(pmf_cmd, {"alpha", "nu", "lambda", "T", "t", "rho", "kmax"});
  auto* pgf_cmd = app.add_subcommand("pgf", "fractional Poisson pgf on u in [-1,1]");
  add(pgf_cmd, {"alpha", "nu", "lambda", "T", "t", "rho"});
  auto* fig_cmd = app.add_subcommand("figure1", "joint probabilities P(N(t)=1,N(T)=1) over nu");
  add(fig_cmd, {"lambda", "T", "t"});
  auto* verify_cmd = app.add_subcommand("verify", "governing-equation residual suite");
  add(verify_cmd, {});
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo vs analytic pmf");
  add(sim_cmd, {"alpha", "nu", "lambda", "T", "t", "rho", "kmax", "paths", "seed"});
  auto* nb_cmd = app.add_subcommand("negbin", "fractional negative binomial pmf (r = 1) or pgf (r >= 2)");
  add(nb_cmd, {"alpha", "nu", "p", "r", "T", "t", "rho", "kmax"});
  auto* w_cmd = app.add_subcommand("weighted", "size-biased Poisson process table and covariances");
  add(w_cmd, {"lambda", "t", "rho", "kmax"});

  try {
    // Config values go right after the subcommand so later flags win.
    for (std::size_t i = 1; i < args.size(); ++i) {
      std::string path;
      if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
      else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
      if (!path.empty()) {
        auto extra = read_config(path);
        args.insert(args.begin() + 1, extra.begin(), extra.end());
        break;
      }
    }
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  int code = kOk;
  std::string text;
  try {
    if (*pmf_cmd) text = detail::cmd_pmf(v);
    else if (*pgf_cmd) text = detail::cmd_pgf(v);
    else if (*fig_cmd) text = detail::cmd_figure1(v);
    else if (*nb_cmd) text = detail::cmd_negbin(v);
    else if (*w_cmd) text = detail::cmd_weighted(v);
    else if (*sim_cmd) text = detail::cmd_simulate(v);
    else if (*verify_cmd) {
      bool pass = false;
      text = detail::cmd_verify(pass);
      if (!pass) code = kVerifyFailed;
    }
  } catch (const DomainError& e) {
    err << "fcp: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericError& e) {
    err << "fcp: numeric failure: " << e.what() << '\n';
    return kNumeric;
  }

  if (v.out.empty()) {
    out << text;
  } else {
    std::ofstream f(v.out, std::ios::binary);
    if (!f) {
      err << "fcp: cannot write " << v.out << '\n';
      return kUsage;
    }
    f << text;
  }
  return code;
}

}  // namespace fcp::cli
