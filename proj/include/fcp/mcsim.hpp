#pragma once

// Monte Carlo simulation of N(t) = sum_{n=1}^{M} 1{X_n <= t}. With
// probability rho all X_n share one draw from F, otherwise they are iid F.
// Path i draws from its own xoshiro256** stream seeded by (seed, i), so the
// output is a function of (seed, n_paths) alone, independent of threading.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <sstream>
#include <thread>
#include <utility>
#include <vector>

#include "fcp/error.hpp"
#include "fcp/fnegbin.hpp"
#include "fcp/pmf_table.hpp"
#include "fcp/stfpoisson.hpp"

namespace fcp {

/// xoshiro256** with splitmix64 seeding.
class Xoshiro256 {
 public:
  explicit Xoshiro256(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64(sm);
  }

  /// Independent stream for path `index` under `seed`.
  static Xoshiro256 for_path(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t sm = seed;
    const std::uint64_t a = splitmix64(sm);
    sm = index ^ 0x6a09e667f3bcc909ULL;
    const std::uint64_t b = splitmix64(sm);
    return Xoshiro256(a ^ (b * 0x9e3779b97f4a7c15ULL) ^ index);
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  static std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  std::uint64_t s_[4];
};

/// Inverse-CDF sampler over a truncated count table.
class CountSampler {
 public:
  static constexpr double kDefaultCutoff = 1e-10;
  static constexpr std::size_t kMaxK = 1'000'000;

  /// Requires tail_mass <= cutoff unless allow_truncation, in which case
  /// sampling is conditional on k <= K and the dropped mass is reported.
  static CountSampler from_table(const PmfTable& table, double cutoff = kDefaultCutoff, bool allow_truncation = false) {
    if (!allow_truncation && !(table.tail_mass <= cutoff)) {
      std::ostringstream os;
      os << "CountSampler: tail mass " << table.tail_mass << " above cutoff " << cutoff << " at K=" << table.K();
      throw TailCutoffUnreachable(os.str());
    }
    CountSampler s;
    s.cdf_.resize(table.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < table.size(); ++k) {
      acc += std::max(table[k], 0.0);
      s.cdf_[k] = acc;
    }
    if (!(acc > 0.0)) throw TailCutoffUnreachable("CountSampler: table has no mass");
    for (double& c : s.cdf_) c /= acc;
    s.truncated_mass_ = std::max(table.tail_mass, 0.0);
    return s;
  }

  /// Grows K by doubling from K0 until make_table(K) reaches the cutoff.
  /// Numeric failures of the table (cancellation in heavy-tailed regimes)
  /// surface as TailCutoffUnreachable.
  static CountSampler build(const std::function<PmfTable(std::size_t)>& make_table, std::size_t K0 = 32,
                            double cutoff = kDefaultCutoff, std::size_t K_max = kMaxK) {
    for (std::size_t K = std::max<std::size_t>(K0, 1);; K = std::min(2 * K, K_max)) {
      PmfTable table;
      try {
        table = make_table(K);
      } catch (const NumericError& e) {
        throw TailCutoffUnreachable(std::string("CountSampler: count table failed before reaching the cutoff: ") +
                                    e.what());
      }
      if (table.tail_mass <= cutoff) return from_table(table, cutoff);
      if (K >= K_max) {
        std::ostringstream os;
        os << "CountSampler: tail mass " << table.tail_mass << " still above " << cutoff << " at K=" << K;
        throw TailCutoffUnreachable(os.str());
      }
    }
  }

  std::size_t sample(double u) const {
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return it == cdf_.end() ? cdf_.size() - 1 : static_cast<std::size_t>(it - cdf_.begin());
  }

  std::size_t K() const { return cdf_.size() - 1; }
  double truncated_mass() const { return truncated_mass_; }

 private:
  std::vector<double> cdf_;
  double truncated_mass_ = 0.0;
};

struct SimConfig {
  std::uint64_t seed = 42;
  std::size_t n_paths = 1000;
  CountSampler count_sampler;
  /// t = F^{-1}(v) on [0, T].
  std::function<double(double)> F_inverse;
  double rho = 0.0;
  double T = 1.0;

  void validate() const {
    detail::require(n_paths > 0, "SimConfig: n_paths must be > 0");
    detail::require(static_cast<bool>(F_inverse), "SimConfig: F_inverse missing");
    detail::require(rho >= 0.0 && rho <= 1.0, "SimConfig: rho must lie in [0,1]");
    detail::require(T > 0.0, "SimConfig: T must be > 0");
  }
};

struct PathSample {
  std::size_t m = 0;
  std::vector<double> event_times;  // sorted, size m
  bool common_flag = false;
};

/// Draws one path from the stream rng.
inline PathSample sample_path(const SimConfig& cfg, Xoshiro256& rng) {
  PathSample p;
  p.m = cfg.count_sampler.sample(rng.uniform());
  p.common_flag = rng.uniform() < cfg.rho;
  p.event_times.resize(p.m);
  if (p.common_flag) {
    const double x = cfg.F_inverse(rng.uniform());
    std::fill(p.event_times.begin(), p.event_times.end(), x);
  } else {
    for (double& x : p.event_times) x = cfg.F_inverse(rng.uniform());
    std::sort(p.event_times.begin(), p.event_times.end());
  }
  return p;
}

/// Paths in flat storage: events of path i are times[offsets[i] .. offsets[i+1]).
struct PathSet {
  std::vector<std::size_t> offsets{0};
  std::vector<double> times;
  std::vector<std::uint8_t> common;
  double T = 1.0;

  std::size_t size() const { return common.size(); }
  std::size_t m(std::size_t i) const { return offsets[i + 1] - offsets[i]; }

  /// N_i(t) = number of events of path i in [0, t].
  std::size_t count(std::size_t i, double t) const {
    const auto b = times.begin() + static_cast<std::ptrdiff_t>(offsets[i]);
    const auto e = times.begin() + static_cast<std::ptrdiff_t>(offsets[i + 1]);
    return static_cast<std::size_t>(std::upper_bound(b, e, t) - b);
  }

  PathSample path(std::size_t i) const {
    PathSample p;
    p.m = m(i);
    p.event_times.assign(times.begin() + static_cast<std::ptrdiff_t>(offsets[i]),
                         times.begin() + static_cast<std::ptrdiff_t>(offsets[i + 1]));
    p.common_flag = common[i] != 0;
    return p;
  }

  void append(const PathSample& p) {
    times.insert(times.end(), p.event_times.begin(), p.event_times.end());
    offsets.push_back(times.size());
    common.push_back(p.common_flag ? 1 : 0);
  }
};

/// Simulates cfg.n_paths paths on up to `threads` threads (0 = hardware).
inline PathSet simulate(const SimConfig& cfg, unsigned threads = 0) {
  cfg.validate();
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, cfg.n_paths));
  const std::size_t n = cfg.n_paths;
  std::vector<PathSet> parts(threads);
  auto work = [&](unsigned w) {
    const std::size_t lo = n * w / threads, hi = n * (w + 1) / threads;
    for (std::size_t i = lo; i < hi; ++i) {
      auto rng = Xoshiro256::for_path(cfg.seed, i);
      parts[w].append(sample_path(cfg, rng));
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }
  PathSet out;
  out.T = cfg.T;
  std::size_t total = 0;
  for (const auto& p : parts) total += p.times.size();
  out.times.reserve(total);
  out.offsets.reserve(n + 1);
  out.common.reserve(n);
  for (const auto& p : parts) {
    const std::size_t base = out.times.size();
    out.times.insert(out.times.end(), p.times.begin(), p.times.end());
    for (std::size_t i = 1; i < p.offsets.size(); ++i) out.offsets.push_back(base + p.offsets[i]);
    out.common.insert(out.common.end(), p.common.begin(), p.common.end());
  }
  return out;
}

/// Histogram of N(t) with per-bin Wilson intervals.
struct EmpiricalPmf {
  std::vector<std::uint64_t> counts;
  std::uint64_t n = 0;
  PmfTable table;

  /// Wilson score interval for bin k at normal quantile z.
  std::pair<double, double> wilson(std::size_t k, double z = 1.96) const {
    const double nn = static_cast<double>(n);
    const double p = k < counts.size() ? static_cast<double>(counts[k]) / nn : 0.0;
    const double z2 = z * z;
    const double centre = (p + z2 / (2.0 * nn)) / (1.0 + z2 / nn);
    const double half = z / (1.0 + z2 / nn) * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
    return {centre - half, centre + half};
  }

  /// Wilson half-width at z = 1, the per-bin standard error.
  double standard_error(std::size_t k) const {
    const auto [lo, hi] = wilson(k, 1.0);
    return 0.5 * (hi - lo);
  }
};

inline EmpiricalPmf empirical_pmf(const PathSet& paths, double t) {
  detail::require(paths.size() > 0, "empirical_pmf: no paths");
  EmpiricalPmf e;
  e.n = paths.size();
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const std::size_t c = paths.count(i, t);
    if (c >= e.counts.size()) e.counts.resize(c + 1, 0);
    ++e.counts[c];
  }
  std::vector<double> probs(e.counts.size());
  for (std::size_t k = 0; k < probs.size(); ++k) probs[k] = static_cast<double>(e.counts[k]) / static_cast<double>(e.n);
  e.table = PmfTable::from_probs(std::move(probs));
  return e;
}

struct Estimate {
  double value = 0.0;
  double standard_error = 0.0;
};

namespace detail {

struct IntMoments {
  std::int64_t n = 0;
  __int128 sa = 0, sb = 0, sab = 0;
  IntMoments& operator+=(const IntMoments& o) {
    n += o.n;
    sa += o.sa;
    sb += o.sb;
    sab += o.sab;
    return *this;
  }
  IntMoments operator-(const IntMoments& o) const {
    IntMoments r = *this;
    r.n -= o.n;
    r.sa -= o.sa;
    r.sb -= o.sb;
    r.sab -= o.sab;
    return r;
  }
  /// Unbiased sample covariance, from exact integer sums.
  long double cov() const {
    const long double nn = static_cast<long double>(n);
    const __int128 centred = static_cast<__int128>(n) * sab - sa * sb;
    return static_cast<long double>(centred) / (nn * (nn - 1.0L));
  }
};

}  // namespace detail

/// Sample covariance of (N(s), N(t)) with a 100-block jackknife standard error.
inline Estimate empirical_cov(const PathSet& paths, double s, double t, std::size_t blocks = 100) {
  const std::size_t n = paths.size();
  detail::require(n >= 2 * blocks && blocks >= 2, "empirical_cov: too few paths for the jackknife");
  std::vector<detail::IntMoments> per_block(blocks);
  for (std::size_t i = 0; i < n; ++i) {
    auto& b = per_block[i * blocks / n];
    const auto a = static_cast<std::int64_t>(paths.count(i, s));
    const auto c = static_cast<std::int64_t>(paths.count(i, t));
    b.n += 1;
    b.sa += a;
    b.sb += c;
    b.sab += static_cast<__int128>(a) * c;
  }
  detail::IntMoments all;
  for (const auto& b : per_block) all += b;
  std::vector<long double> loo(blocks);
  long double mean = 0.0L;
  for (std::size_t j = 0; j < blocks; ++j) {
    loo[j] = (all - per_block[j]).cov();
    mean += loo[j];
  }
  mean /= static_cast<long double>(blocks);
  long double ss = 0.0L;
  for (long double v : loo) ss += (v - mean) * (v - mean);
  const long double bd = static_cast<long double>(blocks);
  return {static_cast<double>(all.cov()), static_cast<double>(std::sqrt((bd - 1.0L) / bd * ss))};
}

/// Fraction of paths with N(t) = 1 and N(T) = 1, with binomial standard error.
inline Estimate empirical_joint_11(const PathSet& paths, double t) {
  const std::size_t n = paths.size();
  detail::require(n > 0, "empirical_joint_11: no paths");
  std::uint64_t hits = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (paths.m(i) == 1 && paths.count(i, t) == 1) ++hits;
  const double p = static_cast<double>(hits) / static_cast<double>(n);
  return {p, std::sqrt(std::max(p * (1.0 - p), 1.0 / static_cast<double>(n)) / static_cast<double>(n))};
}

/// Simulation setup for the space-time fractional Poisson process.
/// The count law is the pmf at t = T, which does not depend on rho.
inline SimConfig stfp_sim_config(const StfpParams& params, std::uint64_t seed, std::size_t n_paths,
                                 double cutoff = CountSampler::kDefaultCutoff, std::size_t K_max = CountSampler::kMaxK) {
  params.validate();
  SimConfig cfg;
  cfg.seed = seed;
  cfg.n_paths = n_paths;
  cfg.rho = params.rho;
  cfg.T = params.T;
  cfg.count_sampler =
      CountSampler::build([&](std::size_t K) { return pmf(params, params.T, K); }, 32, cutoff, K_max);
  const double T = params.T, expo = params.alpha / params.nu;
  cfg.F_inverse = [T, expo](double v) { return T * std::pow(v, expo); };
  return cfg;
}

/// Simulation setup for the fractional negative binomial process. For r >= 2
/// the count law is the r-fold convolution of the r = 1 law.
inline SimConfig negbin_sim_config(const NegBinParams& params, std::uint64_t seed, std::size_t n_paths,
                                   double cutoff = CountSampler::kDefaultCutoff, std::size_t K_max = CountSampler::kMaxK) {
  params.validate();
  SimConfig cfg;
  cfg.seed = seed;
  cfg.n_paths = n_paths;
  cfg.rho = params.rho;
  cfg.T = params.T;
  NegBinParams single = params;
  single.r = 1;
  const int r = params.r;
  cfg.count_sampler = CountSampler::build(
      [&](std::size_t K) {
        const auto base = pmf_negbin_r1(single, params.T, K);
        std::vector<double> acc(base.probs);
        for (int j = 1; j < r; ++j) {
          std::vector<double> next(K + 1, 0.0);
          for (std::size_t a = 0; a <= K; ++a)
            for (std::size_t b = 0; a + b <= K; ++b) next[a + b] += acc[a] * base[b];
          acc = std::move(next);
        }
        return PmfTable::from_probs(std::move(acc));
      },
      32, cutoff, std::min<std::size_t>(K_max, kStirlingDefaultCap));
  const double p = params.p;
  const QProfile profile = params.q_profile;
  cfg.F_inverse = [p, profile](double v) { return profile.inverse(1.0 / (1.0 + (1.0 / p - 1.0) * v)); };
  return cfg;
}

}  // namespace fcp
