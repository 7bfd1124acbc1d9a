#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "fcp/error.hpp"

namespace fcp {

/// Truncated probability mass function on k = 0..K. tail_mass is the
/// probability beyond K, 1 - sum(probs); it is reported and never folded
/// back into the table.
struct PmfTable {
  std::vector<double> probs;
  double tail_mass = 0.0;
  /// Largest series cancellation ratio met while computing the entries.
  double max_cancellation_ratio = 0.0;

  /// Roundoff tolerance for slightly negative computed probabilities.
  static constexpr double kNegativeTolerance = 1e-12;

  static PmfTable from_probs(std::vector<double> p) {
    if (p.empty()) throw DomainError("PmfTable: empty table");
    PmfTable t;
    t.probs = std::move(p);
    t.tail_mass = 1.0 - t.total();
    return t;
  }

  std::size_t K() const { return probs.empty() ? 0 : probs.size() - 1; }
  std::size_t size() const { return probs.size(); }

  /// P(k); zero for k beyond the table.
  double operator[](std::size_t k) const { return k < probs.size() ? probs[k] : 0.0; }

  /// Compensated sum of the stored entries.
  double total() const {
    double s = 0.0, c = 0.0;
    for (double v : probs) {
      const double y = s + v;
      c += (std::abs(s) >= std::abs(v)) ? (s - y) + v : (v - y) + s;
      s = y;
    }
    return s + c;
  }

  /// Entries with roundoff negatives replaced by zero; for presentation only.
  std::vector<double> clamped() const {
    std::vector<double> out(probs);
    for (double& v : out) v = std::max(v, 0.0);
    return out;
  }

  bool entries_in_range() const {
    return std::all_of(probs.begin(), probs.end(),
                       [](double v) { return v >= -kNegativeTolerance && v <= 1.0 + kNegativeTolerance; });
  }
};

}  // namespace fcp
