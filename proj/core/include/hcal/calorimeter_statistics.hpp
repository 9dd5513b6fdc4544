#pragma once

// Microstate counting for a calorimeter of N resonant oscillators and the
// Gaussian-weighted sums over calorimeter energies that enter the
// imperfect-measurement rates. Everything is carried in log space.

#include <cstdint>
#include <limits>
#include <map>
#include <shared_mutex>
#include <vector>

#include "hcal/model.hpp"

namespace hcal {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Which calorimeter trace tr_C{X P_n} is being taken.
///   count           -> C(n+N-1, N-1)
///   occupation      -> n C(n+N-1, N-1)
///   antinormal      -> (n+N) C(n+N-1, N-1)
///   energy_weighted -> n C(n+N-1, N-1)   (times omega by the caller)
enum class TraceKind { count, occupation, antinormal, energy_weighted };

/// ln C(n+N-1, N-1). Throws DomainError for n < 0 or N < 1.
double log_multiplicity(std::int64_t n, int n_osc);

/// ln of the trace selected by `kind`; -inf for occupation/energy_weighted
/// at n == 0.
double log_trace(TraceKind kind, std::int64_t n, int n_osc);

/// ln sum_m trace_kind(m, N) exp(-(e - m)^2 omega^2 / k) over calorimeter
/// indices m >= 0 with |e - m| <= N_C. For k == 0 only m == e contributes.
/// The Gaussian's normalization is deliberately omitted.
double log_weighted_sum(TraceKind kind, std::int64_t e_index, const ModelConfig& cfg);

/// Inclusive calorimeter-index range [lo, hi] admitted at measured index e.
/// Throws DomainError when the range is empty.
struct SupportRange {
  std::int64_t lo;
  std::int64_t hi;
};
SupportRange calorimeter_support(std::int64_t e_index, const ModelConfig& cfg);

/// Ratios of weighted sums to the count sum at one measured index, all
/// formed in a single pass with a common log shift:
///   occupation = exp(lws(occupation) - lws(count)), and so on.
struct WeightedRatios {
  double occupation;
  double antinormal;
  double energy_weighted;
};
WeightedRatios weighted_ratios(std::int64_t e_index, const ModelConfig& cfg);

/// Exact microstate sums by brute-force enumeration of occupation tuples.
/// occupation_sum and antinormal_sum use the collective-mode convention
/// (single designated mode times N). Limited to n <= 12, N <= 5.
struct FockSums {
  std::uint64_t count = 0;
  std::uint64_t occupation_sum = 0;
  std::uint64_t antinormal_sum = 0;
  bool operator==(const FockSums&) const = default;
};
FockSums fock_enumeration_oracle(int n, int n_osc);

/// Growable per-N memo of ln C(n+N-1, N-1), safe for concurrent readers.
class LogMultiplicityCache {
 public:
  double get(std::int64_t n, int n_osc);
  /// Makes entries 0..n_max for `n_osc` resident ahead of a parallel section.
  void reserve(std::int64_t n_max, int n_osc);
  std::size_t resident_entries(int n_osc) const;

 private:
  mutable std::shared_mutex mutex_;
  std::map<int, std::vector<double>> tables_;
};

LogMultiplicityCache& shared_log_multiplicity_cache();

/// Numerically stable ln(sum exp(x_i)); -inf terms are ignored, an empty or
/// all -inf input yields -inf.
double log_sum_exp(const std::vector<double>& terms);

}  // namespace hcal
