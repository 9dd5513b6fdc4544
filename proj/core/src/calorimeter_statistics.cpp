#include "hcal/calorimeter_statistics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <mutex>
#include <string>

namespace hcal {
namespace {

// Beyond this n the memo is bypassed rather than grown.
constexpr std::int64_t kMaxCachedIndex = std::int64_t{1} << 22;

void check_trace_args(std::int64_t n, int n_osc) {
  if (n < 0) throw DomainError("calorimeter occupation must be non-negative, got " + std::to_string(n));
  if (n_osc < 1) throw DomainError("oscillator count must be at least 1, got " + std::to_string(n_osc));
}

// Extended precision keeps the cancellation between the three log-gamma
// values below 1e-11 for n + N up to 1e6.
double direct_log_multiplicity(std::int64_t n, int n_osc) {
  if (n == 0 || n_osc == 1) return 0.0;
  const long double a = static_cast<long double>(n);
  const long double b = static_cast<long double>(n_osc);
  return static_cast<double>(std::lgamma(a + b) - std::lgamma(a + 1.0L) - std::lgamma(b));
}

double gaussian_log_weight(std::int64_t e_index, std::int64_t m, const ModelConfig& cfg) {
  const double d = static_cast<double>(e_index - m) * cfg.omega;
  return -(d * d) / cfg.k_noise;
}

bool single_term(const ModelConfig& cfg) { return cfg.k_noise == 0.0 || cfg.n_cutoff == 0; }

}  // namespace

double LogMultiplicityCache::get(std::int64_t n, int n_osc) {
  check_trace_args(n, n_osc);
  if (n > kMaxCachedIndex) return direct_log_multiplicity(n, n_osc);
  {
    std::shared_lock lock(mutex_);
    auto it = tables_.find(n_osc);
    if (it != tables_.end() && static_cast<std::size_t>(n) < it->second.size()) {
      return it->second[static_cast<std::size_t>(n)];
    }
  }
  reserve(n, n_osc);
  std::shared_lock lock(mutex_);
  return tables_.at(n_osc)[static_cast<std::size_t>(n)];
}

void LogMultiplicityCache::reserve(std::int64_t n_max, int n_osc) {
  check_trace_args(n_max, n_osc);
  n_max = std::min(n_max, kMaxCachedIndex);
  std::unique_lock lock(mutex_);
  auto& table = tables_[n_osc];
  const auto wanted = static_cast<std::size_t>(n_max) + 1;
  if (table.size() >= wanted) return;
  // Grow geometrically so repeated small extensions stay amortized.
  const std::size_t target = std::max(wanted, std::min<std::size_t>(2 * table.size(), kMaxCachedIndex + 1));
  const std::size_t start = table.size();
  table.resize(target);
  for (std::size_t i = start; i < target; ++i) {
    table[i] = direct_log_multiplicity(static_cast<std::int64_t>(i), n_osc);
  }
}

std::size_t LogMultiplicityCache::resident_entries(int n_osc) const {
  std::shared_lock lock(mutex_);
  auto it = tables_.find(n_osc);
  return it == tables_.end() ? 0 : it->second.size();
}

LogMultiplicityCache& shared_log_multiplicity_cache() {
  static LogMultiplicityCache cache;
  return cache;
}

double log_multiplicity(std::int64_t n, int n_osc) {
  return shared_log_multiplicity_cache().get(n, n_osc);
}

double log_trace(TraceKind kind, std::int64_t n, int n_osc) {
  const double log_count = log_multiplicity(n, n_osc);
  switch (kind) {
    case TraceKind::count:
      return log_count;
    case TraceKind::occupation:
    case TraceKind::energy_weighted:
      return n == 0 ? kNegInf : std::log(static_cast<double>(n)) + log_count;
    case TraceKind::antinormal:
      return std::log(static_cast<double>(n) + static_cast<double>(n_osc)) + log_count;
  }
  return kNegInf;
}

double log_sum_exp(const std::vector<double>& terms) {
  double max_term = kNegInf;
  for (double t : terms) max_term = std::max(max_term, t);
  if (max_term == kNegInf) return kNegInf;
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - max_term);
  return max_term + std::log(sum);
}

SupportRange calorimeter_support(std::int64_t e_index, const ModelConfig& cfg) {
  cfg.validate();
  if (cfg.k_noise == 0.0) {
    if (e_index < 0) {
      throw DomainError("perfect measurement admits no calorimeter state at measured index " +
                        std::to_string(e_index));
    }
    return {e_index, e_index};
  }
  const std::int64_t lo = std::max<std::int64_t>(0, e_index - cfg.n_cutoff);
  const std::int64_t hi = e_index + cfg.n_cutoff;
  if (hi < lo) {
    throw DomainError("measured index " + std::to_string(e_index) + " lies below -N_C = " +
                      std::to_string(-cfg.n_cutoff));
  }
  return {lo, hi};
}

double log_weighted_sum(TraceKind kind, std::int64_t e_index, const ModelConfig& cfg) {
  const SupportRange range = calorimeter_support(e_index, cfg);
  if (cfg.k_noise == 0.0) return log_trace(kind, e_index, cfg.n_osc);

  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(range.hi - range.lo + 1));
  for (std::int64_t m = range.lo; m <= range.hi; ++m) {
    terms.push_back(log_trace(kind, m, cfg.n_osc) + gaussian_log_weight(e_index, m, cfg));
  }
  return log_sum_exp(terms);
}

WeightedRatios weighted_ratios(std::int64_t e_index, const ModelConfig& cfg) {
  const SupportRange range = calorimeter_support(e_index, cfg);
  if (single_term(cfg)) {
    const double n = static_cast<double>(e_index);
    return {n, n + static_cast<double>(cfg.n_osc), n};
  }

  auto& cache = shared_log_multiplicity_cache();
  cache.reserve(range.hi, cfg.n_osc);
  const auto count = static_cast<std::size_t>(range.hi - range.lo + 1);
  std::vector<double> log_terms(count);
  double shift = kNegInf;
  for (std::size_t i = 0; i < count; ++i) {
    const std::int64_t m = range.lo + static_cast<std::int64_t>(i);
    log_terms[i] = cache.get(m, cfg.n_osc) + gaussian_log_weight(e_index, m, cfg);
    shift = std::max(shift, log_terms[i]);
  }

  const double big_n = static_cast<double>(cfg.n_osc);
  double s_count = 0.0;
  double s_occupation = 0.0;
  double s_antinormal = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double m = static_cast<double>(range.lo + static_cast<std::int64_t>(i));
    const double w = std::exp(log_terms[i] - shift);
    s_count += w;
    s_occupation += m * w;
    s_antinormal += (m + big_n) * w;
  }
  const double occupation = s_occupation / s_count;
  return {occupation, s_antinormal / s_count, occupation};
}

FockSums fock_enumeration_oracle(int n, int n_osc) {
  check_trace_args(n, n_osc);
  if (n > 12 || n_osc > 5) {
    throw RefusalError("fock enumeration limited to n <= 12 and N <= 5 (got n=" + std::to_string(n) +
                       ", N=" + std::to_string(n_osc) + ")");
  }
  FockSums sums;
  std::uint64_t designated_sum = 0;
  std::uint64_t designated_plus_one_sum = 0;
  std::vector<int> tuple(static_cast<std::size_t>(n_osc), 0);

  // Enumerate every tuple (n_1..n_N) in [0, n]^N and keep those summing to n.
  std::function<void(std::size_t, int)> visit = [&](std::size_t mode, int used) {
    if (mode == tuple.size()) {
      if (used != n) return;
      ++sums.count;
      designated_sum += static_cast<std::uint64_t>(tuple[0]);
      designated_plus_one_sum += static_cast<std::uint64_t>(tuple[0]) + 1;
      return;
    }
    for (int q = 0; q <= n - used; ++q) {
      tuple[mode] = q;
      visit(mode + 1, used + q);
    }
  };
  visit(0, 0);

  const auto modes = static_cast<std::uint64_t>(n_osc);
  sums.occupation_sum = designated_sum * modes;
  sums.antinormal_sum = designated_plus_one_sum * modes;
  return sums;
}

}  // namespace hcal
