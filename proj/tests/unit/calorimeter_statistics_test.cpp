#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <thread>
#include <vector>

#include "hcal/calorimeter_statistics.hpp"

namespace hcal {
namespace {

using Big = boost::multiprecision::cpp_bin_float_50;

ModelConfig noisy(double k, int n_cutoff, int n_osc) {
  ModelConfig cfg;
  cfg.k_noise = k;
  cfg.n_cutoff = n_cutoff;
  cfg.n_osc = n_osc;
  return cfg;
}

// Plain double summation, no log space; fine for small hand-sized configs.
double direct_weighted_sum(TraceKind kind, std::int64_t e, const ModelConfig& cfg) {
  double total = 0.0;
  for (std::int64_t m = std::max<std::int64_t>(0, e - cfg.n_cutoff); m <= e + cfg.n_cutoff; ++m) {
    const double c = std::round(std::exp(std::lgamma(m + cfg.n_osc) - std::lgamma(m + 1.0) - std::lgamma(cfg.n_osc)));
    double t = c;
    if (kind == TraceKind::occupation || kind == TraceKind::energy_weighted) t = m * c;
    if (kind == TraceKind::antinormal) t = (m + cfg.n_osc) * c;
    const double d = static_cast<double>(e - m);
    total += t * (cfg.k_noise == 0.0 ? (d == 0.0 ? 1.0 : 0.0) : std::exp(-d * d / cfg.k_noise));
  }
  return total;
}

TEST(LogMultiplicity, Examples) {
  EXPECT_EQ(log_multiplicity(0, 1), 0.0);
  EXPECT_EQ(log_multiplicity(0, 37), 0.0);
  EXPECT_NEAR(log_multiplicity(1, 7), std::log(7.0), 1e-14);
  EXPECT_NEAR(log_multiplicity(2, 3), std::log(6.0), 1e-14);
}

TEST(LogMultiplicity, DomainErrors) {
  EXPECT_THROW(log_multiplicity(-1, 3), DomainError);
  EXPECT_THROW(log_multiplicity(2, 0), DomainError);
}

TEST(LogMultiplicity, MatchesHighPrecisionAtLargeArguments) {
  const std::vector<std::pair<std::int64_t, int>> cases{
      {1000, 10}, {99990, 10}, {500000, 1000}, {999000, 1000}, {123456, 77}, {5, 999995}};
  for (auto [n, N] : cases) {
    const Big ref = boost::multiprecision::lgamma(Big(n + N)) - boost::multiprecision::lgamma(Big(n + 1)) -
                    boost::multiprecision::lgamma(Big(N));
    EXPECT_NEAR(log_multiplicity(n, N), ref.convert_to<double>(), 1e-10) << "n=" << n << " N=" << N;
  }
}

TEST(LogTrace, Examples) {
  EXPECT_EQ(log_trace(TraceKind::occupation, 0, 5), kNegInf);
  EXPECT_EQ(log_trace(TraceKind::energy_weighted, 0, 5), kNegInf);
  EXPECT_NEAR(log_trace(TraceKind::antinormal, 0, 5), std::log(5.0), 1e-14);
  EXPECT_NEAR(log_trace(TraceKind::occupation, 2, 3), std::log(12.0), 1e-14);
}

TEST(FockOracle, Examples) {
  EXPECT_EQ(fock_enumeration_oracle(0, 3), (FockSums{1, 0, 3}));
  EXPECT_EQ(fock_enumeration_oracle(2, 3), (FockSums{6, 12, 30}));
  EXPECT_EQ(fock_enumeration_oracle(1, 2), (FockSums{2, 2, 6}));
  EXPECT_THROW(fock_enumeration_oracle(13, 2), RefusalError);
  EXPECT_THROW(fock_enumeration_oracle(3, 6), RefusalError);
}

TEST(FockOracle, AgreesWithLogTraces) {
  for (int N = 1; N <= 5; ++N) {
    for (int n = 0; n <= 12; ++n) {
      const FockSums s = fock_enumeration_oracle(n, N);
      EXPECT_EQ(std::llround(std::exp(log_trace(TraceKind::count, n, N))), static_cast<long long>(s.count));
      EXPECT_EQ(std::llround(std::exp(log_trace(TraceKind::occupation, n, N))),
                static_cast<long long>(s.occupation_sum));
      EXPECT_EQ(std::llround(std::exp(log_trace(TraceKind::antinormal, n, N))),
                static_cast<long long>(s.antinormal_sum));
    }
  }
}

TEST(LogWeightedSum, Examples) {
  EXPECT_EQ(log_weighted_sum(TraceKind::count, 0, noisy(0.0, 100, 10)), 0.0);
  EXPECT_EQ(log_weighted_sum(TraceKind::count, 0, noisy(123.0, 0, 10)), 0.0);
  // ln(1 + 2 e^{-1/4} + 3 e^{-1}), 30-digit reference
  const ModelConfig cfg = noisy(4.0, 2, 2);
  EXPECT_NEAR(log_weighted_sum(TraceKind::count, 0, cfg), 1.29780185771034960, 1e-14);
  EXPECT_NEAR(log_weighted_sum(TraceKind::count, 0, cfg), std::log(direct_weighted_sum(TraceKind::count, 0, cfg)),
              1e-14);
}

TEST(LogWeightedSum, MatchesDirectSummation) {
  for (int N : {1, 2, 5, 10}) {
    for (int nc : {0, 1, 3, 8}) {
      for (double k : {0.0, 0.3, 4.0, 50.0}) {
        const ModelConfig cfg = noisy(k, nc, N);
        for (std::int64_t e = (k == 0.0 ? 0 : -nc); e <= 12; ++e) {
          for (auto kind : {TraceKind::count, TraceKind::occupation, TraceKind::antinormal, TraceKind::energy_weighted}) {
            const double direct = direct_weighted_sum(kind, e, cfg);
            const double got = log_weighted_sum(kind, e, cfg);
            if (direct == 0.0) {
              EXPECT_EQ(got, kNegInf);
            } else {
              EXPECT_NEAR(got, std::log(direct), 1e-12);
            }
          }
        }
      }
    }
  }
}

TEST(LogWeightedSum, DomainErrors) {
  EXPECT_THROW(log_weighted_sum(TraceKind::count, -1, noisy(0.0, 5, 3)), DomainError);
  EXPECT_THROW(log_weighted_sum(TraceKind::count, -6, noisy(1.0, 5, 3)), DomainError);
  EXPECT_NO_THROW(log_weighted_sum(TraceKind::count, -5, noisy(1.0, 5, 3)));
}

TEST(LogWeightedSum, NondecreasingInEnergy) {
  for (double k : {0.0, 1.0, 100.0, 1e6}) {
    const ModelConfig cfg = noisy(k, 100, 10);
    double prev = kNegInf;
    for (std::int64_t e = (k == 0.0 ? 0 : -100); e <= 300; ++e) {
      const double v = log_weighted_sum(TraceKind::count, e, cfg);
      EXPECT_GE(v, prev) << "k=" << k << " e=" << e;
      prev = v;
    }
  }
}

TEST(LogWeightedSum, NondecreasingInK) {
  for (std::int64_t e : {0, 5, 50}) {
    double prev = kNegInf;
    for (double k = 1e-3; k <= 1e7; k *= 1.5) {
      const double v = log_weighted_sum(TraceKind::count, e, noisy(k, 100, 10));
      EXPECT_GE(v, prev) << "e=" << e << " k=" << k;
      prev = v;
    }
  }
}

TEST(LogWeightedSum, SmallKRecoversTrace) {
  for (std::int64_t e : {0, 1, 7, 40}) {
    for (auto kind : {TraceKind::count, TraceKind::antinormal}) {
      const double limit = log_trace(kind, e, 10);
      const double got = log_weighted_sum(kind, e, noisy(1e-8, 100, 10));
      EXPECT_LE(std::abs(std::exp(got - limit) - 1.0), 1e-6);
    }
  }
}

TEST(LogWeightedSum, NoOverflowAtLargeScale) {
  const ModelConfig cfg = noisy(1e6, 1000, 1000);
  for (std::int64_t e : {0, 1000, 100000}) {
    for (auto kind : {TraceKind::count, TraceKind::occupation, TraceKind::antinormal}) {
      EXPECT_TRUE(std::isfinite(log_weighted_sum(kind, e, cfg)));
    }
    const WeightedRatios r = weighted_ratios(e, cfg);
    EXPECT_TRUE(std::isfinite(r.occupation));
    EXPECT_TRUE(std::isfinite(r.antinormal));
  }
}

TEST(LogSumExp, HandlesInfinities) {
  EXPECT_EQ(log_sum_exp({}), kNegInf);
  EXPECT_EQ(log_sum_exp({kNegInf, kNegInf}), kNegInf);
  EXPECT_NEAR(log_sum_exp({kNegInf, 0.0, 0.0}), std::log(2.0), 1e-15);
  EXPECT_NEAR(log_sum_exp({1000.0, 1000.0}), 1000.0 + std::log(2.0), 1e-12);
}

TEST(LogMultiplicityCache, ConcurrentReadersAgree) {
  LogMultiplicityCache cache;
  constexpr std::int64_t kSize = 20000;
  std::vector<std::vector<double>> got(8, std::vector<double>(kSize));
  {
    std::vector<std::jthread> pool;
    for (int w = 0; w < 8; ++w) {
      pool.emplace_back([&, w] {
        for (std::int64_t i = 0; i < kSize; ++i) {
          const std::int64_t n = (i * 7919 + w) % kSize;
          got[w][n] = cache.get(n, 10 + w % 2);
        }
      });
    }
  }
  for (int w = 2; w < 8; ++w) EXPECT_EQ(got[w], got[w % 2]);
  for (std::int64_t n : {std::int64_t{0}, std::int64_t{1}, std::int64_t{999}, kSize - 1}) EXPECT_EQ(got[0][n], log_multiplicity(n, 10));
  EXPECT_GE(cache.resident_entries(10), static_cast<std::size_t>(kSize));
}

}  // namespace
}  // namespace hcal
