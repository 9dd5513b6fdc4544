#include <gtest/gtest.h>

#include <sstream>

#include "hcal/ensemble.hpp"
#include "hcal/rates.hpp"

namespace hcal {
namespace {

TEST(MeanAndStderr, TwoValues) {
  const std::vector<double> v{0.0, 2.0};
  const MeanAndError m = mean_and_stderr(v);
  EXPECT_DOUBLE_EQ(m.mean, 1.0);
  EXPECT_DOUBLE_EQ(m.standard_error, 1.0);
}

TEST(MeanAndStderr, SingleValueHasNoError) {
  const std::vector<double> v{3.5};
  EXPECT_EQ(mean_and_stderr(v).standard_error, 0.0);
}

TEST(EnsembleStatistics, IdenticalTrajectoriesHaveZeroError) {
  ModelConfig cfg;
  cfg.kappa = 0.0;
  cfg.lambda_drive = 0.0;
  const RateTable table = build_rate_table(cfg, EnergyGrid(0, 5));
  EnsembleOptions opt;
  opt.trajectories = 16;
  opt.t_final = 3.0;
  opt.sampling = {25, false};
  const TrajectoryState init{QubitVector{Complex{0.6}, Complex{0.8}}, 4, 0.0};
  const auto records = run_ensemble(cfg, init, table, opt);
  const auto points = ensemble_statistics(records);
  ASSERT_EQ(points.size(), 5u);
  for (const auto& p : points) {
    EXPECT_EQ(p.excited.standard_error, 0.0);
    EXPECT_EQ(p.energy.standard_error, 0.0);
    EXPECT_NEAR(p.excited.mean, 0.64, 1e-12);
    EXPECT_EQ(p.energy.mean, 4.0);
    EXPECT_EQ(p.energy_histogram.at(4), 1.0);
  }
}

TEST(EnsembleStatistics, EnergyChangeOfTwoRecords) {
  TrajectoryRecord a;
  a.e_initial = 0;
  a.e_final = 0;
  TrajectoryRecord b = a;
  b.e_final = 2;
  const std::vector<TrajectoryRecord> recs{a, b};
  const MeanAndError m = energy_change_statistics(recs);
  EXPECT_DOUBLE_EQ(m.mean, 1.0);
  EXPECT_DOUBLE_EQ(m.standard_error, 1.0);
}

TEST(EnsembleStatistics, RejectsMixedConfig) {
  TrajectoryRecord a;
  a.samples.push_back({});
  TrajectoryRecord b = a;
  b.config.k_noise = 1.0;
  std::vector<TrajectoryRecord> recs{a, b};
  EXPECT_THROW(ensemble_statistics(recs), DomainError);
  recs[1] = a;
  recs[1].dt = 0.5;
  EXPECT_THROW(ensemble_statistics(recs), DomainError);
  recs[1] = a;
  recs[1].sample_stride = 3;
  EXPECT_THROW(ensemble_statistics(recs), DomainError);
}

TEST(Ensemble, ScheduleIndependent) {
  ModelConfig cfg;
  cfg.kappa = 0.005;
  cfg.k_noise = 10.0;
  cfg.n_cutoff = 20;
  const RateTable table = build_rate_table(cfg, EnergyGrid(-20, 200));
  EnsembleOptions opt;
  opt.trajectories = 64;
  opt.master_seed = 9;
  opt.t_final = 300.0;
  opt.sampling = {100, true};
  opt.workers = 1;
  const auto serial = run_ensemble(cfg, {}, table, opt);
  opt.workers = 4;
  const auto parallel = run_ensemble(cfg, {}, table, opt);
  ASSERT_EQ(serial.size(), parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    EXPECT_EQ(serial[i].seed, parallel[i].seed);
    EXPECT_EQ(serial[i].events, parallel[i].events);
    EXPECT_EQ(serial[i].samples, parallel[i].samples);
  }
}

TEST(ParallelFor, PropagatesLowestIndexError) {
  EXPECT_THROW(parallel_for(100, 3,
                            [](std::size_t i) {
                              if (i == 40) throw DomainError("boom");
                            }),
               DomainError);
}

TEST(EnsembleCsv, Schemas) {
  TrajectoryRecord r;
  r.seed = 5;
  r.events.push_back({0.03, JumpKind::down, 1});
  r.events.push_back({0.5, JumpKind::loss, 0});
  std::ostringstream log;
  write_event_log_csv(log, std::span<const TrajectoryRecord>(&r, 1));
  EXPECT_EQ(log.str(), "seed,t_omega,kind,e_index_after\n5,0.029999999999999999,down,1\n5,0.5,loss,0\n");

  EnsemblePoint p;
  p.t = 1.0;
  p.excited = {0.25, 0.5};
  p.energy = {2.0, 0.125};
  std::ostringstream summary;
  write_ensemble_summary_csv(summary, {p});
  EXPECT_EQ(summary.str(),
            "t_omega,mean_excited,stderr_excited,mean_E_over_omega,stderr_E_over_omega\n1,0.25,0.5,2,0.125\n");
}

}  // namespace
}  // namespace hcal
