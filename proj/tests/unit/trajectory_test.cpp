#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "hcal/ensemble.hpp"
#include "hcal/rates.hpp"
#include "hcal/trajectory.hpp"
#include "stats.hpp"

namespace hcal {
namespace {

ModelConfig undriven(double kappa = 0.001) {
  ModelConfig cfg;
  cfg.kappa = kappa;
  cfg.lambda_drive = 0.0;
  return cfg;
}

TEST(Drift, NoDynamicsLeavesStateUnchanged) {
  const ModelConfig cfg = undriven(0.0);
  const RateTable table = build_rate_table(cfg, EnergyGrid(0, 5));
  const QubitVector psi{Complex{0.6}, Complex{0.0, 0.8}};
  const QubitVector out = drift_step({psi, 3, 0.0}, table, cfg, 0.03);
  EXPECT_NEAR(std::abs(out.ground - psi.ground), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(out.excited - psi.excited), 0.0, 1e-15);
}

TEST(Drift, ExcitedStateIsFixedPoint) {
  const ModelConfig cfg = undriven();
  const RateTable table = build_rate_table(cfg, EnergyGrid(0, 5));
  QubitVector psi = QubitVector::excited_state();
  for (int i = 0; i < 1000; ++i) psi = drift_step({psi, 2, 0.0}, table, cfg, 0.03);
  EXPECT_EQ(psi, QubitVector::excited_state());
}

TEST(Drift, NonlinearDecayRate) {
  const ModelConfig cfg = undriven();
  const RateTable table = build_rate_table(cfg, EnergyGrid(0, 0));
  const double gamma = table.gamma_down(0);
  ASSERT_EQ(table.gamma_up(0), 0.0);
  const double h = 1.0 / std::sqrt(2.0);
  const double dt = 1e-3;
  const QubitVector out = drift_step({{Complex{h}, Complex{h}}, 0, 0.0}, table, cfg, dt);
  const double slope = (out.excited_population() - 0.5) / dt;
  EXPECT_NEAR(slope / (-gamma / 4.0), 1.0, 1e-4);
}

TEST(Drift, GuardRefuses) {
  const ModelConfig cfg = undriven(0.1);
  const RateTable table = build_rate_table(cfg, EnergyGrid(0, 5));
  EXPECT_THROW(drift_step({QubitVector::ground_state(), 0, 0.0}, table, cfg, 0.2), RefusalError);
  EXPECT_THROW(JumpIntegrator(cfg, table, 0.2), RefusalError);
}

TEST(Advance, GroundStateAtZeroIsAbsorbing) {
  const ModelConfig cfg = undriven();
  const RateTable table = build_rate_table(cfg, EnergyGrid(0, 3));
  RandomStream rng(3);
  TrajectoryState s;
  for (int i = 0; i < 20000; ++i) {
    const AdvanceResult r = advance(s, table, cfg, 0.03, rng);
    ASSERT_FALSE(r.event.has_value());
    s = r.state;
  }
  EXPECT_EQ(s.psi, QubitVector::ground_state());
  EXPECT_EQ(s.e_index, 0);
  EXPECT_NEAR(s.t, 20000 * 0.03, 1e-9);
}

TEST(Advance, DownJumpBookkeeping) {
  const ModelConfig cfg = undriven(0.05);  // dt (Gamma_up + Gamma_down) = 0.03 * 20 * 0.05 at E = 5
  const RateTable table = build_rate_table(cfg, EnergyGrid(0, 10));
  const TrajectoryState start{QubitVector::excited_state(), 5, 0.0};
  RandomStream rng(11);
  for (int i = 0; i < 100000; ++i) {
    const AdvanceResult r = advance(start, table, cfg, 0.03, rng);
    if (!r.event) continue;
    EXPECT_EQ(r.event->kind, JumpKind::down);
    EXPECT_EQ(r.event->e_index_after, 6);
    EXPECT_EQ(r.state.e_index, 6);
    EXPECT_EQ(r.state.psi, QubitVector::ground_state());
    return;
  }
  FAIL() << "no jump fired";
}

TEST(Advance, LeavingGridNamesSeedAndTime) {
  const ModelConfig cfg = undriven(0.05);
  const RateTable table = build_rate_table(cfg, EnergyGrid(0, 0));
  try {
    run_trajectory(cfg, {QubitVector::excited_state(), 0, 0.0}, table, 0.03, 1e4, 777);
    FAIL() << "expected a domain error";
  } catch (const DomainError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("seed=777"), std::string::npos) << msg;
    EXPECT_NE(msg.find("t="), std::string::npos) << msg;
  }
}

TEST(Advance, WaitingTimeIsExponential) {
  const ModelConfig cfg = undriven();
  const RateTable table = build_rate_table(cfg, EnergyGrid(0, 1));
  const JumpIntegrator integrator(cfg, table, 0.03);
  std::vector<double> waits;
  for (std::uint64_t i = 0; i < 10000; ++i) {
    RandomStream rng(derive_trajectory_seed(99, i));
    TrajectoryState s{QubitVector::excited_state(), 0, 0.0};
    while (true) {
      const auto event = integrator.step(s, rng);
      if (event) {
        ASSERT_EQ(event->kind, JumpKind::down);
        waits.push_back(event->t);
        break;
      }
    }
  }
  const double rate = 10.0 * cfg.kappa;
  const double d = testing::ks_statistic(waits, [rate](double t) { return 1.0 - std::exp(-rate * t); });
  EXPECT_GT(testing::ks_p_value(d, waits.size()), 0.01) << "D=" << d;
}

TEST(Advance, LossSuppressedAtFloor) {
  ModelConfig cfg = undriven();
  cfg.gamma_loss = 0.5;
  const RateTable table = build_rate_table(cfg, EnergyGrid(0, 4));
  const TrajectoryRecord rec = run_trajectory(cfg, {QubitVector::ground_state(), 0, 0.0}, table, 0.03, 30.0, 1);
  EXPECT_TRUE(rec.events.empty());
  EXPECT_EQ(rec.suppressed_losses, 0u);  // <E> = 0 at the floor

  ModelConfig noisy = cfg;
  noisy.k_noise = 100.0;
  noisy.n_cutoff = 5;
  noisy.gamma_loss = 0.01;
  // A grid floor above -N_C, where <E> is still positive.
  const RateTable nt = build_rate_table(noisy, EnergyGrid(-2, 4));
  RandomStream rng(2);
  const AdvanceResult r2 = advance({QubitVector::excited_state(), -2, 0.0}, nt, noisy, 0.03, rng);
  EXPECT_TRUE(r2.loss_suppressed);
  if (r2.event) EXPECT_EQ(r2.event->kind, JumpKind::down);
}

TEST(RunTrajectory, NoCouplingNoEvents) {
  ModelConfig cfg = undriven(0.0);
  const RateTable table = build_rate_table(cfg, EnergyGrid(0, 2));
  const TrajectoryRecord rec = run_trajectory(cfg, {}, table, 0.03, 100.0, 5);
  EXPECT_TRUE(rec.events.empty());
  EXPECT_EQ(rec.energy_change(), 0.0);
  ASSERT_EQ(rec.samples.size(), 2u);
  EXPECT_NEAR(rec.samples.back().t, 3333 * 0.03, 1e-9);
}

TEST(RunTrajectory, ReproducibleAndSeedSensitive) {
  ModelConfig cfg;
  cfg.kappa = 0.002;
  cfg.k_noise = 50.0;
  const EnergyGrid grid(-100, 200);
  const RateTable table = build_rate_table(cfg, grid);
  const SamplingOptions sampling{50, true};
  const auto a = run_trajectory(cfg, {}, table, 0.03, 2000.0, 123, sampling);
  const auto b = run_trajectory(cfg, {}, table, 0.03, 2000.0, 123, sampling);
  const auto c = run_trajectory(cfg, {}, table, 0.03, 2000.0, 124, sampling);
  EXPECT_EQ(a.events, b.events);
  EXPECT_EQ(a.samples, b.samples);
  EXPECT_FALSE(a.events.empty());
  EXPECT_NE(a.events, c.events);
}

TEST(RunTrajectory, EnergyBookkeepingAndNormalization) {
  ModelConfig cfg;
  cfg.kappa = 0.002;
  cfg.k_noise = 30.0;
  cfg.n_cutoff = 20;
  cfg.gamma_loss = 0.002;
  const RateTable table = build_rate_table(cfg, EnergyGrid(-20, 400));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto rec = run_trajectory(cfg, {QubitVector::ground_state(), 10, 0.0}, table, 0.03, 3000.0, seed, {7, true});
    const auto net = static_cast<std::int64_t>(rec.count(JumpKind::down)) -
                     static_cast<std::int64_t>(rec.count(JumpKind::up)) -
                     static_cast<std::int64_t>(rec.count(JumpKind::loss));
    EXPECT_EQ(rec.e_final - rec.e_initial, net);
    for (const auto& s : rec.samples) EXPECT_NEAR(s.psi.norm_squared(), 1.0, 1e-10);
  }
}

TEST(RunTrajectory, RelaxationStartsWithDownJump) {
  const ModelConfig cfg = undriven();
  const RateTable table = build_rate_table(cfg, EnergyGrid(0, 60));
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto rec = run_trajectory(cfg, {QubitVector::excited_state(), 0, 0.0}, table, 0.03, 2000.0, seed);
    if (rec.events.empty()) continue;
    EXPECT_EQ(rec.events.front().kind, JumpKind::down);
  }
}

TEST(Seeds, DerivedSeedsAreDistinct) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t m = 0; m < 4; ++m) {
    for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(derive_trajectory_seed(m, i));
  }
  EXPECT_EQ(seen.size(), 4000u);
}

}  // namespace
}  // namespace hcal
