#pragma once

// Seeded, schedule-independent trajectory ensembles and their statistics.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "hcal/trajectory.hpp"

namespace hcal {

/// Worker count from HCAL_WORKERS, falling back to the hardware
/// concurrency (at least 1).
unsigned default_worker_count();

/// Runs body(i) for i in [0, count) on up to `workers` threads. Work is
/// claimed by index; if any call throws, the exception from the lowest
/// failing index is rethrown after all workers stop.
void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& body);

struct EnsembleOptions {
  std::size_t trajectories = 10000;
  std::uint64_t master_seed = 1;
  double dt = 0.03;
  double t_final = 0.0;
  SamplingOptions sampling;
  unsigned workers = 0;  // 0 -> default_worker_count()
};

/// Trajectory i uses seed derive_trajectory_seed(master_seed, i). Records
/// are returned in index order.
std::vector<TrajectoryRecord> run_ensemble(const ModelConfig& cfg, const TrajectoryState& init,
                                           const RateTable& table, const EnsembleOptions& options);

struct MeanAndError {
  double mean = 0.0;
  double standard_error = 0.0;  // sample stddev / sqrt(M); 0 for M < 2
};

MeanAndError mean_and_stderr(std::span<const double> values);

struct EnsemblePoint {
  double t = 0.0;
  MeanAndError excited;
  MeanAndError energy;  // measured energy, units of omega
  std::map<std::int64_t, double> energy_histogram;  // fraction of trajectories per index
};

/// Statistics at every sampled time. All records must share config, dt and
/// sampling stride, otherwise DomainError.
std::vector<EnsemblePoint> ensemble_statistics(std::span<const TrajectoryRecord> records);

/// Mean and standard error of (e_final - e_initial) over the ensemble.
MeanAndError energy_change_statistics(std::span<const TrajectoryRecord> records);

/// `seed,t_omega,kind,e_index_after`
void write_event_log_csv(std::ostream& out, std::span<const TrajectoryRecord> records);

/// `t_omega,mean_excited,stderr_excited,mean_E_over_omega,stderr_E_over_omega`
void write_ensemble_summary_csv(std::ostream& out, const std::vector<EnsemblePoint>& points);

}  // namespace hcal
