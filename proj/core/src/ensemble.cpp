#include "hcal/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>

#include "hcal/csv.hpp"

namespace hcal {

unsigned default_worker_count() {
  if (const char* env = std::getenv("HCAL_WORKERS"); env != nullptr && *env != '\0') {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
      // fall through to hardware concurrency
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& body) {
  if (workers == 0) workers = default_worker_count();
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(count, 1)));

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::size_t error_index = std::numeric_limits<std::size_t>::max();
  std::exception_ptr error;

  auto work = [&] {
    while (!failed.load(std::memory_order_relaxed)) {
      const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
        failed.store(true, std::memory_order_relaxed);
      }
    }
  };

  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (error) std::rethrow_exception(error);
}

std::vector<TrajectoryRecord> run_ensemble(const ModelConfig& cfg, const TrajectoryState& init,
                                           const RateTable& table, const EnsembleOptions& options) {
  if (options.trajectories == 0) throw DomainError("ensemble needs at least one trajectory");
  std::vector<TrajectoryRecord> records(options.trajectories);
  parallel_for(options.trajectories, options.workers, [&](std::size_t i) {
    records[i] = run_trajectory(cfg, init, table, options.dt, options.t_final,
                                derive_trajectory_seed(options.master_seed, i), options.sampling);
  });
  return records;
}

MeanAndError mean_and_stderr(std::span<const double> values) {
  MeanAndError out;
  if (values.empty()) return out;
  // Shifted by the first value so identical samples give exactly zero spread.
  const double shift = values.front();
  const double m = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v - shift;
  const double centre = sum / m;
  out.mean = shift + centre;
  if (values.size() < 2) return out;
  double ss = 0.0;
  for (double v : values) ss += (v - shift - centre) * (v - shift - centre);
  out.standard_error = std::sqrt(ss / (m - 1.0)) / std::sqrt(m);
  return out;
}

std::vector<EnsemblePoint> ensemble_statistics(std::span<const TrajectoryRecord> records) {
  if (records.empty()) throw DomainError("ensemble statistics need at least one record");
  const TrajectoryRecord& ref = records.front();
  for (const auto& r : records) {
    if (!(r.config == ref.config) || r.dt != ref.dt || r.sample_stride != ref.sample_stride ||
        r.samples.size() != ref.samples.size()) {
      throw DomainError("ensemble statistics require records with identical config, dt and sampling");
    }
  }

  const std::size_t m = records.size();
  std::vector<EnsemblePoint> points(ref.samples.size());
  std::vector<double> excited(m);
  std::vector<double> energy(m);
  for (std::size_t s = 0; s < points.size(); ++s) {
    EnsemblePoint& p = points[s];
    p.t = ref.samples[s].t;
    for (std::size_t i = 0; i < m; ++i) {
      const TrajectorySample& sample = records[i].samples[s];
      excited[i] = sample.psi.excited_population();
      energy[i] = static_cast<double>(sample.e_index);
      p.energy_histogram[sample.e_index] += 1.0;
    }
    for (auto& [n, w] : p.energy_histogram) w /= static_cast<double>(m);
    p.excited = mean_and_stderr(excited);
    p.energy = mean_and_stderr(energy);
  }
  return points;
}

MeanAndError energy_change_statistics(std::span<const TrajectoryRecord> records) {
  std::vector<double> changes;
  changes.reserve(records.size());
  for (const auto& r : records) changes.push_back(r.energy_change());
  return mean_and_stderr(changes);
}

void write_event_log_csv(std::ostream& out, std::span<const TrajectoryRecord> records) {
  CsvWriter csv(out);
  csv.header({"seed", "t_omega", "kind", "e_index_after"});
  for (const auto& r : records) {
    for (const auto& e : r.events) csv.row(r.seed, e.t, to_string(e.kind), e.e_index_after);
  }
}

void write_ensemble_summary_csv(std::ostream& out, const std::vector<EnsemblePoint>& points) {
  CsvWriter csv(out);
  csv.header({"t_omega", "mean_excited", "stderr_excited", "mean_E_over_omega", "stderr_E_over_omega"});
  for (const auto& p : points) {
    csv.row(p.t, p.excited.mean, p.excited.standard_error, p.energy.mean, p.energy.standard_error);
  }
}

}  // namespace hcal
