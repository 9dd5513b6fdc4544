#pragma once

// Drivers that regenerate the three result datasets: rates versus the noise
// parameter k, driven energy transfer versus k (or initial energy), and
// steady-state power with and without the measurement-noise correction.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hcal/csv.hpp"
#include "hcal/ensemble.hpp"
#include "hcal/model.hpp"

namespace hcal {

enum class SweepParameter { k_noise, e_initial, n_cutoff };

std::string_view to_string(SweepParameter p);

/// How long a driven run lasts: either a number of Rabi periods of the
/// rotating-frame drive (each pi / lambda) or an explicit final time.
struct Horizon {
  enum class Kind { rabi_periods, t_final };
  Kind kind = Kind::rabi_periods;
  double value = 5.0;

  [[nodiscard]] double duration(const ModelConfig& cfg) const;
};

struct SweepSpec {
  SweepParameter parameter = SweepParameter::k_noise;
  std::vector<double> values;
  ModelConfig base;
  std::size_t ensemble_size = 10000;
  double dt = 0.03;
  Horizon horizon;
  std::uint64_t master_seed = 1;
  unsigned workers = 0;

  /// Measured energy at t = 0 for k sweeps (units of omega).
  std::int64_t e_initial = 0;
  /// Noise cutoffs drawn as separate series by the rates sweep.
  std::vector<int> series_n_cutoff{100, 500, 1000};
  /// Steady-state burn-in: window length in Rabi periods and the number of
  /// windows tried before giving up.
  double window_periods = 20.0;
  int max_windows = 40;
  /// Upper grid index; 0 picks one automatically.
  std::int64_t grid_top = 0;

  /// Throws DomainError for an empty or non-increasing value list.
  void validate() const;
};

/// `n` points per decade from lo to hi inclusive (lo, hi > 0).
std::vector<double> log_grid(double lo, double hi, int points_per_decade);

struct CsvDataset {
  CsvMetadata metadata;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void write(std::ostream& out) const;
  [[nodiscard]] std::size_t column(std::string_view name) const;
};

/// Metadata shared by every experiment output: tool version, experiment
/// name, physical config, seed, ensemble size, dt, horizon.
CsvMetadata experiment_metadata(std::string_view experiment, const SweepSpec& spec);

/// k sweep at E = 0 for every cutoff in `series_n_cutoff`:
///   k_over_omega2,N_C,gamma_up,gamma_down
/// With parameter == e_initial the perfect-measurement inset instead:
///   E_over_omega,gamma_up,gamma_down
CsvDataset rates_sweep(const SweepSpec& spec);

/// Mean change of measured energy over the horizon, qubit starting in the
/// ground state:
///   k_over_omega2,mean_dE_over_omega,stderr        (parameter == k_noise)
///   E_i_over_omega,mean_dE_over_omega,stderr       (parameter == e_initial, k = 0)
CsvDataset driven_energy_transfer(const SweepSpec& spec);

struct SteadyStatePoint {
  double k = 0.0;
  double e_s = 0.0;
  double e_s_stderr = 0.0;
  double p_corrected = 0.0;
  double p_naive = 0.0;
  int burn_in_windows = 0;
  double final_drift_statistic = 0.0;
};

/// Runs one loss-enabled ensemble to stationarity and measures E_s over the
/// following window. Throws RefusalError if the two half-window means never
/// agree within two combined standard errors.
SteadyStatePoint steady_state_point(const ModelConfig& cfg, const SweepSpec& spec);

/// k_over_omega2,E_s_over_omega,P_s_corrected,P_s_naive,stderr
/// where stderr is gamma times the standard error of E_s.
CsvDataset steady_state_power(const SweepSpec& spec);

}  // namespace hcal
