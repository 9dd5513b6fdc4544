#include "hcal/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include "hcal/master_equation.hpp"
#include "hcal/rates.hpp"
#include "hcal/version.hpp"

namespace hcal {
namespace {

std::string num(double v) { return format_double(v); }

std::int64_t as_index(double v, std::string_view what) {
  const double r = std::round(v);
  if (r != v) throw DomainError(std::string(what) + " values must be integers, got " + num(v));
  return static_cast<std::int64_t>(r);
}

ModelConfig with_parameter(const ModelConfig& base, SweepParameter p, double value) {
  ModelConfig cfg = base;
  switch (p) {
    case SweepParameter::k_noise:
      cfg.k_noise = value;
      break;
    case SweepParameter::n_cutoff:
      cfg.n_cutoff = static_cast<int>(as_index(value, "N_C"));
      break;
    case SweepParameter::e_initial:
      break;
  }
  cfg.validate();
  return cfg;
}

EnergyGrid driven_grid(const ModelConfig& cfg, std::int64_t e_initial, double horizon, std::int64_t grid_top) {
  const std::int64_t floor = EnergyGrid::floor_for(cfg);
  if (e_initial < floor) {
    throw DomainError("initial energy " + std::to_string(e_initial) + " below the admissible floor " +
                      std::to_string(floor));
  }
  const std::int64_t top = grid_top > 0 ? grid_top : suggest_grid_top(cfg, e_initial, horizon);
  return EnergyGrid(floor, std::max(top, e_initial + 1));
}

}  // namespace

std::string_view to_string(SweepParameter p) {
  switch (p) {
    case SweepParameter::k_noise:
      return "k";
    case SweepParameter::e_initial:
      return "E_initial";
    case SweepParameter::n_cutoff:
      return "N_C";
  }
  return "unknown";
}

double Horizon::duration(const ModelConfig& cfg) const {
  if (!(value >= 0.0)) throw DomainError("horizon must be non-negative");
  if (kind == Kind::t_final) return value;
  const ModelConfig units = cfg.in_omega_units();
  if (units.lambda_drive == 0.0) throw DomainError("a horizon in Rabi periods needs a nonzero drive");
  return value * std::numbers::pi / std::abs(units.lambda_drive);
}

void SweepSpec::validate() const {
  if (values.empty()) throw DomainError("sweep value list is empty");
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (!(values[i] > values[i - 1])) throw DomainError("sweep values must be strictly increasing");
  }
  base.validate();
  if (!(dt > 0.0)) throw DomainError("dt must be positive");
  if (ensemble_size == 0) throw DomainError("ensemble size must be positive");
}

std::vector<double> log_grid(double lo, double hi, int points_per_decade) {
  if (!(lo > 0.0) || !(hi >= lo) || points_per_decade < 1) {
    throw DomainError("log grid needs 0 < lo <= hi and at least one point per decade");
  }
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  const auto intervals = static_cast<int>(std::llround((b - a) * points_per_decade));
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(intervals) + 1);
  for (int i = 0; i <= intervals; ++i) {
    out.push_back(std::pow(10.0, a + (b - a) * static_cast<double>(i) / std::max(intervals, 1)));
  }
  out.front() = lo;
  out.back() = hi;
  if (intervals == 0) out.resize(1);
  return out;
}

void CsvDataset::write(std::ostream& out) const {
  CsvWriter csv(out);
  write_metadata(csv, metadata);
  csv.header(columns);
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i > 0) out << ',';
      out << format_double(r[i]);
    }
    out << '\n';
  }
}

std::size_t CsvDataset::column(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  throw DomainError("dataset has no column " + std::string(name));
}

CsvMetadata experiment_metadata(std::string_view experiment, const SweepSpec& spec) {
  CsvMetadata md;
  md.emplace_back("tool", std::string("hcal ") + kVersion);
  md.emplace_back("experiment", std::string(experiment));
  md.emplace_back("sweep_parameter", std::string(to_string(spec.parameter)));
  md.emplace_back("omega", num(spec.base.omega));
  md.emplace_back("kappa", num(spec.base.kappa));
  md.emplace_back("lambda_drive", num(spec.base.lambda_drive));
  md.emplace_back("n_osc", std::to_string(spec.base.n_osc));
  md.emplace_back("k_noise", num(spec.base.k_noise));
  md.emplace_back("n_cutoff", std::to_string(spec.base.n_cutoff));
  md.emplace_back("gamma_loss", num(spec.base.gamma_loss));
  md.emplace_back("master_seed", std::to_string(spec.master_seed));
  md.emplace_back("ensemble_size", std::to_string(spec.ensemble_size));
  md.emplace_back("dt", num(spec.dt));
  md.emplace_back("horizon", (spec.horizon.kind == Horizon::Kind::rabi_periods ? "rabi_periods=" : "t_final=") +
                                 num(spec.horizon.value));
  md.emplace_back("e_initial", std::to_string(spec.e_initial));
  return md;
}

CsvDataset rates_sweep(const SweepSpec& spec) {
  spec.validate();
  CsvDataset ds;
  ds.metadata = experiment_metadata("rates", spec);

  if (spec.parameter == SweepParameter::e_initial) {
    ModelConfig cfg = spec.base;
    cfg.k_noise = 0.0;
    const ModelConfig units = cfg.in_omega_units();
    ds.metadata.emplace_back("mode", "inset: perfect-measurement rates versus measured energy");
    ds.columns = {"E_over_omega", "gamma_up", "gamma_down"};
    for (double v : spec.values) {
      const std::int64_t e = as_index(v, "E");
      ds.rows.push_back({static_cast<double>(e), rate_up(e, units), rate_down(e, units)});
    }
    return ds;
  }
  if (spec.parameter != SweepParameter::k_noise) throw DomainError("rates sweep runs over k or E_initial");
  if (spec.series_n_cutoff.empty()) throw DomainError("rates sweep needs at least one N_C series");

  std::string series;
  for (int nc : spec.series_n_cutoff) series += (series.empty() ? "" : " ") + std::to_string(nc);
  ds.metadata.emplace_back("series_n_cutoff", series);
  ds.metadata.emplace_back("measured_energy_index", std::to_string(spec.e_initial));
  ds.columns = {"k_over_omega2", "N_C", "gamma_up", "gamma_down"};
  for (int nc : spec.series_n_cutoff) {
    for (double k : spec.values) {
      ModelConfig cfg = with_parameter(spec.base, SweepParameter::k_noise, k);
      cfg.n_cutoff = nc;
      const ModelConfig units = cfg.in_omega_units();
      ds.rows.push_back({k, static_cast<double>(nc), rate_up(spec.e_initial, units), rate_down(spec.e_initial, units)});
    }
  }
  return ds;
}

CsvDataset driven_energy_transfer(const SweepSpec& spec) {
  spec.validate();
  CsvDataset ds;
  ds.metadata = experiment_metadata("driven_energy_transfer", spec);
  switch (spec.parameter) {
    case SweepParameter::k_noise:
      ds.columns = {"k_over_omega2", "mean_dE_over_omega", "stderr"};
      break;
    case SweepParameter::e_initial:
      ds.metadata.emplace_back("mode", "inset: perfect measurement versus initial energy");
      ds.columns = {"E_i_over_omega", "mean_dE_over_omega", "stderr"};
      break;
    case SweepParameter::n_cutoff:
      ds.columns = {"N_C", "mean_dE_over_omega", "stderr"};
      break;
  }

  for (double v : spec.values) {
    ModelConfig cfg = with_parameter(spec.base, spec.parameter, v);
    std::int64_t e_initial = spec.e_initial;
    if (spec.parameter == SweepParameter::e_initial) {
      cfg.k_noise = 0.0;
      e_initial = as_index(v, "E_initial");
    }
    const double horizon = spec.horizon.duration(cfg);
    const EnergyGrid grid = driven_grid(cfg, e_initial, horizon, spec.grid_top);
    const RateTable table = build_rate_table(cfg, grid);

    EnsembleOptions options;
    options.trajectories = spec.ensemble_size;
    options.master_seed = spec.master_seed;
    options.dt = spec.dt;
    options.t_final = horizon;
    options.sampling = SamplingOptions{0, false};
    options.workers = spec.workers;
    const TrajectoryState init{QubitVector::ground_state(), e_initial, 0.0};
    const auto records = run_ensemble(cfg, init, table, options);
    const MeanAndError de = energy_change_statistics(records);
    ds.rows.push_back({v, de.mean, de.standard_error});
  }
  return ds;
}

SteadyStatePoint steady_state_point(const ModelConfig& cfg, const SweepSpec& spec) {
  const ModelConfig units = cfg.in_omega_units();
  if (!(units.gamma_loss > 0.0)) throw DomainError("steady-state runs need gamma_loss > 0");
  if (spec.max_windows < 1) throw DomainError("max_windows must be at least 1");

  const std::int64_t floor = EnergyGrid::floor_for(cfg);
  const std::int64_t e_initial = std::max(spec.e_initial, floor);
  const std::int64_t top = spec.grid_top > 0 ? spec.grid_top : std::max<std::int64_t>(e_initial, 0) + units.n_cutoff + 400;
  const EnergyGrid grid(floor, top);
  const RateTable table = build_rate_table(cfg, grid);
  const JumpIntegrator integrator(cfg, table, spec.dt);

  Horizon window_horizon{Horizon::Kind::rabi_periods, spec.window_periods};
  const std::int64_t window_steps = step_count(window_horizon.duration(cfg), spec.dt);
  const std::int64_t half = window_steps / 2;
  if (half < 1) throw DomainError("stationarity window shorter than two steps");

  const std::size_t m = spec.ensemble_size;
  std::vector<TrajectoryState> states(m, TrajectoryState{QubitVector::ground_state(), e_initial, 0.0});
  std::vector<RandomStream> streams;
  streams.reserve(m);
  for (std::size_t i = 0; i < m; ++i) streams.emplace_back(derive_trajectory_seed(spec.master_seed, i));

  std::vector<double> first(m), second(m);
  // Advances every trajectory by `steps`, storing per-trajectory time
  // averages of E over [0, split) and [split, steps).
  auto run_window = [&](std::int64_t steps, std::int64_t split) {
    parallel_for(m, spec.workers, [&](std::size_t i) {
      double a = 0.0, b = 0.0;
      TrajectoryState& st = states[i];
      for (std::int64_t s = 0; s < steps; ++s) {
        integrator.step(st, streams[i]);
        (s < split ? a : b) += static_cast<double>(st.e_index);
      }
      first[i] = split > 0 ? a / static_cast<double>(split) : 0.0;
      second[i] = steps > split ? b / static_cast<double>(steps - split) : 0.0;
    });
  };

  SteadyStatePoint point;
  point.k = cfg.k_noise;
  bool stationary = false;
  for (int w = 1; w <= spec.max_windows && !stationary; ++w) {
    run_window(window_steps, half);
    const MeanAndError a = mean_and_stderr(first);
    const MeanAndError b = mean_and_stderr(second);
    const double combined = std::hypot(a.standard_error, b.standard_error);
    const double drift = std::abs(b.mean - a.mean);
    point.burn_in_windows = w;
    point.final_drift_statistic = combined > 0.0 ? drift / combined : (drift == 0.0 ? 0.0 : INFINITY);
    stationary = drift < 2.0 * combined || (drift == 0.0 && combined == 0.0);
  }
  if (!stationary) {
    std::ostringstream os;
    os << "stationarity not reached at k=" << cfg.k_noise << " after " << spec.max_windows
       << " windows; half-window drift / combined stderr = " << point.final_drift_statistic;
    throw RefusalError(os.str());
  }

  run_window(window_steps, window_steps);
  const MeanAndError es = mean_and_stderr(first);
  point.e_s = es.mean;
  point.e_s_stderr = es.standard_error;
  point.p_corrected = units.gamma_loss * table.interpolate_expected_energy(es.mean);
  point.p_naive = units.gamma_loss * es.mean;
  return point;
}

CsvDataset steady_state_power(const SweepSpec& spec) {
  spec.validate();
  if (spec.parameter != SweepParameter::k_noise) throw DomainError("steady-state power sweeps over k");
  CsvDataset ds;
  ds.metadata = experiment_metadata("steady_state_power", spec);
  ds.metadata.emplace_back("window_periods", num(spec.window_periods));
  ds.metadata.emplace_back("max_windows", std::to_string(spec.max_windows));
  ds.columns = {"k_over_omega2", "E_s_over_omega", "P_s_corrected", "P_s_naive", "stderr"};

  std::string windows;
  for (double k : spec.values) {
    const ModelConfig cfg = with_parameter(spec.base, SweepParameter::k_noise, k);
    const SteadyStatePoint p = steady_state_point(cfg, spec);
    ds.rows.push_back({k, p.e_s, p.p_corrected, p.p_naive, cfg.in_omega_units().gamma_loss * p.e_s_stderr});
    windows += (windows.empty() ? "" : " ") + std::to_string(p.burn_in_windows);
  }
  ds.metadata.emplace_back("burn_in_windows", windows);
  return ds;
}

}  // namespace hcal
