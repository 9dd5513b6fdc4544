#include "hcal/master_equation.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <sstream>

#include "hcal/csv.hpp"

namespace hcal {
namespace {

constexpr double kBoundaryWarnMass = 1e-10;
constexpr double kStabilityLimit = 0.1;

void check_same_grid(const HybridState& state, const RateTable& table) {
  if (!(state.grid == table.grid())) throw DomainError("hybrid state and rate table use different energy grids");
}

// Writes the generator into `out`; `drive` is lambda in units of omega.
void generator_into(const HybridState& state, const RateTable& table, double drive, HybridState& out) {
  const std::size_t size = state.blocks.size();
  const auto up = table.gamma_up_values();
  const auto down = table.gamma_down_values();
  const Complex minus_i_drive{0.0, -drive};

  for (std::size_t i = 0; i < size; ++i) {
    const QubitMatrix& r = state.blocks[i];
    QubitMatrix d;

    // -i [lambda (sigma_+ + sigma_-), rho]
    d.gg = minus_i_drive * (r.eg - r.ge);
    d.ge = minus_i_drive * (r.ee - r.gg);
    d.eg = minus_i_drive * (r.gg - r.ee);
    d.ee = minus_i_drive * (r.ge - r.eg);

    // Outflow: -Gamma_up/2 {|g><g|, rho} - Gamma_down/2 {|e><e|, rho}
    const double g_up = up[i];
    const double g_down = down[i];
    d.gg -= g_up * r.gg;
    d.ee -= g_down * r.ee;
    d.ge -= 0.5 * (g_up + g_down) * r.ge;
    d.eg -= 0.5 * (g_up + g_down) * r.eg;

    // Absorption from the block above lands in |e><e| here.
    if (i + 1 < size) d.ee += up[i + 1] * state.blocks[i + 1].gg;
    // Emission from the block below lands in |g><g| here.
    if (i > 0) d.gg += down[i - 1] * state.blocks[i - 1].ee;

    out.blocks[i] = d;
  }
}

void axpy_into(const HybridState& base, double scale, const HybridState& slope, HybridState& out) {
  for (std::size_t i = 0; i < base.blocks.size(); ++i) {
    out.blocks[i] = base.blocks[i] + scale * slope.blocks[i];
  }
}

double total_trace(const HybridState& state) {
  double total = 0.0;
  for (const auto& b : state.blocks) total += b.trace().real();
  return total;
}

}  // namespace

HybridState HybridState::concentrated(EnergyGrid g, std::int64_t n, const QubitMatrix& rho) {
  if (!g.contains(n)) throw DomainError("initial energy index " + std::to_string(n) + " outside grid");
  HybridState s(g);
  s.at(n) = rho;
  return s;
}

HybridState apply_generator(const HybridState& state, const RateTable& table, const ModelConfig& cfg,
                            double /*t*/) {
  check_same_grid(state, table);
  const ModelConfig units = cfg.in_omega_units();
  HybridState out(state.grid);
  generator_into(state, table, units.lambda_drive, out);
  return out;
}

HybridState evolve(HybridState state, const RateTable& table, const ModelConfig& cfg, double dt,
                   std::int64_t steps, EvolveDiagnostics* diagnostics) {
  check_same_grid(state, table);
  if (!(dt > 0.0)) throw DomainError("time step must be positive");
  if (steps < 0) throw DomainError("step count must be non-negative");
  const double stiffness = dt * table.max_gamma_down();
  if (stiffness > kStabilityLimit) {
    std::ostringstream os;
    os << "RK4 stability guard: dt * max(Gamma_down) = " << stiffness << " exceeds " << kStabilityLimit;
    throw RefusalError(os.str());
  }
  const ModelConfig units = cfg.in_omega_units();
  const double drive = units.lambda_drive;

  const std::size_t size = state.blocks.size();
  // Only boundary blocks with a nonzero outward rate can lose probability.
  const bool bottom_leaks = table.gamma_up_values().front() > 0.0;
  const bool top_leaks = table.gamma_down_values().back() > 0.0;
  const double initial_trace = total_trace(state);

  EvolveDiagnostics diag;
  diag.min_eigenvalue = std::numeric_limits<double>::infinity();
  bool warned = false;

  HybridState k1(state.grid), k2(state.grid), k3(state.grid), k4(state.grid), scratch(state.grid);
  for (std::int64_t step = 0; step < steps; ++step) {
    generator_into(state, table, drive, k1);
    axpy_into(state, 0.5 * dt, k1, scratch);
    generator_into(scratch, table, drive, k2);
    axpy_into(state, 0.5 * dt, k2, scratch);
    generator_into(scratch, table, drive, k3);
    axpy_into(state, dt, k3, scratch);
    generator_into(scratch, table, drive, k4);

    const double w = dt / 6.0;
    for (std::size_t i = 0; i < size; ++i) {
      QubitMatrix next = state.blocks[i] + w * (k1.blocks[i] + 2.0 * k2.blocks[i] + 2.0 * k3.blocks[i] + k4.blocks[i]);
      diag.max_hermiticity_defect = std::max(diag.max_hermiticity_defect, next.hermiticity_defect());
      state.blocks[i] = next.hermitian_part();
      diag.min_eigenvalue = std::min(diag.min_eigenvalue, state.blocks[i].min_eigenvalue());
    }

    double boundary = 0.0;
    if (bottom_leaks) boundary = std::max(boundary, state.blocks.front().trace().real());
    if (top_leaks) boundary = std::max(boundary, state.blocks.back().trace().real());
    diag.max_boundary_mass = std::max(diag.max_boundary_mass, boundary);
    if (!warned && boundary > kBoundaryWarnMass) {
      warned = true;
      std::clog << "warning: boundary block of grid [" << state.grid.n_min() << ", " << state.grid.n_max()
                << "] holds " << boundary << " at t=" << static_cast<double>(step + 1) * dt
                << "; leaked mass so far " << initial_trace - total_trace(state) << '\n';
    }
  }
  if (steps == 0) {
    for (const auto& b : state.blocks) diag.min_eigenvalue = std::min(diag.min_eigenvalue, b.min_eigenvalue());
  }
  diag.leaked_mass = initial_trace - total_trace(state);
  if (diagnostics != nullptr) *diagnostics = diag;
  return state;
}

Observables observables(const HybridState& state) {
  Observables obs;
  obs.energy_distribution.resize(state.blocks.size());
  double weighted = 0.0;
  for (std::size_t i = 0; i < state.blocks.size(); ++i) {
    const double p = state.blocks[i].trace().real();
    obs.energy_distribution[i] = p;
    obs.total_trace += p;
    obs.excited_population += state.blocks[i].ee.real();
    weighted += static_cast<double>(state.grid.index_at(i)) * p;
  }
  obs.mean_measured_energy = obs.total_trace > 0.0 ? weighted / obs.total_trace : 0.0;
  return obs;
}

std::int64_t suggest_grid_top(const ModelConfig& cfg, std::int64_t e_initial, double horizon) {
  const ModelConfig units = cfg.in_omega_units();
  if (!(horizon >= 0.0)) throw DomainError("horizon must be non-negative");
  const double reach = units.perfect_measurement() ? 0.0 : static_cast<double>(units.n_cutoff);
  double top = static_cast<double>(e_initial) + 1.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double max_rate = units.kappa * (std::max(top, 0.0) + reach + units.n_osc);
    const double mean_jumps = max_rate * horizon;
    const double next = static_cast<double>(e_initial) + 1.0 + mean_jumps + 10.0 * std::sqrt(mean_jumps) + 10.0;
    if (std::abs(next - top) < 0.5) return static_cast<std::int64_t>(std::ceil(next));
    top = next;
  }
  throw DomainError("no finite grid keeps the boundary empty over this horizon; pass an explicit grid");
}

std::vector<MasterEquationSample> simulate_master_equation(HybridState state, const RateTable& table,
                                                           const ModelConfig& cfg, double dt,
                                                           std::int64_t steps, std::int64_t record_every,
                                                           EvolveDiagnostics* diagnostics) {
  if (record_every <= 0) throw DomainError("record interval must be positive");
  std::vector<MasterEquationSample> series;
  series.push_back({0.0, observables(state)});
  EvolveDiagnostics total;
  total.min_eigenvalue = std::numeric_limits<double>::infinity();
  const double initial_trace = observables(state).total_trace;
  std::int64_t done = 0;
  while (done < steps) {
    const std::int64_t chunk = std::min(record_every, steps - done);
    EvolveDiagnostics part;
    state = evolve(std::move(state), table, cfg, dt, chunk, &part);
    done += chunk;
    total.min_eigenvalue = std::min(total.min_eigenvalue, part.min_eigenvalue);
    total.max_hermiticity_defect = std::max(total.max_hermiticity_defect, part.max_hermiticity_defect);
    total.max_boundary_mass = std::max(total.max_boundary_mass, part.max_boundary_mass);
    series.push_back({static_cast<double>(done) * dt, observables(state)});
  }
  total.leaked_mass = initial_trace - series.back().observables.total_trace;
  if (diagnostics != nullptr) *diagnostics = total;
  return series;
}

void write_master_equation_csv(std::ostream& out, const std::vector<MasterEquationSample>& series) {
  CsvWriter csv(out);
  csv.header({"t_omega", "total_trace", "excited_population", "mean_E_over_omega"});
  for (const auto& s : series) {
    csv.row(s.t, s.observables.total_trace, s.observables.excited_population, s.observables.mean_measured_energy);
  }
}

void write_energy_distribution_csv(std::ostream& out, const EnergyGrid& grid,
                                   const std::vector<MasterEquationSample>& series) {
  CsvWriter csv(out);
  csv.header({"t_omega", "n", "prob"});
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.observables.energy_distribution.size(); ++i) {
      csv.row(s.t, grid.index_at(i), s.observables.energy_distribution[i]);
    }
  }
}

}  // namespace hcal
