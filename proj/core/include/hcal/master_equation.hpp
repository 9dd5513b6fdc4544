#pragma once

// Deterministic integrator for the energy-resolved (hybrid) master equation
// of rho(E, t) on a truncated energy grid, in the frame rotating at omega.

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "hcal/model.hpp"
#include "hcal/rates.hpp"

namespace hcal {

/// Unnormalized qubit blocks rho(n omega), one per grid index. The sum of
/// block traces is the total probability.
struct HybridState {
  EnergyGrid grid;
  std::vector<QubitMatrix> blocks;

  explicit HybridState(EnergyGrid g) : grid(g), blocks(g.size()) {}

  /// All probability in the block at `n`, with qubit density `rho`.
  static HybridState concentrated(EnergyGrid g, std::int64_t n, const QubitMatrix& rho);

  [[nodiscard]] QubitMatrix& at(std::int64_t n) { return blocks[grid.offset(n)]; }
  [[nodiscard]] const QubitMatrix& at(std::int64_t n) const { return blocks[grid.offset(n)]; }
};

/// d rho(n)/dt for every block. Out-of-grid neighbours are treated as empty.
/// `t` is accepted for interface symmetry; the rotating-frame generator is
/// time independent.
HybridState apply_generator(const HybridState& state, const RateTable& table, const ModelConfig& cfg,
                            double t = 0.0);

struct EvolveDiagnostics {
  double min_eigenvalue = 0.0;
  double max_hermiticity_defect = 0.0;
  /// Largest trace seen in a boundary block whose outward rate is nonzero.
  double max_boundary_mass = 0.0;
  double leaked_mass = 0.0;
};

/// Classical RK4, `steps` steps of size `dt` (units 1/omega), with
/// rho <- (rho + rho^dagger)/2 after every step. Refuses to run when
/// dt * max Gamma_down exceeds 0.1. Warns on std::clog if a leaking
/// boundary block ever holds more than 1e-10.
HybridState evolve(HybridState state, const RateTable& table, const ModelConfig& cfg, double dt,
                   std::int64_t steps, EvolveDiagnostics* diagnostics = nullptr);

struct Observables {
  double total_trace = 0.0;
  double excited_population = 0.0;
  std::vector<double> energy_distribution;
  double mean_measured_energy = 0.0;  // units of omega
};

Observables observables(const HybridState& state);

/// Upper grid index that keeps the boundary block empty over `horizon`
/// (units 1/omega) when starting from `e_initial`: initial index plus one
/// drive-injected quantum plus the mean and ten standard deviations of a
/// Poisson jump count bounded by the largest emission rate.
std::int64_t suggest_grid_top(const ModelConfig& cfg, std::int64_t e_initial, double horizon);

struct MasterEquationSample {
  double t = 0.0;
  Observables observables;
};

/// Evolves and records observables every `record_every` steps (and at t=0
/// and the final step).
std::vector<MasterEquationSample> simulate_master_equation(HybridState state, const RateTable& table,
                                                           const ModelConfig& cfg, double dt,
                                                           std::int64_t steps, std::int64_t record_every,
                                                           EvolveDiagnostics* diagnostics = nullptr);

/// `t_omega,total_trace,excited_population,mean_E_over_omega`
void write_master_equation_csv(std::ostream& out, const std::vector<MasterEquationSample>& series);

/// `t_omega,n,prob`
void write_energy_distribution_csv(std::ostream& out, const EnergyGrid& grid,
                                   const std::vector<MasterEquationSample>& series);

}  // namespace hcal
