#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "hcal/model.hpp"

namespace hcal {

/// Absorption rate Gamma_up at measured index e, in the units of cfg.kappa.
double rate_up(std::int64_t e_index, const ModelConfig& cfg);

/// Emission rate Gamma_down at measured index e, in the units of cfg.kappa.
double rate_down(std::int64_t e_index, const ModelConfig& cfg);

/// Expected calorimeter energy given measured index e, in the units of
/// cfg.omega. Equals e * omega exactly under perfect measurement.
double expected_energy(std::int64_t e_index, const ModelConfig& cfg);

/// Gamma_up, Gamma_down and <E> tabulated over an energy grid, in units of
/// omega. Immutable; lookups outside the grid throw instead of
/// extrapolating.
class RateTable {
 public:
  RateTable(EnergyGrid grid, std::vector<double> gamma_up, std::vector<double> gamma_down,
            std::vector<double> expected_energy);

  [[nodiscard]] const EnergyGrid& grid() const { return grid_; }
  [[nodiscard]] double gamma_up(std::int64_t n) const { return gamma_up_[checked(n)]; }
  [[nodiscard]] double gamma_down(std::int64_t n) const { return gamma_down_[checked(n)]; }
  [[nodiscard]] double expected_energy(std::int64_t n) const { return expected_energy_[checked(n)]; }

  // Offset-indexed views for hot loops that have already bounds-checked.
  [[nodiscard]] std::span<const double> gamma_up_values() const { return gamma_up_; }
  [[nodiscard]] std::span<const double> gamma_down_values() const { return gamma_down_; }
  [[nodiscard]] std::span<const double> expected_energy_values() const { return expected_energy_; }

  [[nodiscard]] double max_gamma_down() const;
  [[nodiscard]] double max_total_rate() const;
  [[nodiscard]] double max_expected_energy() const;

  /// Linear interpolation of <E> at a fractional measured index.
  [[nodiscard]] double interpolate_expected_energy(double e_index) const;

 private:
  [[nodiscard]] std::size_t checked(std::int64_t n) const;

  EnergyGrid grid_;
  std::vector<double> gamma_up_;
  std::vector<double> gamma_down_;
  std::vector<double> expected_energy_;
};

/// Tabulates the three quantities over `grid` for cfg expressed in units of
/// omega. Throws DomainError if the grid reaches below the admissible floor.
RateTable build_rate_table(const ModelConfig& cfg, const EnergyGrid& grid);

/// Header `n,E_over_omega,gamma_up_over_omega,gamma_down_over_omega,expected_E_over_omega`,
/// one row per grid index.
void write_rate_table_csv(std::ostream& out, const RateTable& table);

}  // namespace hcal
