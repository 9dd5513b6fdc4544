#include "hcal/rates.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "hcal/calorimeter_statistics.hpp"
#include "hcal/csv.hpp"

namespace hcal {

double rate_up(std::int64_t e_index, const ModelConfig& cfg) {
  return cfg.kappa * weighted_ratios(e_index, cfg).occupation;
}

double rate_down(std::int64_t e_index, const ModelConfig& cfg) {
  return cfg.kappa * weighted_ratios(e_index, cfg).antinormal;
}

double expected_energy(std::int64_t e_index, const ModelConfig& cfg) {
  return cfg.omega * weighted_ratios(e_index, cfg).energy_weighted;
}

RateTable::RateTable(EnergyGrid grid, std::vector<double> gamma_up, std::vector<double> gamma_down,
                     std::vector<double> expected_energy)
    : grid_(grid),
      gamma_up_(std::move(gamma_up)),
      gamma_down_(std::move(gamma_down)),
      expected_energy_(std::move(expected_energy)) {
  if (gamma_up_.size() != grid_.size() || gamma_down_.size() != grid_.size() ||
      expected_energy_.size() != grid_.size()) {
    throw DomainError("rate table columns do not match the grid size");
  }
}

std::size_t RateTable::checked(std::int64_t n) const {
  if (!grid_.contains(n)) {
    throw DomainError("energy index " + std::to_string(n) + " outside rate table grid [" +
                      std::to_string(grid_.n_min()) + ", " + std::to_string(grid_.n_max()) + "]");
  }
  return grid_.offset(n);
}

double RateTable::max_gamma_down() const { return *std::max_element(gamma_down_.begin(), gamma_down_.end()); }

double RateTable::max_total_rate() const {
  double best = 0.0;
  for (std::size_t i = 0; i < gamma_up_.size(); ++i) best = std::max(best, gamma_up_[i] + gamma_down_[i]);
  return best;
}

double RateTable::max_expected_energy() const {
  return *std::max_element(expected_energy_.begin(), expected_energy_.end());
}

double RateTable::interpolate_expected_energy(double e_index) const {
  const double lo = static_cast<double>(grid_.n_min());
  const double hi = static_cast<double>(grid_.n_max());
  if (!(e_index >= lo && e_index <= hi)) {
    throw DomainError("cannot interpolate <E> at " + std::to_string(e_index) + " outside the grid");
  }
  const double base = std::floor(e_index);
  const auto n = static_cast<std::int64_t>(base);
  const double frac = e_index - base;
  if (frac == 0.0 || n == grid_.n_max()) return expected_energy(n);
  const double a = expected_energy(n);
  return a + frac * (expected_energy(n + 1) - a);
}

RateTable build_rate_table(const ModelConfig& cfg, const EnergyGrid& grid) {
  const ModelConfig units = cfg.in_omega_units();
  grid.validate_for(units);
  shared_log_multiplicity_cache().reserve(
      std::max<std::int64_t>(0, grid.n_max() + units.n_cutoff), units.n_osc);

  std::vector<double> up(grid.size());
  std::vector<double> down(grid.size());
  std::vector<double> energy(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const WeightedRatios r = weighted_ratios(grid.index_at(i), units);
    up[i] = units.kappa * r.occupation;
    down[i] = units.kappa * r.antinormal;
    energy[i] = r.energy_weighted;
  }
  return RateTable(grid, std::move(up), std::move(down), std::move(energy));
}

void write_rate_table_csv(std::ostream& out, const RateTable& table) {
  CsvWriter csv(out);
  csv.header({"n", "E_over_omega", "gamma_up_over_omega", "gamma_down_over_omega", "expected_E_over_omega"});
  const auto& grid = table.grid();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const std::int64_t n = grid.index_at(i);
    csv.row(n, static_cast<double>(n), table.gamma_up_values()[i], table.gamma_down_values()[i],
            table.expected_energy_values()[i]);
  }
}

}  // namespace hcal
