#include "hcal/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hcal {

void ModelConfig::validate() const {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!(omega > 0.0) || !finite(omega)) throw DomainError("omega must be positive");
  if (!(kappa >= 0.0) || !finite(kappa)) throw DomainError("kappa must be non-negative");
  if (!finite(lambda_drive)) throw DomainError("lambda_drive must be finite");
  if (n_osc < 1) throw DomainError("n_osc must be at least 1");
  if (!(k_noise >= 0.0) || !finite(k_noise)) throw DomainError("k_noise must be non-negative");
  if (n_cutoff < 0) throw DomainError("n_cutoff must be non-negative");
  if (!(gamma_loss >= 0.0) || !finite(gamma_loss)) throw DomainError("gamma_loss must be non-negative");
}

ModelConfig ModelConfig::in_omega_units() const {
  validate();
  ModelConfig out = *this;
  out.omega = 1.0;
  out.kappa = kappa / omega;
  out.lambda_drive = lambda_drive / omega;
  out.k_noise = k_noise / (omega * omega);
  out.gamma_loss = gamma_loss / omega;
  return out;
}

std::string describe(const ModelConfig& cfg) {
  std::ostringstream os;
  os.precision(17);
  os << "omega=" << cfg.omega << " kappa=" << cfg.kappa << " lambda_drive=" << cfg.lambda_drive
     << " n_osc=" << cfg.n_osc << " k_noise=" << cfg.k_noise << " n_cutoff=" << cfg.n_cutoff
     << " gamma_loss=" << cfg.gamma_loss;
  return os.str();
}

EnergyGrid::EnergyGrid(std::int64_t n_min, std::int64_t n_max) : n_min_(n_min), n_max_(n_max) {
  if (n_min > n_max) {
    throw DomainError("energy grid requires n_min <= n_max (got " + std::to_string(n_min) + ":" +
                      std::to_string(n_max) + ")");
  }
}

std::int64_t EnergyGrid::floor_for(const ModelConfig& cfg) {
  return cfg.perfect_measurement() ? 0 : -static_cast<std::int64_t>(cfg.n_cutoff);
}

void EnergyGrid::validate_for(const ModelConfig& cfg) const {
  const auto floor = floor_for(cfg);
  if (n_min_ < floor) {
    throw DomainError("energy grid starts at " + std::to_string(n_min_) +
                      " but measured energies below " + std::to_string(floor) +
                      " have no admissible calorimeter states");
  }
}

QubitVector QubitVector::normalized() const {
  const double n2 = norm_squared();
  if (!(n2 > 0.0)) throw DomainError("cannot normalize a zero qubit vector");
  const double inv = 1.0 / std::sqrt(n2);
  return {ground * inv, excited * inv};
}

QubitMatrix QubitMatrix::projector(const QubitVector& psi) {
  return {psi.ground * std::conj(psi.ground), psi.ground * std::conj(psi.excited),
          psi.excited * std::conj(psi.ground), psi.excited * std::conj(psi.excited)};
}

QubitMatrix QubitMatrix::hermitian_part() const {
  const Complex off = 0.5 * (ge + std::conj(eg));
  return {Complex{gg.real()}, off, std::conj(off), Complex{ee.real()}};
}

double QubitMatrix::hermiticity_defect() const {
  return std::max({std::abs(gg.imag()), std::abs(ee.imag()), std::abs(ge - std::conj(eg))});
}

double QubitMatrix::min_eigenvalue() const {
  const QubitMatrix h = hermitian_part();
  const double a = h.gg.real();
  const double d = h.ee.real();
  const double half_gap = std::hypot(0.5 * (a - d), std::abs(h.ge));
  return 0.5 * (a + d) - half_gap;
}

QubitMatrix operator*(const QubitMatrix& a, const QubitMatrix& b) {
  return {a.gg * b.gg + a.ge * b.eg, a.gg * b.ge + a.ge * b.ee, a.eg * b.gg + a.ee * b.eg,
          a.eg * b.ge + a.ee * b.ee};
}

double max_abs(const QubitMatrix& m) {
  return std::max({std::abs(m.gg), std::abs(m.ge), std::abs(m.eg), std::abs(m.ee)});
}

}  // namespace hcal
