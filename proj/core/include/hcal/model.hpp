#pragma once

// Physical configuration, energy grid and the small amount of 2-level linear
// algebra shared by the master-equation and trajectory engines.

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace hcal {

using Complex = std::complex<double>;

/// Raised for inputs outside an operation's mathematical domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised when a numerical guard (step size, stationarity, enumeration
/// bound) refuses to run.
class RefusalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// All physical parameters of the qubit / calorimeter / noise-bath model.
///
/// Rates and amplitudes are given in units of omega, `k_noise` in units of
/// omega^2. Call `in_omega_units()` before handing a config to the numerical
/// modules; they assume omega == 1.
struct ModelConfig {
  double omega = 1.0;
  double kappa = 0.001;
  double lambda_drive = 0.05;
  int n_osc = 10;
  double k_noise = 0.0;
  int n_cutoff = 100;
  double gamma_loss = 0.0;

  /// Throws DomainError if any invariant is violated.
  void validate() const;

  /// Copy with every quantity divided through by the matching power of
  /// omega, so that omega == 1.
  [[nodiscard]] ModelConfig in_omega_units() const;

  [[nodiscard]] bool perfect_measurement() const { return k_noise == 0.0 || n_cutoff == 0; }

  bool operator==(const ModelConfig&) const = default;
};

std::string describe(const ModelConfig& cfg);

/// Inclusive range of measured-energy indices; index n is energy n * omega.
class EnergyGrid {
 public:
  EnergyGrid(std::int64_t n_min, std::int64_t n_max);

  /// Smallest grid admissible for `cfg`: -N_C with noise, 0 without.
  static std::int64_t floor_for(const ModelConfig& cfg);

  /// Throws DomainError unless every index carries well-defined rates.
  void validate_for(const ModelConfig& cfg) const;

  [[nodiscard]] std::int64_t n_min() const { return n_min_; }
  [[nodiscard]] std::int64_t n_max() const { return n_max_; }
  [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(n_max_ - n_min_ + 1); }
  [[nodiscard]] bool contains(std::int64_t n) const { return n >= n_min_ && n <= n_max_; }
  [[nodiscard]] std::size_t offset(std::int64_t n) const { return static_cast<std::size_t>(n - n_min_); }
  [[nodiscard]] std::int64_t index_at(std::size_t offset) const {
    return n_min_ + static_cast<std::int64_t>(offset);
  }

  bool operator==(const EnergyGrid&) const = default;

 private:
  std::int64_t n_min_;
  std::int64_t n_max_;
};

/// Two-component amplitude vector in the {ground, excited} basis. Not
/// necessarily normalized; QubitPureState-valued quantities are normalized
/// at every normalization point.
struct QubitVector {
  Complex ground{};
  Complex excited{};

  [[nodiscard]] double norm_squared() const { return std::norm(ground) + std::norm(excited); }
  [[nodiscard]] double excited_population() const { return std::norm(excited); }
  [[nodiscard]] QubitVector normalized() const;

  static QubitVector ground_state() { return {Complex{1.0, 0.0}, Complex{}}; }
  static QubitVector excited_state() { return {Complex{}, Complex{1.0, 0.0}}; }

  bool operator==(const QubitVector&) const = default;
};

enum class Sigma { raise, lower };

/// sigma_- (c_g, c_e) = (c_e, 0); sigma_+ (c_g, c_e) = (0, c_g).
[[nodiscard]] inline QubitVector apply_sigma(Sigma direction, const QubitVector& psi) {
  if (direction == Sigma::lower) return {psi.excited, Complex{}};
  return {Complex{}, psi.ground};
}

/// 2x2 complex matrix, row-major in the {ground, excited} basis.
struct QubitMatrix {
  Complex gg{}, ge{}, eg{}, ee{};

  static QubitMatrix projector(const QubitVector& psi);
  static QubitMatrix ground_projector() { return {Complex{1.0}, {}, {}, {}}; }
  static QubitMatrix excited_projector() { return {{}, {}, {}, Complex{1.0}}; }

  [[nodiscard]] Complex trace() const { return gg + ee; }
  [[nodiscard]] QubitMatrix adjoint() const { return {std::conj(gg), std::conj(eg), std::conj(ge), std::conj(ee)}; }
  [[nodiscard]] QubitMatrix hermitian_part() const;
  [[nodiscard]] double hermiticity_defect() const;
  /// Smallest eigenvalue of the Hermitian part.
  [[nodiscard]] double min_eigenvalue() const;

  QubitMatrix& operator+=(const QubitMatrix& o) {
    gg += o.gg; ge += o.ge; eg += o.eg; ee += o.ee;
    return *this;
  }
  QubitMatrix& operator*=(Complex s) {
    gg *= s; ge *= s; eg *= s; ee *= s;
    return *this;
  }
  bool operator==(const QubitMatrix&) const = default;
};

inline QubitMatrix operator+(QubitMatrix a, const QubitMatrix& b) { return a += b; }
inline QubitMatrix operator-(const QubitMatrix& a, const QubitMatrix& b) {
  return {a.gg - b.gg, a.ge - b.ge, a.eg - b.eg, a.ee - b.ee};
}
inline QubitMatrix operator*(Complex s, QubitMatrix a) { return a *= s; }
inline QubitMatrix operator*(double s, QubitMatrix a) { return a *= Complex{s}; }
QubitMatrix operator*(const QubitMatrix& a, const QubitMatrix& b);

/// Largest absolute entry.
double max_abs(const QubitMatrix& m);

}  // namespace hcal
