#pragma once

// Stochastic unraveling of the hybrid master equation: a normalized qubit
// state driven by a nonlinear no-jump drift, Poisson emission/absorption
// jumps that move the measured energy by one quantum, and an optional
// Poisson loss channel that drains the calorimeter.

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "hcal/model.hpp"
#include "hcal/random.hpp"
#include "hcal/rates.hpp"

namespace hcal {

struct TrajectoryState {
  QubitVector psi = QubitVector::ground_state();
  std::int64_t e_index = 0;
  double t = 0.0;  // units 1/omega
};

/// down: sigma_- jump, quantum emitted into the calorimeter, E += omega.
/// up:   sigma_+ jump, quantum absorbed from the calorimeter, E -= omega.
/// loss: calorimeter quantum lost to the outside, E -= omega, psi untouched.
enum class JumpKind { down, up, loss };

std::string_view to_string(JumpKind kind);

struct JumpEvent {
  double t = 0.0;
  JumpKind kind = JumpKind::down;
  std::int64_t e_index_after = 0;
  bool operator==(const JumpEvent&) const = default;
};

struct TrajectorySample {
  double t = 0.0;
  QubitVector psi;
  std::int64_t e_index = 0;
  bool operator==(const TrajectorySample&) const = default;
};

struct TrajectoryRecord {
  std::uint64_t seed = 0;
  ModelConfig config;
  double dt = 0.0;
  std::int64_t sample_stride = 0;
  std::int64_t e_initial = 0;
  std::int64_t e_final = 0;
  std::vector<JumpEvent> events;
  std::vector<TrajectorySample> samples;
  /// Steps at the grid floor where a loss event was switched off.
  std::uint64_t suppressed_losses = 0;

  /// (e_final - e_initial), in units of omega.
  [[nodiscard]] double energy_change() const { return static_cast<double>(e_final - e_initial); }
  [[nodiscard]] std::size_t count(JumpKind kind) const;
};

/// One explicit-Euler step of the normalized no-jump evolution at the
/// state's measured energy, followed by renormalization. Refuses if
/// dt * (Gamma_up + Gamma_down) > 0.1 at that energy.
QubitVector drift_step(const TrajectoryState& state, const RateTable& table, const ModelConfig& cfg, double dt);

struct AdvanceResult {
  TrajectoryState state;
  std::optional<JumpEvent> event;
  bool loss_suppressed = false;
};

/// One first-order step: at most one of {down, up, loss} fires, selected by
/// a single uniform draw; otherwise the drift is applied.
AdvanceResult advance(const TrajectoryState& state, const RateTable& table, const ModelConfig& cfg, double dt,
                      RandomStream& rng);

/// Steps a single trajectory with guards validated once for the whole grid.
/// The table must be built for the same config.
class JumpIntegrator {
 public:
  JumpIntegrator(const ModelConfig& cfg, const RateTable& table, double dt);

  /// Advances one step in place. Returns the event that fired, if any.
  /// Throws DomainError if the measured energy would leave the grid.
  std::optional<JumpEvent> step(TrajectoryState& state, RandomStream& rng, bool* loss_suppressed = nullptr) const;

  [[nodiscard]] double dt() const { return dt_; }
  [[nodiscard]] const RateTable& table() const { return table_; }

 private:
  const RateTable& table_;
  double dt_;
  double drive_;
  double gamma_loss_;
};

/// Number of whole steps used to cover t_final with step dt.
std::int64_t step_count(double t_final, double dt);

struct SamplingOptions {
  /// Record (t, psi, E) every `stride` steps; 0 records only the initial
  /// and final state.
  std::int64_t stride = 0;
  bool keep_events = true;
};

/// Deterministic in (cfg, init, table, dt, t_final, seed, sampling).
TrajectoryRecord run_trajectory(const ModelConfig& cfg, const TrajectoryState& init, const RateTable& table,
                                double dt, double t_final, std::uint64_t seed, const SamplingOptions& sampling = {});

}  // namespace hcal
