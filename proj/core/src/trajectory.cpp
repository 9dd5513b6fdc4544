#include "hcal/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hcal {
namespace {

constexpr double kStepGuard = 0.1;

// Explicit Euler on the normalized no-jump generator, then renormalization.
// `psi` is assumed normalized so that ||sigma_- psi||^2 = |c_e|^2. Written
// on real and imaginary parts: this is the innermost loop of every ensemble.
QubitVector drift_kernel(const QubitVector& psi, double up, double down, double drive, double dt) {
  const double gr = psi.ground.real(), gi = psi.ground.imag();
  const double er = psi.excited.real(), ei = psi.excited.imag();
  const double pe = er * er + ei * ei;
  const double pg = gr * gr + gi * gi;

  // d c_g = -i lambda c_e + (Gd pe - Gu (1 - pg)) / 2 c_g
  // d c_e = -i lambda c_g + (Gu pg - Gd (1 - pe)) / 2 c_e
  const double ag = 0.5 * (down * pe - up * (1.0 - pg));
  const double ae = 0.5 * (up * pg - down * (1.0 - pe));
  const double ngr = gr + dt * (drive * ei + ag * gr);
  const double ngi = gi + dt * (-drive * er + ag * gi);
  const double ner = er + dt * (drive * gi + ae * er);
  const double nei = ei + dt * (-drive * gr + ae * ei);

  const double inv = 1.0 / std::sqrt(ngr * ngr + ngi * ngi + ner * ner + nei * nei);
  return {Complex{ngr * inv, ngi * inv}, Complex{ner * inv, nei * inv}};
}

// psi after a sigma_- jump: sigma_- psi / ||sigma_- psi||, phase kept.
QubitVector lowered(const QubitVector& psi) { return {psi.excited / std::abs(psi.excited), Complex{}}; }
QubitVector raised(const QubitVector& psi) { return {Complex{}, psi.ground / std::abs(psi.ground)}; }

[[noreturn]] void throw_off_grid(std::uint64_t seed, double t, std::int64_t target, const EnergyGrid& grid) {
  std::ostringstream os;
  os.precision(17);
  os << "trajectory seed=" << seed << " left the energy grid [" << grid.n_min() << ", " << grid.n_max()
     << "] at t=" << t << " (target index " << target << ")";
  throw DomainError(os.str());
}

void check_dt(double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("time step must be positive and finite");
}

}  // namespace

std::string_view to_string(JumpKind kind) {
  switch (kind) {
    case JumpKind::down:
      return "down";
    case JumpKind::up:
      return "up";
    case JumpKind::loss:
      return "loss";
  }
  return "unknown";
}

std::size_t TrajectoryRecord::count(JumpKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(events.begin(), events.end(), [kind](const JumpEvent& e) { return e.kind == kind; }));
}

QubitVector drift_step(const TrajectoryState& state, const RateTable& table, const ModelConfig& cfg, double dt) {
  check_dt(dt);
  const double up = table.gamma_up(state.e_index);
  const double down = table.gamma_down(state.e_index);
  if (dt * (up + down) > kStepGuard) {
    std::ostringstream os;
    os << "drift step guard: dt * (Gamma_up + Gamma_down) = " << dt * (up + down) << " exceeds " << kStepGuard;
    throw RefusalError(os.str());
  }
  const ModelConfig units = cfg.in_omega_units();
  return drift_kernel(state.psi, up, down, units.lambda_drive, dt);
}

AdvanceResult advance(const TrajectoryState& state, const RateTable& table, const ModelConfig& cfg, double dt,
                      RandomStream& rng) {
  check_dt(dt);
  const ModelConfig units = cfg.in_omega_units();
  const double loss_guard = dt * units.gamma_loss * table.max_expected_energy();
  if (loss_guard > kStepGuard) {
    std::ostringstream os;
    os << "loss step guard: dt * gamma * max<E> = " << loss_guard << " exceeds " << kStepGuard;
    throw RefusalError(os.str());
  }
  // drift_step carries the rate guard at the current energy.
  const QubitVector drifted = drift_step(state, table, cfg, dt);

  const auto& grid = table.grid();
  const double up = table.gamma_up(state.e_index);
  const double down = table.gamma_down(state.e_index);
  const double p_down = down * std::norm(state.psi.excited) * dt;
  const double p_up = up * std::norm(state.psi.ground) * dt;
  double p_loss = units.gamma_loss > 0.0 ? units.gamma_loss * table.expected_energy(state.e_index) * dt : 0.0;

  AdvanceResult result{state, std::nullopt, false};
  if (p_loss > 0.0 && state.e_index == grid.n_min()) {
    p_loss = 0.0;
    result.loss_suppressed = true;
  }

  TrajectoryState& next = result.state;
  next.t = state.t + dt;
  const double u = rng.uniform();
  if (u < p_down) {
    if (state.e_index == grid.n_max()) throw_off_grid(rng.seed(), next.t, state.e_index + 1, grid);
    next.psi = lowered(state.psi);
    next.e_index += 1;
    result.event = JumpEvent{next.t, JumpKind::down, next.e_index};
  } else if (u < p_down + p_up) {
    if (state.e_index == grid.n_min()) throw_off_grid(rng.seed(), next.t, state.e_index - 1, grid);
    next.psi = raised(state.psi);
    next.e_index -= 1;
    result.event = JumpEvent{next.t, JumpKind::up, next.e_index};
  } else if (u < p_down + p_up + p_loss) {
    next.e_index -= 1;
    result.event = JumpEvent{next.t, JumpKind::loss, next.e_index};
  } else {
    next.psi = drifted;
  }
  return result;
}

JumpIntegrator::JumpIntegrator(const ModelConfig& cfg, const RateTable& table, double dt)
    : table_(table), dt_(dt) {
  check_dt(dt);
  const ModelConfig units = cfg.in_omega_units();
  drive_ = units.lambda_drive;
  gamma_loss_ = units.gamma_loss;
  if (dt * table.max_total_rate() > kStepGuard) {
    std::ostringstream os;
    os << "jump step guard: dt * max(Gamma_up + Gamma_down) = " << dt * table.max_total_rate() << " exceeds "
       << kStepGuard;
    throw RefusalError(os.str());
  }
  if (dt * gamma_loss_ * table.max_expected_energy() > kStepGuard) {
    std::ostringstream os;
    os << "loss step guard: dt * gamma * max<E> = " << dt * gamma_loss_ * table.max_expected_energy()
       << " exceeds " << kStepGuard;
    throw RefusalError(os.str());
  }
}

std::optional<JumpEvent> JumpIntegrator::step(TrajectoryState& state, RandomStream& rng, bool* loss_suppressed) const {
  const auto& grid = table_.grid();
  if (!grid.contains(state.e_index)) throw_off_grid(rng.seed(), state.t, state.e_index, grid);
  const std::size_t at = grid.offset(state.e_index);
  const double up = table_.gamma_up_values()[at];
  const double down = table_.gamma_down_values()[at];

  const double p_down = down * std::norm(state.psi.excited) * dt_;
  const double p_up = up * std::norm(state.psi.ground) * dt_;
  double p_loss = 0.0;
  if (gamma_loss_ > 0.0) {
    p_loss = gamma_loss_ * table_.expected_energy_values()[at] * dt_;
    if (p_loss > 0.0 && state.e_index == grid.n_min()) {
      p_loss = 0.0;
      if (loss_suppressed != nullptr) *loss_suppressed = true;
    }
  }

  const double u = rng.uniform();
  state.t += dt_;
  if (u < p_down) {
    if (state.e_index == grid.n_max()) throw_off_grid(rng.seed(), state.t, state.e_index + 1, grid);
    state.psi = lowered(state.psi);
    state.e_index += 1;
    return JumpEvent{state.t, JumpKind::down, state.e_index};
  }
  if (u < p_down + p_up) {
    if (state.e_index == grid.n_min()) throw_off_grid(rng.seed(), state.t, state.e_index - 1, grid);
    state.psi = raised(state.psi);
    state.e_index -= 1;
    return JumpEvent{state.t, JumpKind::up, state.e_index};
  }
  if (u < p_down + p_up + p_loss) {
    state.e_index -= 1;
    return JumpEvent{state.t, JumpKind::loss, state.e_index};
  }
  state.psi = drift_kernel(state.psi, up, down, drive_, dt_);
  return std::nullopt;
}

std::int64_t step_count(double t_final, double dt) {
  check_dt(dt);
  if (!(t_final >= 0.0)) throw DomainError("final time must be non-negative");
  return std::llround(t_final / dt);
}

TrajectoryRecord run_trajectory(const ModelConfig& cfg, const TrajectoryState& init, const RateTable& table,
                                double dt, double t_final, std::uint64_t seed, const SamplingOptions& sampling) {
  if (sampling.stride < 0) throw DomainError("sampling stride must be non-negative");
  const JumpIntegrator integrator(cfg, table, dt);
  if (!table.grid().contains(init.e_index)) throw_off_grid(seed, init.t, init.e_index, table.grid());

  TrajectoryRecord record;
  record.seed = seed;
  record.config = cfg;
  record.dt = dt;
  record.sample_stride = sampling.stride;
  record.e_initial = init.e_index;

  TrajectoryState state = init;
  state.psi = init.psi.normalized();
  RandomStream rng(seed);
  const std::int64_t steps = step_count(t_final, dt);
  record.samples.push_back({state.t, state.psi, state.e_index});
  for (std::int64_t s = 1; s <= steps; ++s) {
    // Re-anchor the clock so sample times are exact multiples of dt.
    state.t = init.t + static_cast<double>(s - 1) * dt;
    bool suppressed = false;
    const auto event = integrator.step(state, rng, &suppressed);
    if (suppressed) ++record.suppressed_losses;
    if (event && sampling.keep_events) record.events.push_back(*event);
    if (sampling.stride > 0 && s % sampling.stride == 0 && s != steps) {
      record.samples.push_back({state.t, state.psi, state.e_index});
    }
  }
  if (steps > 0) record.samples.push_back({state.t, state.psi, state.e_index});
  record.e_final = state.e_index;
  return record;
}

}  // namespace hcal
