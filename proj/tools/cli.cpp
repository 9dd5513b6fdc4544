#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hcal/ensemble.hpp"
#include "hcal/experiments.hpp"
#include "hcal/master_equation.hpp"
#include "hcal/rates.hpp"
#include "hcal/trajectory.hpp"

namespace hcal::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename T>
concept ListLike = requires { typename T::value_type; } && !std::is_same_v<T, std::string>;

template <typename T>
T parse_scalar(const std::string& text) {
  std::size_t used = 0;
  T value{};
  try {
    if constexpr (std::is_floating_point_v<T>) {
      value = static_cast<T>(std::stod(text, &used));
    } else {
      value = static_cast<T>(std::stoll(text, &used));
    }
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw UsageError("cannot parse '" + text + "' as a number");
  return value;
}

// Accepts either a JSON array or a comma-separated string.
template <ListLike T>
T list_from_json(const json& v) {
  if (v.is_array()) return v.get<T>();
  if (!v.is_string()) throw UsageError("expected a list or a comma-separated string");
  T out;
  std::stringstream ss(v.get<std::string>());
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_scalar<typename T::value_type>(item));
  return out;
}

// Merged view of config-file keys and flags. Every flag `--foo-bar` has the
// config key `foo_bar`, except the model parameters, whose keys are the
// ModelConfig field names.
struct CliConfig {
  ModelConfig model;
  std::string config_path;
  std::string out_dir = ".";
  unsigned workers = 0;
  std::uint64_t seed = 42;

  double dt = 0.03;
  double t_final = 100.0;
  std::int64_t e0 = 0;
  std::string psi0 = "g";
  std::string grid = "auto";
  std::int64_t sample_stride = 0;
  std::int64_t samples = 10;
  std::int64_t record_every = 100;
  bool distribution = false;

  std::size_t trajectories = 1000;
  double periods = 5.0;
  double k_min = 1e-2;
  double k_max = 1e6;
  int points_per_decade = 12;
  std::vector<int> n_cutoffs{100, 500, 1000};
  bool inset = false;
  std::vector<double> inset_values;
  std::vector<double> k_values;
  double window_periods = 20.0;
  int max_windows = 40;
};

class Registry {
 public:
  template <typename T>
  void bind(CLI::App* sub, const std::string& flag, const std::string& key, T& target, const std::string& help) {
    CLI::Option* opt = nullptr;
    if constexpr (std::is_same_v<T, bool>) {
      opt = sub->add_flag(flag, target, help + " [config key: " + key + "]");
    } else {
      opt = sub->add_option(flag, target, help + " [config key: " + key + "]")->capture_default_str();
      if constexpr (ListLike<T>) opt->delimiter(',');
    }
    auto& b = bindings_[key];
    b.options.push_back(opt);
    if (!b.assign) {
      b.assign = [&target](const json& v) {
        if constexpr (ListLike<T>) {
          target = list_from_json<T>(v);
        } else {
          target = v.get<T>();
        }
      };
    }
  }

  [[nodiscard]] bool given_on_command_line(const std::string& key) const {
    auto it = bindings_.find(key);
    if (it == bindings_.end()) return false;
    for (const auto* opt : it->second.options) {
      if (opt->count() > 0) return true;
    }
    return false;
  }

  // Applies config-file values for keys not given as flags; returns the
  // keys taken from the file.
  std::set<std::string> apply(const json& doc) {
    if (!doc.is_object()) throw UsageError("config file must hold a flat JSON object");
    std::set<std::string> applied;
    for (const auto& [key, value] : doc.items()) {
      auto it = bindings_.find(key);
      if (it == bindings_.end()) throw UsageError("unknown config key '" + key + "'");
      if (value.is_object()) throw UsageError("config key '" + key + "' must be a scalar");
      if (given_on_command_line(key)) continue;
      try {
        it->second.assign(value);
      } catch (const json::exception& e) {
        throw UsageError("config key '" + key + "': " + e.what());
      }
      applied.insert(key);
    }
    return applied;
  }

 private:
  struct Binding {
    std::function<void(const json&)> assign;
    std::vector<CLI::Option*> options;
  };
  std::map<std::string, Binding> bindings_;
};

void add_common(Registry& reg, CLI::App* sub, CliConfig& c) {
  sub->add_option("--config", c.config_path, "flat JSON config file; flags override its keys");
  reg.bind(sub, "--out-dir", "out_dir", c.out_dir, "directory receiving every output file");
  reg.bind(sub, "--workers", "workers", c.workers, "worker threads (0: HCAL_WORKERS or hardware concurrency)");
  reg.bind(sub, "--seed", "seed", c.seed, "master seed");
  reg.bind(sub, "--omega", "omega", c.model.omega, "qubit / oscillator frequency omega (sets the energy unit)");
  reg.bind(sub, "--kappa", "kappa", c.model.kappa, "coupling rate kappa(omega), units of omega");
  reg.bind(sub, "--lambda", "lambda_drive", c.model.lambda_drive, "drive amplitude lambda, units of omega");
  reg.bind(sub, "--n-osc", "n_osc", c.model.n_osc, "number N of resonant calorimeter oscillators");
  reg.bind(sub, "--k", "k_noise", c.model.k_noise, "noise variance parameter k, units of omega^2 (0: perfect)");
  reg.bind(sub, "--n-cutoff", "n_cutoff", c.model.n_cutoff, "noise-bath cutoff N_C (integer)");
  reg.bind(sub, "--gamma", "gamma_loss", c.model.gamma_loss, "calorimeter loss rate gamma, units of omega");
}

void add_dynamics(Registry& reg, CLI::App* sub, CliConfig& c) {
  reg.bind(sub, "--dt", "dt", c.dt, "time step, units of 1/omega");
  reg.bind(sub, "--t-final", "t_final", c.t_final, "final time, units of 1/omega");
  reg.bind(sub, "--e0", "e0", c.e0, "initial measured energy, units of omega");
  reg.bind(sub, "--psi0", "psi0", c.psi0, "initial qubit state: g or e");
  reg.bind(sub, "--grid", "grid", c.grid, "energy grid as n_min:n_max (units of omega) or auto");
}

std::pair<std::int64_t, std::int64_t> parse_grid(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw UsageError("grid must look like n_min:n_max, got '" + text + "'");
  return {parse_scalar<std::int64_t>(text.substr(0, colon)), parse_scalar<std::int64_t>(text.substr(colon + 1))};
}

EnergyGrid resolve_grid(const CliConfig& c, double horizon, std::int64_t auto_top_default = -1) {
  if (c.grid != "auto") {
    const auto [lo, hi] = parse_grid(c.grid);
    return EnergyGrid(lo, hi);
  }
  const std::int64_t floor = EnergyGrid::floor_for(c.model);
  std::int64_t top = auto_top_default;
  if (top < 0) {
    top = c.model.gamma_loss > 0.0 ? std::max<std::int64_t>(c.e0, 0) + c.model.n_cutoff + 400
                                   : suggest_grid_top(c.model, c.e0, horizon);
  }
  return EnergyGrid(floor, std::max(top, c.e0));
}

QubitVector initial_psi(const CliConfig& c) {
  if (c.psi0 == "g") return QubitVector::ground_state();
  if (c.psi0 == "e") return QubitVector::excited_state();
  throw UsageError("--psi0 must be g or e");
}

fs::path prepare_out_dir(const CliConfig& c) {
  fs::path dir(c.out_dir);
  fs::create_directories(dir);
  return dir;
}

std::ofstream open_output(const fs::path& dir, const std::string& name) {
  std::ofstream f(dir / name, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + (dir / name).string() + " for writing");
  return f;
}

SweepSpec base_spec(const CliConfig& c) {
  SweepSpec spec;
  spec.base = c.model;
  spec.ensemble_size = c.trajectories;
  spec.dt = c.dt;
  spec.master_seed = c.seed;
  spec.workers = c.workers;
  spec.e_initial = c.e0;
  spec.horizon = Horizon{Horizon::Kind::rabi_periods, c.periods};
  return spec;
}

std::vector<double> integer_range(std::int64_t lo, std::int64_t hi) {
  std::vector<double> out;
  for (std::int64_t n = lo; n <= hi; ++n) out.push_back(static_cast<double>(n));
  return out;
}

int cmd_rates(const CliConfig& c, std::ostream& out) {
  const EnergyGrid grid = resolve_grid(c, 0.0, 50);
  const RateTable table = build_rate_table(c.model, grid);
  const auto dir = prepare_out_dir(c);
  auto f = open_output(dir, "rates.csv");
  write_rate_table_csv(f, table);
  out << (dir / "rates.csv").string() << '\n';
  return 0;
}

int cmd_trajectory(const CliConfig& c, std::ostream& out) {
  const EnergyGrid grid = resolve_grid(c, c.t_final);
  const RateTable table = build_rate_table(c.model, grid);
  const TrajectoryState init{initial_psi(c), c.e0, 0.0};
  const TrajectoryRecord rec = run_trajectory(c.model, init, table, c.dt, c.t_final, c.seed,
                                              SamplingOptions{c.sample_stride, true});
  const auto dir = prepare_out_dir(c);
  {
    auto f = open_output(dir, "trajectory_events.csv");
    write_event_log_csv(f, std::span<const TrajectoryRecord>(&rec, 1));
  }
  {
    auto f = open_output(dir, "trajectory_samples.csv");
    CsvWriter csv(f);
    csv.header({"t_omega", "re_c_g", "im_c_g", "re_c_e", "im_c_e", "e_index"});
    for (const auto& s : rec.samples) {
      csv.row(s.t, s.psi.ground.real(), s.psi.ground.imag(), s.psi.excited.real(), s.psi.excited.imag(), s.e_index);
    }
  }
  out << "events=" << rec.events.size() << " delta_E_over_omega=" << rec.energy_change()
      << " suppressed_losses=" << rec.suppressed_losses << '\n';
  return 0;
}

int cmd_ensemble(const CliConfig& c, std::ostream& out) {
  const EnergyGrid grid = resolve_grid(c, c.t_final);
  const RateTable table = build_rate_table(c.model, grid);
  EnsembleOptions opt;
  opt.trajectories = c.trajectories;
  opt.master_seed = c.seed;
  opt.dt = c.dt;
  opt.t_final = c.t_final;
  opt.workers = c.workers;
  const std::int64_t steps = step_count(c.t_final, c.dt);
  const std::int64_t stride =
      c.sample_stride > 0 ? c.sample_stride : std::max<std::int64_t>(1, steps / std::max<std::int64_t>(c.samples, 1));
  opt.sampling = SamplingOptions{stride, false};
  const auto records = run_ensemble(c.model, TrajectoryState{initial_psi(c), c.e0, 0.0}, table, opt);
  const auto points = ensemble_statistics(records);
  const auto dir = prepare_out_dir(c);
  auto f = open_output(dir, "ensemble_summary.csv");
  CsvWriter csv(f);
  csv.comment("trajectories", std::to_string(c.trajectories));
  csv.comment("master_seed", std::to_string(c.seed));
  csv.comment("config", describe(c.model));
  write_ensemble_summary_csv(f, points);
  const auto de = energy_change_statistics(records);
  out << "mean_delta_E_over_omega=" << de.mean << " stderr=" << de.standard_error << '\n';
  return 0;
}

int cmd_master_eq(const CliConfig& c, std::ostream& out) {
  const EnergyGrid grid = resolve_grid(c, c.t_final);
  const RateTable table = build_rate_table(c.model, grid);
  const HybridState init = HybridState::concentrated(grid, c.e0, QubitMatrix::projector(initial_psi(c)));
  EvolveDiagnostics diag;
  const auto series =
      simulate_master_equation(init, table, c.model, c.dt, step_count(c.t_final, c.dt), c.record_every, &diag);
  const auto dir = prepare_out_dir(c);
  {
    auto f = open_output(dir, "master_eq.csv");
    write_master_equation_csv(f, series);
  }
  if (c.distribution) {
    auto f = open_output(dir, "master_eq_distribution.csv");
    write_energy_distribution_csv(f, grid, series);
  }
  out << "leaked_mass=" << diag.leaked_mass << " min_eigenvalue=" << diag.min_eigenvalue << '\n';
  return 0;
}

int cmd_fig2(const CliConfig& c, std::ostream& out) {
  SweepSpec spec = base_spec(c);
  spec.series_n_cutoff = c.n_cutoffs;
  const auto dir = prepare_out_dir(c);
  std::string name;
  if (c.inset) {
    spec.parameter = SweepParameter::e_initial;
    spec.values = c.inset_values.empty() ? integer_range(0, 50) : c.inset_values;
    name = "fig2_inset.csv";
  } else {
    spec.parameter = SweepParameter::k_noise;
    spec.values = log_grid(c.k_min, c.k_max, c.points_per_decade);
    name = "fig2_rates.csv";
  }
  const CsvDataset ds = rates_sweep(spec);
  auto f = open_output(dir, name);
  ds.write(f);
  out << (dir / name).string() << '\n';
  return 0;
}

int cmd_fig3(const CliConfig& c, std::ostream& out) {
  SweepSpec spec = base_spec(c);
  const auto dir = prepare_out_dir(c);
  std::string name;
  if (c.inset) {
    spec.parameter = SweepParameter::e_initial;
    spec.values = c.inset_values.empty() ? std::vector<double>{0, 5, 10, 20, 40, 80} : c.inset_values;
    name = "fig3_inset.csv";
  } else {
    spec.parameter = SweepParameter::k_noise;
    spec.values = log_grid(c.k_min, c.k_max, c.points_per_decade);
    name = "fig3_energy_transfer.csv";
  }
  const CsvDataset ds = driven_energy_transfer(spec);
  auto f = open_output(dir, name);
  ds.write(f);
  out << (dir / name).string() << '\n';
  return 0;
}

int cmd_fig4(const CliConfig& c, std::ostream& out) {
  SweepSpec spec = base_spec(c);
  spec.parameter = SweepParameter::k_noise;
  spec.values = c.k_values.empty() ? std::vector<double>{0, 1, 10, 100, 1e3, 1e4, 1e5, 1e6} : c.k_values;
  spec.window_periods = c.window_periods;
  spec.max_windows = c.max_windows;
  const CsvDataset ds = steady_state_power(spec);
  const auto dir = prepare_out_dir(c);
  auto f = open_output(dir, "fig4_steady_state.csv");
  ds.write(f);
  out << (dir / "fig4_steady_state.csv").string() << '\n';
  return 0;
}

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError("config file '" + path + "' is not valid JSON: " + e.what());
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CliConfig c;
  Registry reg;
  CLI::App app{"Hybrid master equation and quantum-jump simulator for a driven qubit monitored by a noisy calorimeter",
               "hcal"};
  app.require_subcommand(1);
  app.get_formatter()->column_width(44);

  using Handler = int (*)(const CliConfig&, std::ostream&);
  struct Command {
    CLI::App* app;
    Handler handler;
    std::map<std::string, std::function<void()>> defaults;
  };
  std::vector<Command> commands;

  auto* rates = app.add_subcommand("rates", "export the rate table Gamma_up, Gamma_down, <E> as rates.csv");
  add_common(reg, rates, c);
  reg.bind(rates, "--grid", "grid", c.grid, "energy grid as n_min:n_max (units of omega) or auto (floor:50)");
  commands.push_back({rates, cmd_rates, {}});

  auto* traj = app.add_subcommand("trajectory", "run one seeded trajectory; writes trajectory_events.csv");
  add_common(reg, traj, c);
  add_dynamics(reg, traj, c);
  reg.bind(traj, "--sample-stride", "sample_stride", c.sample_stride, "record psi and E every this many steps (0: ends only)");
  commands.push_back({traj, cmd_trajectory, {}});

  auto* ens = app.add_subcommand("ensemble", "run a trajectory ensemble; writes ensemble_summary.csv");
  add_common(reg, ens, c);
  add_dynamics(reg, ens, c);
  reg.bind(ens, "--trajectories", "trajectories", c.trajectories, "ensemble size M");
  reg.bind(ens, "--samples", "samples", c.samples, "number of sampling intervals over the horizon");
  reg.bind(ens, "--sample-stride", "sample_stride", c.sample_stride, "explicit sampling stride in steps (overrides --samples)");
  commands.push_back({ens, cmd_ensemble, {}});

  auto* me = app.add_subcommand("master-eq", "integrate the hybrid master equation; writes master_eq.csv");
  add_common(reg, me, c);
  add_dynamics(reg, me, c);
  reg.bind(me, "--record-every", "record_every", c.record_every, "steps between recorded snapshots");
  reg.bind(me, "--distribution", "distribution", c.distribution, "also write master_eq_distribution.csv");
  commands.push_back({me, cmd_master_eq, {}});

  auto* fig2 = app.add_subcommand("fig2", "rates at E=0 versus k for several N_C (fig2_rates.csv) or --inset");
  add_common(reg, fig2, c);
  reg.bind(fig2, "--k-min", "k_min", c.k_min, "smallest k, units of omega^2");
  reg.bind(fig2, "--k-max", "k_max", c.k_max, "largest k, units of omega^2");
  reg.bind(fig2, "--points-per-decade", "points_per_decade", c.points_per_decade, "log-grid density in k");
  reg.bind(fig2, "--n-cutoffs", "n_cutoffs", c.n_cutoffs, "comma-separated N_C series");
  reg.bind(fig2, "--e0", "e0", c.e0, "measured energy at which rates are evaluated, units of omega");
  reg.bind(fig2, "--inset", "inset", c.inset, "perfect-measurement rates versus E instead (fig2_inset.csv)");
  reg.bind(fig2, "--inset-values", "inset_values", c.inset_values, "measured energies for --inset, units of omega");
  commands.push_back({fig2, cmd_fig2, {}});

  auto* fig3 = app.add_subcommand("fig3", "driven energy transfer versus k (fig3_energy_transfer.csv) or --inset");
  add_common(reg, fig3, c);
  reg.bind(fig3, "--dt", "dt", c.dt, "time step, units of 1/omega");
  reg.bind(fig3, "--periods", "periods", c.periods, "horizon in Rabi periods pi/lambda");
  reg.bind(fig3, "--trajectories", "trajectories", c.trajectories, "ensemble size M per sweep point");
  reg.bind(fig3, "--k-min", "k_min", c.k_min, "smallest k, units of omega^2");
  reg.bind(fig3, "--k-max", "k_max", c.k_max, "largest k, units of omega^2");
  reg.bind(fig3, "--points-per-decade", "points_per_decade", c.points_per_decade, "log-grid density in k");
  reg.bind(fig3, "--e0", "e0", c.e0, "initial measured energy for the k sweep, units of omega");
  reg.bind(fig3, "--inset", "inset", c.inset, "sweep initial energy at k=0 instead (fig3_inset.csv)");
  reg.bind(fig3, "--inset-values", "inset_values", c.inset_values, "initial energies for --inset, units of omega");
  commands.push_back({fig3, cmd_fig3, {{"trajectories", [&c] { c.trajectories = 10000; }},
                                       {"points_per_decade", [&c] { c.points_per_decade = 3; }}}});

  auto* fig4 = app.add_subcommand("fig4", "steady-state power versus k with loss enabled (fig4_steady_state.csv)");
  add_common(reg, fig4, c);
  reg.bind(fig4, "--dt", "dt", c.dt, "time step, units of 1/omega");
  reg.bind(fig4, "--trajectories", "trajectories", c.trajectories, "ensemble size M per sweep point");
  reg.bind(fig4, "--k-values", "k_values", c.k_values, "comma-separated k values, units of omega^2");
  reg.bind(fig4, "--window-periods", "window_periods", c.window_periods, "stationarity window, Rabi periods");
  reg.bind(fig4, "--max-windows", "max_windows", c.max_windows, "burn-in windows tried before giving up");
  reg.bind(fig4, "--e0", "e0", c.e0, "initial measured energy, units of omega");
  commands.push_back({fig4, cmd_fig4, {{"trajectories", [&c] { c.trajectories = 2000; }},
                                       {"gamma_loss", [&c] { c.model.gamma_loss = 0.0005; }}}});

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
      out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
      return 0;
    } catch (const CLI::CallForAllHelp&) {
      out << app.help("", CLI::AppFormatMode::All);
      return 0;
    } catch (const CLI::ParseError& e) {
      throw UsageError(e.what());
    }

    for (auto& cmd : commands) {
      if (!cmd.app->parsed()) continue;
      std::set<std::string> from_file;
      if (!c.config_path.empty()) from_file = reg.apply(load_config(c.config_path));
      for (auto& [key, set_default] : cmd.defaults) {
        if (!reg.given_on_command_line(key) && from_file.count(key) == 0) set_default();
      }
      c.model.validate();
      return cmd.handler(c, out);
    }
    throw UsageError("no subcommand given");
  } catch (const UsageError& e) {
    err << "error_code=usage " << e.what() << '\n';
    return 1;
  } catch (const DomainError& e) {
    err << "error_code=domain " << e.what() << '\n';
    return 2;
  } catch (const RefusalError& e) {
    err << "error_code=refused " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error_code=runtime " << e.what() << '\n';
    return 2;
  }
}

}  // namespace hcal::cli
