#include "weldopt/experiment.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "weldopt/errors.hpp"

namespace weldopt {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << std::setprecision(17);
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
}

std::string cell_name(double power, double final_time) {
  std::ostringstream ss;
  ss << "P" << std::lround(power) << "_T" << std::lround(final_time * 1e3) << "ms";
  return ss.str();
}

std::vector<double> probe_of(const Trajectory& traj, const Mesh& mesh) {
  std::vector<double> probe;
  probe.reserve(traj.states.size());
  for (const auto& s : traj.states) probe.push_back(s[mesh.target_node]);
  return probe;
}

}  // namespace

Control make_pulse(const PulsePreset& preset, const SimulationParams& params) {
  preset.validate(params.final_time);
  Control c;
  c.time_step = params.time_step();
  c.values.assign(static_cast<std::size_t>(params.steps), 0.0);
  if (preset.kind == PulsePreset::Kind::Zero) return c;
  if (preset.kind == PulsePreset::Kind::File) return read_control_csv(preset.file, c.time_step);
  // left-endpoint sampling u_n = u(n tau); the slack keeps n tau = hold
  // exactly on the switched-off side despite rounding in n * tau
  const double slack = 1e-9 * c.time_step;
  for (std::size_t n = 0; n < c.size(); ++n) {
    const double t = static_cast<double>(n) * c.time_step;
    if (t < preset.hold_duration - slack) {
      c.values[n] = preset.hold_fraction;
    } else if (preset.kind == PulsePreset::Kind::Rampdown && preset.ramp_duration > 0.0 &&
               t < preset.hold_duration + preset.ramp_duration - slack) {
      c.values[n] = preset.hold_fraction * (1.0 - (t - preset.hold_duration) / preset.ramp_duration);
    }
  }
  return c;
}

HeatModel make_model(const ExperimentConfig& config) {
  config.validate();
  return HeatModel(build_mesh(config.domain, config.objective.z_target),
                   MaterialModel(config.material), config.simulation,
                   config.parallel ? Exec::Parallel : Exec::Serial);
}

Control initial_control(const ExperimentConfig& config) {
  Control c = make_pulse(config.pulse, config.simulation);
  if (c.size() != static_cast<std::size_t>(config.simulation.steps)) {
    throw ConfigError("control file length does not match the number of time steps");
  }
  if (!c.feasible()) throw ConfigError("initial control leaves [0, 1]");
  return c;
}

SimulationResult run_simulate(const ExperimentConfig& config, bool write_files) {
  HeatModel model = make_model(config);
  SimulationResult r;
  r.control = initial_control(config);
  const Trajectory traj = model.solve_forward(r.control);
  r.report = evaluate(r.control, traj, config.objective, model);
  r.probe = probe_of(traj, model.mesh());
  if (write_files) {
    const auto& dir = config.output_dir;
    write_text(dir / "config.json", dump_config(config));
    write_report_csv(dir / "report.csv", {{to_string(config.pulse.kind), r.report}});
    write_control_csv(dir / "control.csv", r.control);
    write_probe_csv(dir / "probe.csv", r.probe, r.control.time_step);
  }
  return r;
}

OptimizationResult run_optimize(const ExperimentConfig& config, const Control& initial,
                                bool write_files, const ProgressSink& progress) {
  HeatModel model = make_model(config);
  WeldingProblem problem(model, config.objective);
  auto on_iteration = [&](const IterationRecord& rec) {
    if (!progress) return;
    std::ostringstream ss;
    ss << "iter " << rec.iteration << " J=" << rec.report.total << " |P g|=" << rec.projected_gradient
       << " step=" << rec.step << (rec.stop != StopReason::None ? " stop=" : "")
       << (rec.stop != StopReason::None ? to_string(rec.stop) : "");
    progress(ss.str());
  };
  DescentResult d = descend(problem, initial, config.optimizer, on_iteration);

  OptimizationResult r;
  r.initial = initial;
  r.initial_report = d.trace.records.empty() ? d.best.report : d.trace.records.front().report;
  r.optimized = d.best.control;
  r.report = d.best.report;
  r.trace = std::move(d.trace);
  if (write_files) {
    const auto& dir = config.output_dir;
    write_text(dir / "config.json", dump_config(config));
    write_control_csv(dir / "initial_control.csv", r.initial);
    write_control_csv(dir / "control.csv", r.optimized);
    write_trace_csv(dir / "trace.csv", r.trace);
    write_report_csv(dir / "report.csv",
                     {{"initial", r.initial_report}, {"optimized", r.report}});
    write_probe_csv(dir / "probe.csv", probe_of(d.best.trajectory, model.mesh()),
                    r.optimized.time_step);
  }
  return r;
}

std::vector<SweepCell> run_sweep(const ExperimentConfig& config, bool write_files,
                                 const ProgressSink& progress) {
  if (config.sweep_powers.empty() || config.sweep_times.empty()) {
    throw ConfigError("sweep lists must be nonempty");
  }
  std::vector<SweepCell> cells;
  for (double power : config.sweep_powers) {
    for (double final_time : config.sweep_times) {
      SweepCell cell;
      cell.max_power = power;
      cell.final_time = final_time;
      const std::string name = cell_name(power, final_time);
      if (progress) progress("cell " + name);
      try {
        ExperimentConfig c = config.with_horizon(power, final_time);
        c.pulse.kind = PulsePreset::Kind::Zero;
        c.output_dir = config.output_dir / name;
        cell.result = run_optimize(c, initial_control(c), write_files, progress);
      } catch (const std::exception& err) {
        cell.error = err.what();
        if (progress) progress("cell " + name + " failed: " + cell.error);
      }
      cells.push_back(std::move(cell));
    }
  }
  if (write_files) {
    write_text(config.output_dir / "config.json", dump_config(config));
    auto out = open_out(config.output_dir / "sweep.csv");
    out << "max_power_W,final_time_s,welding_depth_m,J_penetration,J_velocity,J_completeness,"
           "J_control,J_total,iterations,stop,error\n";
    for (const auto& cell : cells) {
      out << cell.max_power << ',' << cell.final_time << ',';
      if (cell.result) {
        const auto& r = cell.result->report;
        out << r.welding_depth << ',' << r.penetration << ',' << r.velocity << ','
            << r.completeness << ',' << r.control << ',' << r.total << ','
            << cell.result->trace.records.size() << ',' << to_string(cell.result->trace.reason)
            << ",\n";
      } else {
        out << ",,,,,,,,\"" << cell.error << "\"\n";
      }
    }
  }
  return cells;
}

std::vector<ContinuationStep> run_p_continuation(const ExperimentConfig& config,
                                                 const Control& initial, bool write_files,
                                                 const ProgressSink& progress) {
  if (config.p_values.empty()) throw ConfigError("p list must be nonempty");
  std::vector<ContinuationStep> steps;
  Control guess = initial;
  for (double p : config.p_values) {
    ExperimentConfig c = config;
    c.objective.p = p;
    std::ostringstream name;
    name << "p" << p;
    c.output_dir = config.output_dir / name.str();
    if (progress) progress("p = " + name.str().substr(1));
    ContinuationStep step{p, run_optimize(c, guess, write_files, progress)};
    guess = step.result.optimized;
    steps.push_back(std::move(step));
  }
  if (write_files) {
    write_text(config.output_dir / "config.json", dump_config(config));
    auto out = open_out(config.output_dir / "pcontinue.csv");
    out << "p,theta_max_target_K,lp_norm_K,welding_depth_m,J_penetration,J_velocity,"
           "J_completeness,J_control,J_total\n";
    for (const auto& s : steps) {
      const auto& r = s.result.report;
      out << s.p << ',' << r.theta_max_at_target << ',' << r.lp_norm << ',' << r.welding_depth
          << ',' << r.penetration << ',' << r.velocity << ',' << r.completeness << ','
          << r.control << ',' << r.total << '\n';
    }
  }
  return steps;
}

void write_control_csv(const std::filesystem::path& path, const Control& control) {
  auto out = open_out(path);
  out << "time_s,power_fraction\n";
  for (std::size_t n = 0; n < control.size(); ++n) {
    out << static_cast<double>(n) * control.time_step << ',' << control.values[n] << '\n';
  }
}

Control read_control_csv(const std::filesystem::path& path, double time_step) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open control file " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("time_s,power_fraction", 0) != 0) {
    throw ConfigError(path.string() + ": expected header time_s,power_fraction");
  }
  Control c;
  c.time_step = time_step;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ConfigError(path.string() + ": malformed row " + std::to_string(row));
    try {
      const double t = std::stod(line.substr(0, comma));
      const double u = std::stod(line.substr(comma + 1));
      const double expected = static_cast<double>(c.size()) * time_step;
      if (std::abs(t - expected) > 1e-6 * time_step + 1e-12) {
        throw ConfigError(path.string() + ": row " + std::to_string(row) +
                          " does not match the time grid");
      }
      c.values.push_back(u);
    } catch (const std::logic_error&) {
      throw ConfigError(path.string() + ": malformed number in row " + std::to_string(row));
    }
  }
  return c;
}

void write_report_csv(const std::filesystem::path& path, const std::vector<ReportRow>& rows) {
  auto out = open_out(path);
  out << "label,welding_depth_m,J_penetration,J_velocity,J_completeness,J_control,J_total\n";
  for (const auto& row : rows) {
    const auto& r = row.report;
    out << row.label << ',' << r.welding_depth << ',' << r.penetration << ',' << r.velocity << ','
        << r.completeness << ',' << r.control << ',' << r.total << '\n';
  }
}

void write_trace_csv(const std::filesystem::path& path, const DescentTrace& trace) {
  auto out = open_out(path);
  out << "iteration,J_penetration,J_velocity,J_completeness,J_control,J_total,step,"
         "projected_gradient_norm,control_change,J_after,trials,stop\n";
  for (const auto& rec : trace.records) {
    const auto& r = rec.report;
    out << rec.iteration << ',' << r.penetration << ',' << r.velocity << ',' << r.completeness << ','
        << r.control << ',' << r.total << ',' << rec.step << ',' << rec.projected_gradient << ','
        << rec.control_change << ',' << rec.total_after << ',' << rec.trials << ','
        << to_string(rec.stop) << '\n';
  }
}

void write_probe_csv(const std::filesystem::path& path, const std::vector<double>& probe,
                     double time_step) {
  auto out = open_out(path);
  out << "time_s,theta_target_K\n";
  for (std::size_t n = 0; n < probe.size(); ++n) {
    out << static_cast<double>(n) * time_step << ',' << probe[n] << '\n';
  }
}

void write_trajectory_csv(const std::filesystem::path& path, const Mesh& mesh,
                          const Trajectory& traj, const std::vector<int>& steps) {
  std::vector<int> which = steps;
  if (which.empty()) {
    for (int n = 0; n <= traj.steps(); ++n) which.push_back(n);
  }
  auto out = open_out(path);
  out << "step,time_s,node,r_m,z_m,theta_K\n";
  for (int n : which) {
    if (n < 0 || n > traj.steps()) throw InvalidInput("trajectory step out of range");
    const Vector& s = traj.states[static_cast<std::size_t>(n)];
    for (std::size_t k = 0; k < mesh.num_nodes(); ++k) {
      out << n << ',' << n * traj.time_step << ',' << k << ',' << mesh.nodes[k].r << ','
          << mesh.nodes[k].z << ',' << s[static_cast<Eigen::Index>(k)] << '\n';
    }
  }
}

void write_material_csv(std::ostream& out, const MaterialModel& material, int from, int to) {
  out << "theta_K,s_J_m3K,kappa_rad_W_mK,kappa_ax_W_mK\n";
  out << std::setprecision(10);
  for (int t = from; t <= to; ++t) {
    const double theta = t;
    out << t << ',' << material.heat_capacity()(theta) << ','
        << material.conductivity_radial()(theta) << ',' << material.conductivity_axial()(theta)
        << '\n';
  }
}

}  // namespace weldopt
