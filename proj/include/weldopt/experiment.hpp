#pragma once

// Experiment driver: preset pulses, forward runs, optimizations, the
// power x time sweep and the p-continuation study, with CSV artifacts.

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "weldopt/config.hpp"

namespace weldopt {

Control make_pulse(const PulsePreset& preset, const SimulationParams& params);

// Model on the configured mesh; exec follows config.parallel.
HeatModel make_model(const ExperimentConfig& config);

// Initial guess from config.pulse (reads the control file for Kind::File).
Control initial_control(const ExperimentConfig& config);

struct ReportRow {
  std::string label;
  ObjectiveReport report;
};

struct SimulationResult {
  Control control;
  ObjectiveReport report;
  std::vector<double> probe;  // theta at the target node, n = 0..N
};

struct OptimizationResult {
  Control initial;
  ObjectiveReport initial_report;
  Control optimized;
  ObjectiveReport report;
  DescentTrace trace;
};

struct SweepCell {
  double max_power = 0.0;   // W
  double final_time = 0.0;  // s
  std::optional<OptimizationResult> result;
  std::string error;  // set when the cell failed
};

struct ContinuationStep {
  double p = 0.0;
  OptimizationResult result;
};

using ProgressSink = std::function<void(const std::string&)>;

// Each run writes its artifacts below config.output_dir when write_files is
// set: report.csv, control.csv, probe.csv (simulate); additionally
// initial_control.csv and trace.csv (optimize); sweep.csv and per-cell
// subdirectories (sweep); pcontinue.csv (p-continuation). The effective
// configuration is written next to them as config.json.
SimulationResult run_simulate(const ExperimentConfig& config, bool write_files = true);
OptimizationResult run_optimize(const ExperimentConfig& config, const Control& initial,
                                bool write_files = true, const ProgressSink& progress = {});
std::vector<SweepCell> run_sweep(const ExperimentConfig& config, bool write_files = true,
                                 const ProgressSink& progress = {});
std::vector<ContinuationStep> run_p_continuation(const ExperimentConfig& config,
                                                 const Control& initial, bool write_files = true,
                                                 const ProgressSink& progress = {});

// ---- CSV formats ----
void write_control_csv(const std::filesystem::path& path, const Control& control);
Control read_control_csv(const std::filesystem::path& path, double time_step);
void write_report_csv(const std::filesystem::path& path, const std::vector<ReportRow>& rows);
void write_trace_csv(const std::filesystem::path& path, const DescentTrace& trace);
void write_probe_csv(const std::filesystem::path& path, const std::vector<double>& probe,
                     double time_step);
// node id, r, z, theta for each listed step (all steps when empty)
void write_trajectory_csv(const std::filesystem::path& path, const Mesh& mesh,
                          const Trajectory& traj, const std::vector<int>& steps);
// theta, s, kappa_rad, kappa_ax at 1 K resolution on [from, to]
void write_material_csv(std::ostream& out, const MaterialModel& material, int from, int to);

}  // namespace weldopt
