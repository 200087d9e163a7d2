#pragma once

// Experiment configuration: everything a run needs, read from a JSON file.
// Keys carry their unit (radius_mm, final_time_ms, ...); values are
// converted to SI on load and back on save.

#include <filesystem>
#include <string>
#include <vector>

#include "weldopt/fem.hpp"
#include "weldopt/material.hpp"
#include "weldopt/mesh.hpp"
#include "weldopt/objective.hpp"
#include "weldopt/optimizer.hpp"

namespace weldopt {

struct PulsePreset {
  enum class Kind { Conventional, Rampdown, Zero, File };

  Kind kind = Kind::Conventional;
  double hold_fraction = 0.75;
  double hold_duration = 5e-3;  // s
  double ramp_duration = 5e-3;  // s
  std::filesystem::path file;   // control CSV for Kind::File

  void validate(double final_time) const;
};

PulsePreset::Kind parse_pulse_kind(const std::string& name);
std::string to_string(PulsePreset::Kind kind);

struct ExperimentConfig {
  DomainSpec domain;
  MaterialConfig material = MaterialConfig::aluminium_6082();
  SimulationParams simulation;
  ObjectiveWeights objective;
  OptimizerConfig optimizer;
  PulsePreset pulse;
  std::vector<double> sweep_powers = {1500.0, 1800.0, 2100.0};  // W
  std::vector<double> sweep_times = {10e-3, 15e-3, 20e-3};      // s
  std::vector<double> p_values = {20, 30, 40, 50, 60, 70, 80};
  std::filesystem::path output_dir = "out";
  bool parallel = true;

  // Cross-checks all parts; throws ConfigError.
  void validate() const;
  double time_step() const { return simulation.time_step(); }
  // Same time step, new final time and power limit.
  ExperimentConfig with_horizon(double max_power, double final_time) const;
};

ExperimentConfig default_config();

// Relative paths inside the file (material file, pulse file) resolve
// against the directory of the config file.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& json_text,
                              const std::filesystem::path& base_dir = {});
// Complete, self-contained description (material inlined).
std::string dump_config(const ExperimentConfig& config);

MaterialConfig load_material(const std::filesystem::path& path);
MaterialConfig parse_material(const std::string& json_text);
std::string dump_material(const MaterialConfig& material);

}  // namespace weldopt
