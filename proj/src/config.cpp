#include "weldopt/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "weldopt/errors.hpp"

namespace weldopt {

using nlohmann::json;

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& err) {
    throw ConfigError(what + ": " + err.what());
  }
}

// Reads one section, remembering which keys were consumed so that leftovers
// (typos, unsupported options) are reported instead of silently ignored.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ConfigError(name_ + " must be an object");
  }
  ~Section() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, value] : j_.items()) {
      if (!used_.count(key)) throw ConfigError("unknown key " + name_ + "." + key);
    }
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& raw(const std::string& key) {
    used_.insert(key);
    return j_.at(key);
  }

  template <class T>
  void get(const std::string& key, T& out) {
    if (!has(key)) return;
    try {
      out = raw(key).get<T>();
    } catch (const json::exception& err) {
      throw ConfigError(name_ + "." + key + ": " + err.what());
    }
  }

  // A quantity that may be given in SI (key_si) or a scaled unit (key_alt):
  // value_si = value_alt * factor.
  void get_scaled(const std::string& base, const std::string& si, const std::string& alt,
                  double factor, double& out) {
    const std::string k_si = base + "_" + si;
    const std::string k_alt = base + "_" + alt;
    if (has(k_si) && has(k_alt)) throw ConfigError(name_ + ": both " + k_si + " and " + k_alt);
    if (has(k_si)) get(k_si, out);
    if (has(k_alt)) {
      double v = 0.0;
      get(k_alt, v);
      out = v * factor;
    }
  }
  void length(const std::string& base, double& out) { get_scaled(base, "m", "mm", 1e-3, out); }
  void duration(const std::string& base, double& out) { get_scaled(base, "s", "ms", 1e-3, out); }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> used_;
};

std::vector<Sample> samples_from(const json& j, const std::string& what) {
  std::vector<Sample> out;
  if (!j.is_array()) throw ConfigError(what + " must be an array of [temperature, value] pairs");
  for (const auto& pair : j) {
    if (!pair.is_array() || pair.size() != 2) {
      throw ConfigError(what + " entries must be [temperature, value] pairs");
    }
    out.push_back({pair[0].get<double>(), pair[1].get<double>()});
  }
  return out;
}

json samples_to(const std::vector<Sample>& samples) {
  json arr = json::array();
  for (const auto& s : samples) arr.push_back({s.temperature, s.value});
  return arr;
}

void read_material(const json& j, MaterialConfig& m) {
  Section s(j, "material");
  if (s.has("heat_capacity_solid")) {
    m.heat_capacity_solid = samples_from(s.raw("heat_capacity_solid"), "heat_capacity_solid");
  }
  if (s.has("heat_capacity_liquid")) {
    m.heat_capacity_liquid = samples_from(s.raw("heat_capacity_liquid"), "heat_capacity_liquid");
  }
  if (s.has("conductivity_solid")) {
    m.conductivity_solid = samples_from(s.raw("conductivity_solid"), "conductivity_solid");
  }
  s.get("liquid_slope_radial", m.liquid_slope_radial);
  s.get("liquid_slope_axial", m.liquid_slope_axial);
  s.get("absorptivity", m.absorptivity);
  if (s.has("phase")) {
    Section p(s.raw("phase"), "material.phase");
    p.get("solidus_K", m.phase.solidus);
    p.get("liquidus_K", m.phase.liquidus);
    p.get("latent_heat_J_kg", m.phase.latent_heat);
    p.get("reference_density_kg_m3", m.phase.reference_density);
  }
}

json material_json(const MaterialConfig& m) {
  return {
      {"heat_capacity_solid", samples_to(m.heat_capacity_solid)},
      {"heat_capacity_liquid", samples_to(m.heat_capacity_liquid)},
      {"conductivity_solid", samples_to(m.conductivity_solid)},
      {"liquid_slope_radial", m.liquid_slope_radial},
      {"liquid_slope_axial", m.liquid_slope_axial},
      {"absorptivity", m.absorptivity},
      {"phase",
       {{"solidus_K", m.phase.solidus},
        {"liquidus_K", m.phase.liquidus},
        {"latent_heat_J_kg", m.phase.latent_heat},
        {"reference_density_kg_m3", m.phase.reference_density}}},
  };
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative() && !base.empty()) return base / path;
  return path;
}

}  // namespace

void PulsePreset::validate(double final_time) const {
  if (hold_duration < 0.0 || ramp_duration < 0.0) throw ConfigError("pulse durations must be nonnegative");
  if (!(hold_fraction >= 0.0 && hold_fraction <= 1.0)) {
    throw ConfigError("pulse hold fraction must lie in [0, 1]");
  }
  const double used = hold_duration + (kind == Kind::Rampdown ? ramp_duration : 0.0);
  if (kind != Kind::Zero && kind != Kind::File && used > final_time * (1.0 + 1e-12)) {
    throw ConfigError("pulse is longer than the final time");
  }
  if (kind == Kind::File && file.empty()) throw ConfigError("pulse kind 'file' needs a file");
}

PulsePreset::Kind parse_pulse_kind(const std::string& name) {
  if (name == "conventional") return PulsePreset::Kind::Conventional;
  if (name == "rampdown") return PulsePreset::Kind::Rampdown;
  if (name == "zero") return PulsePreset::Kind::Zero;
  if (name == "file") return PulsePreset::Kind::File;
  throw ConfigError("unknown pulse kind '" + name + "'");
}

std::string to_string(PulsePreset::Kind kind) {
  switch (kind) {
    case PulsePreset::Kind::Conventional: return "conventional";
    case PulsePreset::Kind::Rampdown: return "rampdown";
    case PulsePreset::Kind::Zero: return "zero";
    case PulsePreset::Kind::File: return "file";
  }
  return "unknown";
}

void ExperimentConfig::validate() const {
  domain.validate();
  simulation.validate();
  objective.validate();
  optimizer.validate();
  pulse.validate(simulation.final_time);
  if (!(objective.z_target >= 0.0 && objective.z_target <= domain.height)) {
    throw ConfigError("z_target lies outside the domain");
  }
  if (!(material.absorptivity > 0.0 && material.absorptivity <= 1.0)) {
    throw ConfigError("absorptivity must lie in (0, 1]");
  }
  for (double p : sweep_powers) {
    if (!(p > 0.0)) throw ConfigError("sweep powers must be positive");
  }
  for (double t : sweep_times) {
    if (!(t > 0.0)) throw ConfigError("sweep times must be positive");
  }
  for (std::size_t i = 0; i < p_values.size(); ++i) {
    if (!(p_values[i] >= 2.0)) throw ConfigError("p values must be at least 2");
    if (i > 0 && !(p_values[i] > p_values[i - 1])) throw ConfigError("p values must ascend");
  }
}

ExperimentConfig ExperimentConfig::with_horizon(double max_power, double final_time) const {
  ExperimentConfig c = *this;
  const double tau = time_step();
  const double steps = final_time / tau;
  if (std::abs(steps - std::round(steps)) > 1e-6 * steps) {
    throw ConfigError("final time is not a multiple of the time step");
  }
  c.simulation.steps = static_cast<int>(std::lround(steps));
  c.simulation.final_time = final_time;
  c.simulation.max_power = max_power;
  return c;
}

ExperimentConfig default_config() { return ExperimentConfig{}; }

MaterialConfig parse_material(const std::string& json_text) {
  MaterialConfig m = MaterialConfig::aluminium_6082();
  read_material(parse_json(json_text, "material file"), m);
  return m;
}

MaterialConfig load_material(const std::filesystem::path& path) {
  return parse_material(read_file(path));
}

std::string dump_material(const MaterialConfig& material) {
  return material_json(material).dump(2) + "\n";
}

ExperimentConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir) {
  ExperimentConfig c;
  const json root = parse_json(json_text, "config");
  Section s(root, "config");

  if (s.has("domain")) {
    Section d(s.raw("domain"), "domain");
    d.length("radius", c.domain.radius);
    d.length("height", c.domain.height);
    d.length("beam_radius", c.domain.beam_radius);
    d.get("nr", c.domain.nr);
    d.get("nz", c.domain.nz);
  }
  if (s.has("material")) {
    const json& m = s.raw("material");
    if (m.is_string()) {
      c.material = load_material(resolve(base_dir, m.get<std::string>()));
    } else {
      read_material(m, c.material);
    }
  }
  if (s.has("simulation")) {
    Section p(s.raw("simulation"), "simulation");
    p.get("ambient_K", c.simulation.ambient);
    p.get("convection_W_m2K", c.simulation.convection);
    p.get("radiation_W_m2K4", c.simulation.radiation);
    p.get("max_power_W", c.simulation.max_power);
    p.duration("final_time", c.simulation.final_time);
    p.get("steps", c.simulation.steps);
    if (p.has("time_step_s") || p.has("time_step_ms")) {
      double tau = 0.0;
      p.duration("time_step", tau);
      if (p.has("steps")) throw ConfigError("give either simulation.steps or a time step, not both");
      if (!(tau > 0.0)) throw ConfigError("time step must be positive");
      c.simulation.steps = static_cast<int>(std::lround(c.simulation.final_time / tau));
    }
    p.get("implicitness", c.simulation.implicitness);
    p.get("cooling_on_bottom", c.simulation.cooling_on_bottom);
    p.get("newton_tolerance_K", c.simulation.newton_tolerance);
    p.get("newton_max_iterations", c.simulation.newton_max_iterations);
  }
  if (s.has("objective")) {
    Section o(s.raw("objective"), "objective");
    o.get("beta_penetration", c.objective.penetration);
    o.get("beta_velocity", c.objective.velocity);
    o.get("beta_completeness", c.objective.completeness);
    o.get("beta_control", c.objective.control);
    o.get("p", c.objective.p);
    o.length("z_target", c.objective.z_target);
    o.get("theta_target_K", c.objective.theta_target);
    o.get("v_max_m_s", c.objective.v_max);
    o.get("eps_grad_K_m", c.objective.eps_grad);
  }
  if (s.has("optimizer")) {
    Section o(s.raw("optimizer"), "optimizer");
    o.get("sigma", c.optimizer.sigma);
    o.get("initial_step", c.optimizer.initial_step);
    o.get("backtrack_factor", c.optimizer.backtrack_factor);
    o.get("min_step", c.optimizer.min_step);
    o.get("warm_start", c.optimizer.warm_start);
    o.get("tol_grad", c.optimizer.tol_grad);
    o.get("tol_control", c.optimizer.tol_control);
    o.get("tol_descent_rate", c.optimizer.tol_descent_rate);
    o.get("max_iterations", c.optimizer.max_iterations);
  }
  if (s.has("pulse")) {
    Section p(s.raw("pulse"), "pulse");
    if (p.has("kind")) c.pulse.kind = parse_pulse_kind(p.raw("kind").get<std::string>());
    p.get("hold_fraction", c.pulse.hold_fraction);
    p.duration("hold", c.pulse.hold_duration);
    p.duration("ramp", c.pulse.ramp_duration);
    if (p.has("file")) c.pulse.file = resolve(base_dir, p.raw("file").get<std::string>());
  }
  if (s.has("sweep")) {
    Section w(s.raw("sweep"), "sweep");
    w.get("powers_W", c.sweep_powers);
    if (w.has("times_s") && w.has("times_ms")) throw ConfigError("sweep: both times_s and times_ms");
    w.get("times_s", c.sweep_times);
    if (w.has("times_ms")) {
      w.get("times_ms", c.sweep_times);
      for (double& t : c.sweep_times) t *= 1e-3;
    }
  }
  s.get("p_continuation", c.p_values);
  if (s.has("output_dir")) c.output_dir = resolve(base_dir, s.raw("output_dir").get<std::string>());
  s.get("parallel", c.parallel);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  ExperimentConfig c = parse_config(read_file(path), path.parent_path());
  c.validate();
  return c;
}

std::string dump_config(const ExperimentConfig& c) {
  json root = {
      {"domain",
       {{"radius_m", c.domain.radius},
        {"height_m", c.domain.height},
        {"beam_radius_m", c.domain.beam_radius},
        {"nr", c.domain.nr},
        {"nz", c.domain.nz}}},
      {"material", material_json(c.material)},
      {"simulation",
       {{"ambient_K", c.simulation.ambient},
        {"convection_W_m2K", c.simulation.convection},
        {"radiation_W_m2K4", c.simulation.radiation},
        {"max_power_W", c.simulation.max_power},
        {"final_time_s", c.simulation.final_time},
        {"steps", c.simulation.steps},
        {"implicitness", c.simulation.implicitness},
        {"cooling_on_bottom", c.simulation.cooling_on_bottom},
        {"newton_tolerance_K", c.simulation.newton_tolerance},
        {"newton_max_iterations", c.simulation.newton_max_iterations}}},
      {"objective",
       {{"beta_penetration", c.objective.penetration},
        {"beta_velocity", c.objective.velocity},
        {"beta_completeness", c.objective.completeness},
        {"beta_control", c.objective.control},
        {"p", c.objective.p},
        {"z_target_m", c.objective.z_target},
        {"theta_target_K", c.objective.theta_target},
        {"v_max_m_s", c.objective.v_max},
        {"eps_grad_K_m", c.objective.eps_grad}}},
      {"optimizer",
       {{"sigma", c.optimizer.sigma},
        {"initial_step", c.optimizer.initial_step},
        {"backtrack_factor", c.optimizer.backtrack_factor},
        {"min_step", c.optimizer.min_step},
        {"warm_start", c.optimizer.warm_start},
        {"tol_grad", c.optimizer.tol_grad},
        {"tol_control", c.optimizer.tol_control},
        {"tol_descent_rate", c.optimizer.tol_descent_rate},
        {"max_iterations", c.optimizer.max_iterations}}},
      {"pulse",
       {{"kind", to_string(c.pulse.kind)},
        {"hold_fraction", c.pulse.hold_fraction},
        {"hold_s", c.pulse.hold_duration},
        {"ramp_s", c.pulse.ramp_duration}}},
      {"sweep", {{"powers_W", c.sweep_powers}, {"times_s", c.sweep_times}}},
      {"p_continuation", c.p_values},
      {"output_dir", std::filesystem::absolute(c.output_dir).string()},
      {"parallel", c.parallel},
  };
  if (c.pulse.kind == PulsePreset::Kind::File) {
    root["pulse"]["file"] = std::filesystem::absolute(c.pulse.file).string();
  }
  return root.dump(2) + "\n";
}

}  // namespace weldopt
