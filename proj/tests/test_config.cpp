#include <filesystem>
#include <fstream>
#include <sstream>

#include "support.hpp"
#include "weldopt/config.hpp"
#include "weldopt/errors.hpp"
#include "weldopt/experiment.hpp"

using namespace weldopt;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  const fs::path d = fs::temp_directory_path() / "weldopt_unit";
  fs::create_directories(d);
  return d;
}

std::string read_all(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("scaled and SI keys agree") {
  const ExperimentConfig mm = parse_config(R"({
    "domain": {"radius_mm": 2.5, "height_mm": 0.5, "beam_radius_mm": 0.2},
    "simulation": {"final_time_ms": 15, "time_step_ms": 0.1},
    "objective": {"z_target_mm": 0.375}})");
  const ExperimentConfig si = parse_config(R"({
    "domain": {"radius_m": 2.5e-3, "height_m": 0.5e-3, "beam_radius_m": 0.2e-3},
    "simulation": {"final_time_s": 0.015, "steps": 150},
    "objective": {"z_target_m": 0.375e-3}})");
  CHECK(mm.domain.radius == doctest::Approx(si.domain.radius).epsilon(1e-15));
  CHECK(mm.domain.beam_radius == doctest::Approx(si.domain.beam_radius).epsilon(1e-15));
  CHECK(mm.simulation.final_time == doctest::Approx(si.simulation.final_time).epsilon(1e-15));
  CHECK(mm.simulation.steps == 150);
  CHECK(mm.objective.z_target == doctest::Approx(si.objective.z_target).epsilon(1e-15));
  CHECK(mm.time_step() == doctest::Approx(1e-4).epsilon(1e-12));
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_config(R"({"domian": {}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"domain": {"radius_mm": 2.5, "radius_m": 0.0025}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"simulation": {"steps": 10, "time_step_ms": 0.1}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"pulse": {"kind": "sawtooth"}})"), ConfigError);
  CHECK_THROWS_AS(parse_config("{ not json"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"domain": {"nr": "many"}})"), ConfigError);
  ExperimentConfig c = parse_config(R"({"p_continuation": [20, 10]})");
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = parse_config(R"({"pulse": {"kind": "conventional", "hold_ms": 13}})");
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/weldopt.json"), ConfigError);
  CHECK_THROWS_AS(default_config().with_horizon(2000.0, 12.05e-3), ConfigError);
}

TEST_CASE("dump and parse round-trip exactly") {
  ExperimentConfig c = default_config();
  c.simulation.max_power = 1837.25;
  c.objective.p = 37.0;
  c.objective.v_max = 0.1 + 0.2;  // not representable in short decimal form
  c.domain.nr = 25;
  c.domain.nz = 8;
  c.pulse.kind = PulsePreset::Kind::Rampdown;
  c.sweep_times = {12e-3};
  c.material.phase.latent_heat *= 1.0 + 1e-15;
  const std::string once = dump_config(c);
  const ExperimentConfig back = parse_config(once);
  CHECK(dump_config(back) == once);
  CHECK(back.objective.v_max == c.objective.v_max);
  CHECK(back.material.phase.latent_heat == c.material.phase.latent_heat);
  CHECK(back.sweep_times == c.sweep_times);
  CHECK(back.pulse.kind == PulsePreset::Kind::Rampdown);

  const std::string m = dump_material(c.material);
  CHECK(dump_material(parse_material(m)) == m);
}

TEST_CASE("shipped configs load") {
  const fs::path dir = fs::path(WELDOPT_SOURCE_DIR) / "configs";
  const ExperimentConfig d = load_config(dir / "default.json");
  CHECK(d.simulation.steps == 120);
  CHECK(d.domain.nr == 50);
  CHECK(d.domain.nz == 80);
  CHECK(d.material.absorptivity == MaterialConfig::aluminium_6082().absorptivity);
  const ExperimentConfig s = load_config(dir / "smoke.json");
  CHECK(s.simulation.steps == 40);
  CHECK(s.pulse.kind == PulsePreset::Kind::Rampdown);
  CHECK(s.sweep_times == std::vector<double>{12e-3});
  CHECK(load_material(dir / "aluminium_6082.json").phase.latent_heat ==
        MaterialConfig::aluminium_6082().phase.latent_heat);
}

TEST_CASE("preset pulses") {
  SimulationParams p;
  p.final_time = 12e-3;
  p.steps = 600;
  PulsePreset conv;
  const Control c = make_pulse(conv, p);
  REQUIRE(c.size() == 600);
  for (std::size_t n = 0; n < 600; ++n) CHECK(c.values[n] == (n < 250 ? 0.75 : 0.0));

  PulsePreset ramp;
  ramp.kind = PulsePreset::Kind::Rampdown;
  const Control r = make_pulse(ramp, p);
  CHECK(r.values[249] == 0.75);
  CHECK(r.values[250] == doctest::Approx(0.75));
  CHECK(r.values[375] == doctest::Approx(0.375));
  CHECK(r.values[499] == doctest::Approx(0.75 / 250));
  CHECK(r.values[500] == 0.0);

  PulsePreset zero;
  zero.kind = PulsePreset::Kind::Zero;
  for (double u : make_pulse(zero, p).values) CHECK(u == 0.0);

  PulsePreset too_long;
  too_long.hold_duration = 13e-3;
  CHECK_THROWS_AS(make_pulse(too_long, p), ConfigError);
}

TEST_CASE("control and report files") {
  const fs::path dir = scratch_dir();
  testing::Rng rng(4);
  const Control c{rng.vector(37, 0.0, 1.0), 2e-5};
  write_control_csv(dir / "u.csv", c);
  const Control back = read_control_csv(dir / "u.csv", 2e-5);
  REQUIRE(back.size() == 37);
  for (std::size_t n = 0; n < 37; ++n) CHECK(back.values[n] == doctest::Approx(c.values[n]).epsilon(1e-12));
  CHECK_THROWS_AS(read_control_csv(dir / "u.csv", 1e-4), ConfigError);
  CHECK_THROWS_AS(read_control_csv(dir / "missing.csv", 1e-4), ConfigError);

  // a file preset goes through the same reader
  ExperimentConfig cfg = default_config();
  cfg.simulation.final_time = 37 * 2e-5;
  cfg.simulation.steps = 37;
  cfg.pulse.kind = PulsePreset::Kind::File;
  cfg.pulse.file = dir / "u.csv";
  cfg.pulse.hold_duration = 0.0;
  CHECK(initial_control(cfg).size() == 37);
  cfg.simulation.steps = 38;
  cfg.simulation.final_time = 38 * 2e-5;
  CHECK_THROWS_AS(initial_control(cfg), ConfigError);

  ObjectiveReport rep;
  rep.penetration = 1.0;
  rep.total = 1.0;
  write_report_csv(dir / "r.csv", {{"case", rep}});
  const std::string text = read_all(dir / "r.csv");
  CHECK(text.rfind("label,welding_depth_m,J_penetration,J_velocity,J_completeness,J_control,J_total\n", 0) == 0);
  CHECK(text.find("case,0,1,0,0,0,1") != std::string::npos);
}

TEST_CASE("material table") {
  std::ostringstream out;
  write_material_csv(out, MaterialModel(MaterialConfig::aluminium_6082()), 295, 297);
  std::istringstream in(out.str());
  std::string line;
  int rows = 0;
  std::getline(in, line);
  CHECK(line == "theta_K,s_J_m3K,kappa_rad_W_mK,kappa_ax_W_mK");
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 3);
}
