// Command-line driver for forward runs, optimizations, the power x time
// sweep and the p-continuation study.

#include <omp.h>

#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "weldopt/config.hpp"
#include "weldopt/errors.hpp"
#include "weldopt/experiment.hpp"

using namespace weldopt;

namespace {

struct Overrides {
  std::string config;
  std::string out;
  std::string preset;
  double pmax = 0.0;
  double final_time_ms = 0.0;
  std::vector<double> p;
  int threads = 0;
  bool quiet = false;
};

void add_common(CLI::App* cmd, Overrides& o, bool with_p = true) {
  cmd->add_option("--config", o.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out, "output directory (overrides output_dir)");
  cmd->add_option("--preset", o.preset, "initial pulse: conventional | rampdown | zero | file");
  cmd->add_option("--pmax", o.pmax, "maximal laser power in W");
  cmd->add_option("--T", o.final_time_ms, "final time in ms (the time step is kept)");
  if (with_p) cmd->add_option("--p", o.p, "p-norm exponent (a list for pcontinue)");
  cmd->add_option("--threads", o.threads, "OpenMP threads (0: runtime default)");
  cmd->add_flag("--quiet", o.quiet, "no progress output");
}

ExperimentConfig resolve_config(const Overrides& o) {
  ExperimentConfig c = load_config(o.config);
  if (!o.out.empty()) c.output_dir = o.out;
  if (!o.preset.empty()) c.pulse.kind = parse_pulse_kind(o.preset);
  if (o.pmax > 0.0 || o.final_time_ms > 0.0) {
    const double pmax = o.pmax > 0.0 ? o.pmax : c.simulation.max_power;
    const double t = o.final_time_ms > 0.0 ? o.final_time_ms * 1e-3 : c.simulation.final_time;
    c = c.with_horizon(pmax, t);
  }
  if (o.p.size() == 1) c.objective.p = o.p.front();
  c.validate();
  if (o.threads > 0) omp_set_num_threads(o.threads);
  return c;
}

void print_report(const std::string& label, const ObjectiveReport& r) {
  std::cout << label << ": depth " << r.welding_depth * 1e3 << " mm"
            << "  J_penetration " << r.penetration << "  J_velocity " << r.velocity
            << "  J_completeness " << r.completeness << "  J_control " << r.control
            << "  J_total " << r.total << "  theta_max(target) " << r.theta_max_at_target << " K\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal laser pulse shapes for spot welding (axisymmetric heat model)"};
  app.require_subcommand(1);

  Overrides o;
  std::vector<int> dump_steps;

  auto* material = app.add_subcommand("material", "material coefficient utilities");
  auto* dump = material->add_subcommand("dump", "write theta, s, kappa_rad, kappa_ax at 1 K steps");
  material->require_subcommand(1);
  std::string material_file, dump_out;
  int from = 250, to = 1500;
  auto* mat_cfg = dump->add_option("--config", o.config, "experiment config (JSON)")->check(CLI::ExistingFile);
  dump->add_option("--material", material_file, "material file (JSON)")
      ->check(CLI::ExistingFile)
      ->excludes(mat_cfg);
  dump->add_option("--out", dump_out, "CSV file (stdout when omitted)");
  dump->add_option("--from", from, "first temperature in K");
  dump->add_option("--to", to, "last temperature in K");

  auto* simulate = app.add_subcommand("simulate", "forward run of the configured pulse");
  add_common(simulate, o);
  simulate->add_option("--trajectory-steps", dump_steps,
                       "also write trajectory.csv for these time steps");

  auto* optimize = app.add_subcommand("optimize", "projected gradient descent from the configured pulse");
  add_common(optimize, o);

  auto* sweep = app.add_subcommand("sweep", "zero-guess optimizations over the power x time grid");
  add_common(sweep, o);

  auto* pcontinue = app.add_subcommand("pcontinue", "warm-started optimizations over increasing p");
  add_common(pcontinue, o);

  CLI11_PARSE(app, argc, argv);

  const auto start = std::chrono::steady_clock::now();
  auto log = [&](const std::string& line) {
    if (o.quiet) return;
    const double t = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cerr << "[" << std::fixed << std::setprecision(1) << t << " s] " << line << std::endl;
    std::cerr.unsetf(std::ios::fixed);
  };

  try {
    if (dump->parsed()) {
      MaterialConfig m;
      if (!material_file.empty()) {
        m = load_material(material_file);
      } else if (!o.config.empty()) {
        m = load_config(o.config).material;
      } else {
        m = MaterialConfig::aluminium_6082();
      }
      const MaterialModel model(m);
      if (dump_out.empty()) {
        write_material_csv(std::cout, model, from, to);
      } else {
        std::ofstream out(dump_out);
        if (!out) throw ConfigError("cannot write " + dump_out);
        write_material_csv(out, model, from, to);
      }
      return 0;
    }

    ExperimentConfig config = resolve_config(o);
    if (simulate->parsed()) {
      SimulationResult r = run_simulate(config);
      if (!dump_steps.empty()) {
        HeatModel model = make_model(config);
        const Trajectory traj = model.solve_forward(r.control);
        write_trajectory_csv(config.output_dir / "trajectory.csv", model.mesh(), traj, dump_steps);
      }
      print_report(to_string(config.pulse.kind), r.report);
      return 0;
    }
    if (optimize->parsed()) {
      OptimizationResult r = run_optimize(config, initial_control(config), true, log);
      print_report("initial", r.initial_report);
      print_report("optimized", r.report);
      std::cout << "stopped by " << to_string(r.trace.reason) << " after "
                << r.trace.records.size() << " iterations\n";
      return 0;
    }
    if (sweep->parsed()) {
      const auto cells = run_sweep(config, true, log);
      int failed = 0;
      for (const auto& cell : cells) {
        std::ostringstream label;
        label << "P=" << cell.max_power << " W, T=" << cell.final_time * 1e3 << " ms";
        if (cell.result) {
          print_report(label.str(), cell.result->report);
        } else {
          std::cout << label.str() << ": failed: " << cell.error << "\n";
          ++failed;
        }
      }
      return failed == 0 ? 0 : 2;
    }
    if (pcontinue->parsed()) {
      if (!o.p.empty()) config.p_values = o.p;
      config.validate();
      const auto steps = run_p_continuation(config, initial_control(config), true, log);
      for (const auto& s : steps) {
        std::cout << "p=" << s.p << ": theta_max(target) " << s.result.report.theta_max_at_target
                  << " K, J_total " << s.result.report.total << "\n";
      }
      return 0;
    }
  } catch (const ConfigError& err) {
    std::cerr << "configuration error: " << err.what() << "\n";
    return 3;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
