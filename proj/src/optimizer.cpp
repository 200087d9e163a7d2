#include "weldopt/optimizer.hpp"

#include <algorithm>

namespace weldopt {

void OptimizerConfig::validate() const {
  if (!(sigma > 0.0 && sigma < 1.0)) throw ConfigError("sigma must lie in (0, 1)");
  if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0)) {
    throw ConfigError("backtrack factor must lie in (0, 1)");
  }
  if (!(initial_step > 0.0) || !(min_step > 0.0)) throw ConfigError("step sizes must be positive");
  if (tol_grad < 0.0 || tol_control < 0.0 || tol_descent_rate < 0.0) {
    throw ConfigError("tolerances must be nonnegative");
  }
  if (max_iterations < 0) throw ConfigError("max_iterations must be nonnegative");
}

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::None: return "none";
    case StopReason::Gradient: return "gradient";
    case StopReason::ControlChange: return "control";
    case StopReason::DescentRate: return "descent_rate";
    case StopReason::MaxIterations: return "max_iterations";
    case StopReason::Stagnation: return "stagnation";
  }
  return "unknown";
}

std::vector<double> project_box(std::vector<double> u) {
  for (double& x : u) x = std::clamp(x, 0.0, 1.0);
  return u;
}

std::vector<double> project_tangent_cone(const std::vector<double>& g, const std::vector<double>& u) {
  if (g.size() != u.size()) throw InvalidInput("gradient and control lengths differ");
  std::vector<double> out(g.size());
  for (std::size_t n = 0; n < g.size(); ++n) {
    if (!(u[n] >= 0.0 && u[n] <= 1.0)) throw InvalidInput("control outside [0, 1]");
    if (u[n] == 0.0) {
      out[n] = g[n] <= 0.0 ? g[n] : 0.0;
    } else if (u[n] == 1.0) {
      out[n] = g[n] >= 0.0 ? g[n] : 0.0;
    } else {
      out[n] = g[n];
    }
  }
  return out;
}

}  // namespace weldopt
