#include "weldopt/material.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "weldopt/errors.hpp"

namespace weldopt {

void PhaseConstants::validate() const {
  if (!(solidus < liquidus)) {
    throw InvalidData("solidus must lie below liquidus");
  }
  if (!(latent_heat > 0.0) || !(reference_density > 0.0)) {
    throw InvalidData("latent heat and reference density must be positive");
  }
}

CubicSpline::CubicSpline(std::vector<double> knots, std::vector<double> values,
                         std::vector<double> slopes)
    : knots_(std::move(knots)), values_(std::move(values)), slopes_(std::move(slopes)) {
  if (knots_.empty() || knots_.size() != values_.size() ||
      knots_.size() != slopes_.size()) {
    throw InvalidData("spline needs matching, nonempty knot/value/slope arrays");
  }
  for (std::size_t i = 0; i + 1 < knots_.size(); ++i) {
    if (!(knots_[i] < knots_[i + 1])) {
      throw InvalidData("spline knots must be strictly increasing");
    }
  }
  pieces_.reserve(knots_.size() - 1);
  for (std::size_t i = 0; i + 1 < knots_.size(); ++i) {
    const double h = knots_[i + 1] - knots_[i];
    const double y0 = values_[i], y1 = values_[i + 1];
    const double m0 = slopes_[i], m1 = slopes_[i + 1];
    const double secant = (y1 - y0) / h;
    pieces_.push_back({y0, m0, (3.0 * secant - 2.0 * m0 - m1) / h,
                       (m0 + m1 - 2.0 * secant) / (h * h)});
  }
}

CubicSpline CubicSpline::line(const LinearFit& fit, double anchor) {
  return CubicSpline({anchor}, {fit(anchor)}, {fit.slope});
}

std::pair<double, double> CubicSpline::evaluate(double theta) const noexcept {
  if (theta <= knots_.front()) {
    const double d = theta - knots_.front();
    return {values_.front() + slopes_.front() * d, slopes_.front()};
  }
  if (theta >= knots_.back()) {
    const double d = theta - knots_.back();
    return {values_.back() + slopes_.back() * d, slopes_.back()};
  }
  // knots_ has at least two entries here
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), theta);
  const auto i = static_cast<std::size_t>(it - knots_.begin()) - 1;
  const Piece& c = pieces_[i];
  const double d = theta - knots_[i];
  return {c.c0 + d * (c.c1 + d * (c.c2 + d * c.c3)),
          c.c1 + d * (2.0 * c.c2 + d * 3.0 * c.c3)};
}

double CubicSpline::operator()(double theta) const {
  if (std::isnan(theta)) throw InvalidInput("spline evaluated at NaN");
  return evaluate(theta).first;
}

double CubicSpline::derivative(double theta) const {
  if (std::isnan(theta)) throw InvalidInput("spline derivative evaluated at NaN");
  return evaluate(theta).second;
}

double CubicSpline::integral(double a, double b) const {
  if (std::isnan(a) || std::isnan(b)) throw InvalidInput("spline integrated over NaN bound");
  // antiderivative measured from the first knot
  auto primitive = [this](double x) {
    if (x <= knots_.front()) {
      const double d = x - knots_.front();
      return values_.front() * d + 0.5 * slopes_.front() * d * d;
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
      const Piece& c = pieces_[i];
      const double d = std::min(x, knots_[i + 1]) - knots_[i];
      acc += d * (c.c0 + d * (c.c1 / 2.0 + d * (c.c2 / 3.0 + d * c.c3 / 4.0)));
      if (x <= knots_[i + 1]) return acc;
    }
    const double d = x - knots_.back();
    return acc + values_.back() * d + 0.5 * slopes_.back() * d * d;
  };
  return primitive(b) - primitive(a);
}

LinearFit fit_linear_segment(std::span<const Sample> samples) {
  if (samples.size() < 2) {
    throw InvalidData("linear fit needs at least two samples");
  }
  double mean_t = 0.0, mean_v = 0.0;
  for (const auto& s : samples) {
    if (!std::isfinite(s.temperature) || !std::isfinite(s.value)) {
      throw InvalidData("non-finite sample in linear fit");
    }
    mean_t += s.temperature;
    mean_v += s.value;
  }
  const auto n = static_cast<double>(samples.size());
  mean_t /= n;
  mean_v /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& s : samples) {
    sxx += (s.temperature - mean_t) * (s.temperature - mean_t);
    sxy += (s.temperature - mean_t) * (s.value - mean_v);
  }
  if (!(sxx > 0.0)) {
    throw InvalidData("linear fit needs at least two distinct temperatures");
  }
  const double slope = sxy / sxx;
  return {slope, mean_v - slope * mean_t};
}

namespace {

void require_side(std::span<const Sample> samples, double bound, bool below,
                  const char* what) {
  for (const auto& s : samples) {
    if (below ? s.temperature > bound : s.temperature < bound) {
      throw InvalidData(std::string(what) + " sample at " +
                        std::to_string(s.temperature) + " K lies on the wrong side of the corridor");
    }
  }
}

void require_positive(const CubicSpline& spline, const char* name) {
  for (double t = MaterialModel::kCheckedMin; t <= MaterialModel::kCheckedMax; t += 1.0) {
    if (!(spline.evaluate(t).first > 0.0)) {
      throw InvalidModel(std::string(name) + " is not positive at " + std::to_string(t) + " K");
    }
  }
}

}  // namespace

CubicSpline latent_free_heat_capacity(std::span<const Sample> solid,
                                      std::span<const Sample> liquid,
                                      const PhaseConstants& phase) {
  phase.validate();
  require_side(solid, phase.solidus, true, "solid heat capacity");
  require_side(liquid, phase.liquidus, false, "liquid heat capacity");
  const LinearFit s = fit_linear_segment(solid);
  const LinearFit l = fit_linear_segment(liquid);
  return CubicSpline({phase.solidus, phase.liquidus}, {s(phase.solidus), l(phase.liquidus)},
                     {s.slope, l.slope});
}

CubicSpline build_heat_capacity(std::span<const Sample> solid,
                                std::span<const Sample> liquid,
                                const PhaseConstants& phase) {
  const CubicSpline base = latent_free_heat_capacity(solid, liquid, phase);
  const double width = phase.liquidus - phase.solidus;
  const double mid = 0.5 * (phase.solidus + phase.liquidus);
  // Each half of the bump is peak * smoothstep, integrating to peak * width / 4.
  const double peak = 2.0 * phase.volumetric_latent_heat() / width;
  const auto [base_mid, base_slope_mid] = base.evaluate(mid);
  const auto v = base.values();
  const auto m = base.slopes();
  return CubicSpline({phase.solidus, mid, phase.liquidus}, {v[0], base_mid + peak, v[1]},
                     {m[0], base_slope_mid, m[1]});
}

Conductivity build_conductivity(std::span<const Sample> solid,
                                const PhaseConstants& phase,
                                double liquid_slope_radial,
                                double liquid_slope_axial) {
  phase.validate();
  require_side(solid, phase.solidus, true, "solid conductivity");
  const LinearFit k = fit_linear_segment(solid);
  auto make = [&](double liquid_slope) {
    return CubicSpline({phase.solidus, phase.liquidus},
                       {k(phase.solidus), k(phase.liquidus)}, {k.slope, liquid_slope});
  };
  Conductivity out{make(liquid_slope_radial), make(liquid_slope_axial)};
  require_positive(out.radial, "radial conductivity");
  require_positive(out.axial, "axial conductivity");
  return out;
}

MaterialConfig MaterialConfig::aluminium_6082() {
  MaterialConfig c;
  // rho * c_p, J/(m^3 K)
  c.heat_capacity_solid = {{293.0, 2.43e6}, {400.0, 2.52e6}, {500.0, 2.60e6},
                           {600.0, 2.68e6}, {700.0, 2.75e6}, {800.0, 2.83e6}};
  c.heat_capacity_liquid = {{950.0, 2.80e6}, {1200.0, 2.77e6}, {1500.0, 2.74e6},
                            {2000.0, 2.69e6}};
  // W/(m K)
  c.conductivity_solid = {{293.0, 170.0}, {400.0, 180.0}, {500.0, 190.0},
                          {600.0, 197.0}, {700.0, 203.0}, {800.0, 208.0}};
  c.liquid_slope_radial = 0.3;
  c.liquid_slope_axial = -0.06;
  c.absorptivity = 0.103;
  return c;
}

MaterialModel::MaterialModel(const MaterialConfig& config)
    : capacity_(build_heat_capacity(config.heat_capacity_solid,
                                    config.heat_capacity_liquid, config.phase)),
      capacity_base_(latent_free_heat_capacity(config.heat_capacity_solid,
                                               config.heat_capacity_liquid, config.phase)),
      conductivity_(build_conductivity(config.conductivity_solid, config.phase,
                                       config.liquid_slope_radial,
                                       config.liquid_slope_axial)),
      phase_(config.phase),
      absorptivity_(config.absorptivity) {
  if (!(absorptivity_ > 0.0 && absorptivity_ <= 1.0)) {
    throw InvalidModel("absorptivity must lie in (0, 1]");
  }
  require_positive(capacity_, "heat capacity");
}

}  // namespace weldopt
