#pragma once

// Temperature-dependent coefficients of the phase-change heat equation:
// effective volumetric heat capacity s(theta) with the latent heat of fusion
// smeared over the solidus-liquidus corridor, and the anisotropic effective
// conductivity (radial, axial) that mimics melt-pool convection.

#include <span>
#include <utility>
#include <vector>

namespace weldopt {

struct PhaseConstants {
  double solidus = 858.0;            // K
  double liquidus = 923.0;           // K
  double latent_heat = 397000.0;     // J/kg
  double reference_density = 2700.0; // kg/m^3

  void validate() const;
  // Latent heat per unit volume, J/m^3.
  double volumetric_latent_heat() const { return latent_heat * reference_density; }
};

struct Sample {
  double temperature;
  double value;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;

  double operator()(double theta) const { return slope * theta + intercept; }
};

// Piecewise cubic Hermite curve, C^1 at every knot, continued linearly with
// the end slopes outside the knot range.
class CubicSpline {
 public:
  CubicSpline() = default;
  CubicSpline(std::vector<double> knots, std::vector<double> values,
              std::vector<double> slopes);

  // A single straight line; no cubic pieces.
  static CubicSpline line(const LinearFit& fit, double anchor);

  double operator()(double theta) const;
  double derivative(double theta) const;
  // Value and slope in one interval lookup (hot path of the assembly).
  std::pair<double, double> evaluate(double theta) const noexcept;

  // Exact integral over [a, b].
  double integral(double a, double b) const;

  std::span<const double> knots() const { return knots_; }
  std::span<const double> values() const { return values_; }
  std::span<const double> slopes() const { return slopes_; }

 private:
  struct Piece {
    double c0, c1, c2, c3;  // in powers of (theta - left knot)
  };

  std::vector<double> knots_;
  std::vector<double> values_;
  std::vector<double> slopes_;
  std::vector<Piece> pieces_;
};

LinearFit fit_linear_segment(std::span<const Sample> samples);

// Solid line below solidus, liquid line above liquidus, and the unique C^1
// cubic joining them across the corridor. No latent heat.
CubicSpline latent_free_heat_capacity(std::span<const Sample> solid,
                                      std::span<const Sample> liquid,
                                      const PhaseConstants& phase);

// latent_free_heat_capacity plus a symmetric two-cubic bump on the corridor
// that vanishes with zero slope at both ends and integrates to the
// volumetric latent heat.
CubicSpline build_heat_capacity(std::span<const Sample> solid,
                                std::span<const Sample> liquid,
                                const PhaseConstants& phase);

struct Conductivity {
  CubicSpline radial;
  CubicSpline axial;
};

// Both directions follow the solid fit up to solidus; above liquidus each
// continues linearly from the solid fit's liquidus value with its own slope.
Conductivity build_conductivity(std::span<const Sample> solid,
                                const PhaseConstants& phase,
                                double liquid_slope_radial,
                                double liquid_slope_axial);

struct MaterialConfig {
  std::vector<Sample> heat_capacity_solid;
  std::vector<Sample> heat_capacity_liquid;
  std::vector<Sample> conductivity_solid;
  double liquid_slope_radial = 0.0;
  double liquid_slope_axial = 0.0;
  double absorptivity = 0.0;
  PhaseConstants phase;

  // Stand-in data for an EN AW 6082-T6 type aluminium alloy.
  static MaterialConfig aluminium_6082();
};

class MaterialModel {
 public:
  // Temperature range on which positivity is enforced.
  static constexpr double kCheckedMin = 250.0;
  static constexpr double kCheckedMax = 3500.0;

  explicit MaterialModel(const MaterialConfig& config);

  const CubicSpline& heat_capacity() const { return capacity_; }
  const CubicSpline& latent_free_capacity() const { return capacity_base_; }
  const CubicSpline& conductivity_radial() const { return conductivity_.radial; }
  const CubicSpline& conductivity_axial() const { return conductivity_.axial; }
  const PhaseConstants& phase() const { return phase_; }
  double absorptivity() const { return absorptivity_; }

 private:
  CubicSpline capacity_;
  CubicSpline capacity_base_;
  Conductivity conductivity_;
  PhaseConstants phase_;
  double absorptivity_;
};

}  // namespace weldopt
