#pragma once

// Static field models for dielectric softening of a doubly clamped beam.
//
// A field component is described by its on-axis value and first two
// transverse derivatives as a function of the axial coordinate y.

#include <functional>
#include <vector>

namespace nanofock {

struct BeamSpec;

/// E, dE/dx and d2E/dx2 at x = 0 for a given y. V/m, V/m^2, V/m^3.
struct AxialFieldSample {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

/// Separable tip lobe E0 * exp(-(y-yc)^2 / 2wy^2) * exp(-(x-x0)^2 / 2wx^2).
struct GaussianLobe {
  double peak_field = 0.0;         // V/m
  double center = 0.0;             // m, along the beam
  double axial_width = 1e-7;       // m
  double transverse_offset = 0.0;  // m, position of the lobe maximum relative to the beam axis
  double transverse_width = 1e-8;  // m

  AxialFieldSample sample(double y) const;
};

/// Samples of a field component on an axial grid; linearly interpolated, zero outside.
struct SampledAxialField {
  std::vector<double> y;
  std::vector<AxialFieldSample> samples;

  AxialFieldSample sample(double at) const;
};

/// Screened polarizabilities per unit length, F*m.
struct Polarizability {
  double parallel = 0.0;
  double perpendicular = 0.0;
};

class FieldModel {
 public:
  using Profile = std::function<AxialFieldSample(double)>;

  FieldModel(Profile parallel, Profile perpendicular);

  static FieldModel gaussian_lobes(std::vector<GaussianLobe> parallel, std::vector<GaussianLobe> perpendicular);
  static FieldModel sampled(SampledAxialField parallel, SampledAxialField perpendicular);

  AxialFieldSample parallel(double y) const { return parallel_(y); }
  AxialFieldSample perpendicular(double y) const { return perpendicular_(y); }

  /// All field amplitudes multiplied by `factor`.
  FieldModel scaled(double factor) const;

 private:
  Profile parallel_;
  Profile perpendicular_;
};

/// Coefficients of V_es ~ V0 + V1 X + V2 X^2 for the fundamental mode amplitude X.
struct ElectrostaticExpansion {
  double linear = 0.0;     // N
  double quadratic = 0.0;  // N/m
};

/// Quadrature of the energy-line-density derivatives against the clamped mode shape.
/// Throws NumericalError if the adaptive quadrature cannot reach 1e-8 relative accuracy.
ElectrostaticExpansion electrostatic_quadratic(const FieldModel& field, const Polarizability& alpha,
                                               const BeamSpec& beam);

/// Scales `field` so that its quadratic term lowers the frequency by `zeta`.
FieldModel tune_field_to_softening(const FieldModel& field, const Polarizability& alpha, const BeamSpec& beam,
                                   double zeta);

}  // namespace nanofock
