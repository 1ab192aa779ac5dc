#include "nanofock/electrostatics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "nanofock/device.hpp"
#include "nanofock/error.hpp"

namespace nanofock {

AxialFieldSample GaussianLobe::sample(double y) const {
  const double dy = y - center;
  const double axial = peak_field * std::exp(-dy * dy / (2.0 * axial_width * axial_width));
  const double s2 = transverse_width * transverse_width;
  const double x0 = transverse_offset;
  const double f0 = axial * std::exp(-x0 * x0 / (2.0 * s2));
  return {f0, f0 * x0 / s2, f0 * (x0 * x0 / (s2 * s2) - 1.0 / s2)};
}

AxialFieldSample SampledAxialField::sample(double at) const {
  if (y.size() < 2 || at < y.front() || at > y.back()) return {};
  const auto hi = std::upper_bound(y.begin(), y.end(), at);
  const std::size_t i1 = hi == y.end() ? y.size() - 1 : static_cast<std::size_t>(hi - y.begin());
  const std::size_t i0 = i1 - 1;
  const double t = (at - y[i0]) / (y[i1] - y[i0]);
  const auto& a = samples[i0];
  const auto& b = samples[i1];
  return {a.value + t * (b.value - a.value), a.d1 + t * (b.d1 - a.d1), a.d2 + t * (b.d2 - a.d2)};
}

FieldModel::FieldModel(Profile parallel, Profile perpendicular)
    : parallel_(std::move(parallel)), perpendicular_(std::move(perpendicular)) {
  if (!parallel_ || !perpendicular_) throw ArgumentError("FieldModel: empty profile");
}

namespace {
FieldModel::Profile lobe_sum(std::vector<GaussianLobe> lobes) {
  return [lobes = std::move(lobes)](double y) {
    AxialFieldSample total;
    for (const auto& l : lobes) {
      const auto s = l.sample(y);
      total.value += s.value;
      total.d1 += s.d1;
      total.d2 += s.d2;
    }
    return total;
  };
}

void check_sampled(const SampledAxialField& f, const char* which) {
  if (f.y.size() != f.samples.size())
    throw ArgumentError(std::string("sampled field '") + which + "': grid and samples differ in length");
  if (!std::is_sorted(f.y.begin(), f.y.end()))
    throw ArgumentError(std::string("sampled field '") + which + "': grid not ascending");
}
}  // namespace

FieldModel FieldModel::gaussian_lobes(std::vector<GaussianLobe> parallel, std::vector<GaussianLobe> perpendicular) {
  return FieldModel(lobe_sum(std::move(parallel)), lobe_sum(std::move(perpendicular)));
}

FieldModel FieldModel::sampled(SampledAxialField parallel, SampledAxialField perpendicular) {
  check_sampled(parallel, "parallel");
  check_sampled(perpendicular, "perpendicular");
  return FieldModel([p = std::move(parallel)](double y) { return p.sample(y); },
                    [p = std::move(perpendicular)](double y) { return p.sample(y); });
}

FieldModel FieldModel::scaled(double factor) const {
  auto scale = [factor](const Profile& p) {
    return [p, factor](double y) {
      auto s = p(y);
      return AxialFieldSample{factor * s.value, factor * s.d1, factor * s.d2};
    };
  };
  return FieldModel(scale(parallel_), scale(perpendicular_));
}

namespace {
// W = -(1/2)(a_par E_par^2 + a_perp E_perp^2)
double dW_dx(const AxialFieldSample& par, const AxialFieldSample& perp, const Polarizability& a) {
  return -(a.parallel * par.value * par.d1 + a.perpendicular * perp.value * perp.d1);
}

double d2W_dx2(const AxialFieldSample& par, const AxialFieldSample& perp, const Polarizability& a) {
  return -(a.parallel * (par.d1 * par.d1 + par.value * par.d2) +
           a.perpendicular * (perp.d1 * perp.d1 + perp.value * perp.d2));
}

template <class F>
double integrate_checked(F f, double length, const char* what) {
  // Integrate over u = y / L; the adaptive stopping rule misbehaves on micrometre-sized intervals.
  double error = 0.0, l1 = 0.0;
  const double value = length * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                                    [&](double u) { return f(u * length); }, 0.0, 1.0, 20, 1e-12, &error, &l1);
  if (!std::isfinite(value) || error > 1e-8 * l1)
    throw NumericalError(std::string("electrostatic quadrature for ") + what + " did not converge (error estimate " +
                         std::to_string(error) + ")");
  return value;
}
}  // namespace

ElectrostaticExpansion electrostatic_quadratic(const FieldModel& field, const Polarizability& alpha,
                                               const BeamSpec& beam) {
  beam.validate();
  const double length = beam.length;
  ElectrostaticExpansion out;
  out.linear = integrate_checked(
      [&](double y) {
        return dW_dx(field.parallel(y), field.perpendicular(y), alpha) * clamped_mode_shape(y, length);
      },
      length, "V_es,1");
  out.quadratic = 0.5 * integrate_checked(
                            [&](double y) {
                              const double phi = clamped_mode_shape(y, length);
                              return d2W_dx2(field.parallel(y), field.perpendicular(y), alpha) * phi * phi;
                            },
                            length, "V_es,2");
  return out;
}

FieldModel tune_field_to_softening(const FieldModel& field, const Polarizability& alpha, const BeamSpec& beam,
                                   double zeta) {
  if (!(zeta >= 1.0)) throw ArgumentError("tune_field_to_softening: zeta must be >= 1");
  const double current = electrostatic_quadratic(field, alpha, beam).quadratic;
  if (!(current < 0.0)) throw ArgumentError("tune_field_to_softening: field does not soften the beam");
  const double target = (1.0 - 1.0 / (zeta * zeta)) * critical_quadratic(beam);
  // V_es,2 is quadratic in the field amplitude.
  return field.scaled(std::sqrt(target / -current));
}

}  // namespace nanofock
