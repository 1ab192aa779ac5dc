#include <algorithm>
#include <cmath>
#include <sstream>

#include "nanofock/error.hpp"
#include "nanofock/liouvillian.hpp"

namespace nanofock {

namespace {
// Dormand-Prince 5(4) tableau; the system is autonomous so the nodes c_i are not needed.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// b - b_hat, the embedded error weights.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;

DensityMatrix snapshot(const CompositeSpace& space, const ComplexVector& y, std::size_t d) {
  DenseMatrix rho = unvectorize(y, d);
  rho = (0.5 * (rho + rho.adjoint())).eval();
  return DensityMatrix(space, std::move(rho));
}
}  // namespace

Trajectory time_evolve(const Liouvillian& gen, const DensityMatrix& rho0, double t_final, const EvolveOptions& opts) {
  if (gen.kind() != GeneratorKind::Full) throw ArgumentError("time_evolve needs a full generator");
  if (!(rho0.space() == gen.space())) throw ArgumentError("time_evolve: initial state on another space");
  if (!(t_final >= 0.0)) throw ArgumentError("time_evolve: t_final must be >= 0");
  if (opts.samples < 2) throw ArgumentError("time_evolve: need at least two samples");

  const std::size_t d = gen.hilbert_dim();
  const SparseMatrix& l = gen.matrix();
  const ComplexVector trace_row = gen.trace_functional();
  ComplexVector y = vectorize(rho0.matrix());
  const Complex trace0 = trace_row.dot(y);

  Trajectory out;
  out.times.reserve(opts.samples);
  out.states.reserve(opts.samples);
  out.times.push_back(0.0);
  out.states.push_back(rho0);
  if (t_final == 0.0 || gen.norm() == 0.0) {
    for (std::size_t k = 1; k < opts.samples; ++k) {
      out.times.push_back(t_final * static_cast<double>(k) / static_cast<double>(opts.samples - 1));
      out.states.push_back(rho0);
    }
    return out;
  }

  // Initial step from the generator scale: |L|_F / sqrt(dim) bounds a typical eigenvalue.
  const double scale = gen.norm() / std::sqrt(static_cast<double>(gen.dim()));
  double h = std::min(t_final, 0.01 / scale);
  const double min_step = 1e-13 * t_final;
  double t = 0.0;
  std::size_t next_sample = 1;
  ComplexVector k1 = l * y;
  while (next_sample < opts.samples) {
    const double target = t_final * static_cast<double>(next_sample) / static_cast<double>(opts.samples - 1);
    if (out.accepted_steps + out.rejected_steps >= opts.max_steps)
      throw StiffnessError("time_evolve exceeded " + std::to_string(opts.max_steps) +
                           " steps; the generator is too stiff for explicit integration, use the steady-state solver");
    const bool hits_target = t + h >= target;
    const double step = hits_target ? target - t : h;

    const ComplexVector k2 = l * (y + step * a21 * k1);
    const ComplexVector k3 = l * (y + step * (a31 * k1 + a32 * k2));
    const ComplexVector k4 = l * (y + step * (a41 * k1 + a42 * k2 + a43 * k3));
    const ComplexVector k5 = l * (y + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const ComplexVector k6 = l * (y + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const ComplexVector y_new = y + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const ComplexVector k7 = l * y_new;
    const ComplexVector err = step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double err_norm = 0.0;
    for (long i = 0; i < y.size(); ++i) {
      const double sc = opts.absolute_tolerance + opts.relative_tolerance * std::max(std::abs(y(i)), std::abs(y_new(i)));
      err_norm = std::max(err_norm, std::abs(err(i)) / sc);
    }

    if (err_norm <= 1.0) {
      ++out.accepted_steps;
      t = hits_target ? target : t + step;
      y = y_new;
      k1 = k7;
      out.max_trace_drift = std::max(out.max_trace_drift, std::abs(trace_row.dot(y) - trace0));
      if (hits_target) {
        out.times.push_back(t);
        out.states.push_back(snapshot(gen.space(), y, d));
        ++next_sample;
      }
    } else {
      ++out.rejected_steps;
    }
    const double factor = err_norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err_norm, -0.2), 0.2, 5.0);
    // Shortened landing steps must not shrink the working step size.
    h = (hits_target && err_norm <= 1.0) ? std::max(h, step * factor) : step * factor;
    if (h < min_step) {
      std::ostringstream msg;
      msg << "time_evolve step size underflow at t = " << t << " (h = " << h
          << "); the system is stiff, use the steady-state solver instead";
      throw StiffnessError(msg.str());
    }
  }
  if (out.max_trace_drift > opts.max_trace_drift) {
    std::ostringstream msg;
    msg << "time_evolve trace drift " << out.max_trace_drift << " exceeds " << opts.max_trace_drift;
    throw NumericalError(msg.str());
  }
  return out;
}

}  // namespace nanofock
