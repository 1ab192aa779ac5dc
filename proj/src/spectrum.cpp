#include "nanofock/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/LU>

#include "nanofock/error.hpp"
#include "nanofock/wigner.hpp"

namespace nanofock {

RateTable merge_rate_tables(const RateTable& a, const RateTable& b) {
  if (a.delta.size() != b.delta.size()) throw ArgumentError("merge_rate_tables: tables cover different levels");
  RateTable out = a;
  for (std::size_t n = 0; n < out.plus.size(); ++n) {
    out.plus[n].insert(out.plus[n].end(), b.plus[n].begin(), b.plus[n].end());
    out.minus[n].insert(out.minus[n].end(), b.minus[n].begin(), b.minus[n].end());
  }
  return out;
}

std::vector<double> linewidths(const RateTable& rates, double gamma_m, double nbar, std::size_t n_max) {
  if (rates.max_level() < n_max + 1)
    throw ArgumentError("linewidths: rate table must cover level " + std::to_string(n_max + 1));
  std::vector<double> out(n_max + 1, 0.0);
  for (std::size_t n = 1; n <= n_max; ++n) {
    const double dn = static_cast<double>(n);
    out[n] = dn * (rates.total_minus(n) + rates.total_plus(n) + gamma_m * (2.0 * nbar + 1.0)) +
             (dn - 1.0) * (rates.total_minus(n - 1) + gamma_m * (nbar + 1.0)) +
             (dn + 1.0) * (rates.total_plus(n + 1) + gamma_m * nbar);
  }
  return out;
}

bool SpectrumData::resolvable() const {
  for (const auto& pk : peaks)
    if (line_spacing < 3.0 * pk.linewidth) return false;
  return true;
}

namespace {

struct LineSet {
  RateTable probe;
  std::vector<double> gamma;
};

LineSet line_set(const DerivedParams& d, std::size_t n_max, const SpectrumOptions& options) {
  if (!d.probe) throw ArgumentError("power spectrum needs a probe laser");
  if (n_max < 1) throw ArgumentError("power spectrum needs at least two populations");
  LineSet s;
  const LaserParams probe[] = {*d.probe};
  s.probe = transition_rates(d, probe, n_max + 1);
  const RateTable drive = transition_rates(d, d.lasers, n_max + 1);
  const RateTable all = options.probe_in_linewidth ? merge_rate_tables(drive, s.probe) : drive;
  s.gamma = linewidths(all, d.gamma_m, d.nbar, n_max);
  return s;
}

double lorentzian(double offset, double center, double width) {
  const double x = offset - center;
  return 1.0 / (x * x + 0.25 * width * width);
}

}  // namespace

SpectrumData power_spectrum(std::span<const double> populations, const DerivedParams& derived,
                            std::span<const double> offsets, const SpectrumOptions& options) {
  const std::size_t n_max = populations.size() - 1;
  const LineSet lines = line_set(derived, n_max, options);
  SpectrumData out;
  out.laser_frequency = derived.probe->laser_frequency;
  out.line_spacing = derived.lambda;
  out.offsets.assign(offsets.begin(), offsets.end());
  out.values.assign(offsets.size(), 0.0);
  for (std::size_t n = 1; n <= n_max; ++n) {
    SpectrumPeak pk;
    pk.n = n;
    pk.delta = lines.probe.delta[n];
    pk.linewidth = lines.gamma[n];
    pk.probe_plus = lines.probe.plus[n][0];
    pk.probe_minus = lines.probe.minus[n][0];
    const double dn = static_cast<double>(n);
    const double w_plus = dn * pk.linewidth * pk.probe_minus * populations[n];
    const double w_minus = dn * pk.linewidth * pk.probe_plus * populations[n - 1];
    pk.height_plus = 4.0 * w_plus / (pk.linewidth * pk.linewidth);
    pk.height_minus = 4.0 * w_minus / (pk.linewidth * pk.linewidth);
    for (std::size_t i = 0; i < offsets.size(); ++i)
      out.values[i] += w_plus * lorentzian(offsets[i], pk.delta, pk.linewidth) +
                       w_minus * lorentzian(offsets[i], -pk.delta, pk.linewidth);
    out.peaks.push_back(pk);
  }
  for (const auto& pk : out.peaks)
    if (out.line_spacing < pk.linewidth) {
      std::ostringstream msg;
      msg << "line " << pk.n << " overlaps its neighbours (Gamma_n = " << pk.linewidth << " rad/s > lambda = "
          << out.line_spacing << " rad/s); the inversion is unusable";
      out.warnings.push_back(msg.str());
    }
  return out;
}

std::vector<double> sideband_grid(const DerivedParams& derived, std::size_t levels, std::size_t points_per_linewidth,
                                  double margin_linewidths, const SpectrumOptions& options) {
  if (levels < 2) throw ArgumentError("sideband_grid needs at least two levels");
  if (points_per_linewidth < 2) throw ArgumentError("sideband_grid needs at least two points per linewidth");
  const std::size_t n_max = levels - 1;
  const LineSet lines = line_set(derived, n_max, options);
  const auto first = lines.gamma.begin() + 1;
  const double g_min = *std::min_element(first, lines.gamma.end());
  const double g_max = *std::max_element(first, lines.gamma.end());
  const double lo = std::max(lines.probe.delta[1] - margin_linewidths * g_max, 0.5 * lines.probe.delta[1]);
  const double hi = lines.probe.delta[n_max] + margin_linewidths * g_max;
  constexpr double kMaxPointsPerSide = 200000.0;
  const double step = std::max(g_min / static_cast<double>(points_per_linewidth), (hi - lo) / kMaxPointsPerSide);
  const auto count = static_cast<std::size_t>(std::ceil((hi - lo) / step)) + 1;
  std::vector<double> grid;
  grid.reserve(2 * count);
  for (std::size_t i = 0; i < count; ++i) grid.push_back(-(hi - step * static_cast<double>(i)));
  for (std::size_t i = 0; i < count; ++i) grid.push_back(lo + step * static_cast<double>(i));
  return grid;
}

namespace {

struct Sample {
  double value = 0.0;
  double error = 0.0;  // quadratic minus linear interpolant
};

// Quadratic interpolation at `center` through the three samples nearest to it.
Sample sample_at(const SpectrumData& s, double center, double width) {
  const auto& x = s.offsets;
  const auto it = std::lower_bound(x.begin(), x.end(), center);
  if (it == x.begin() || it == x.end())
    throw PreconditionError("spectrum grid does not bracket the line at offset " + std::to_string(center));
  auto hi = static_cast<std::size_t>(it - x.begin());
  std::size_t lo = hi - 1;
  if (x[hi] - x[lo] > 0.5 * width)
    throw PreconditionError("spectrum grid does not resolve the line at offset " + std::to_string(center) +
                            " rad/s within Gamma_n / 2");
  // Third point on the side closer to the center.
  std::size_t a, b, c;
  if (lo > 0 && (hi + 1 >= x.size() || center - x[lo] < x[hi] - center)) {
    a = lo - 1, b = lo, c = hi;
  } else if (hi + 1 < x.size()) {
    a = lo, b = hi, c = hi + 1;
  } else {
    throw PreconditionError("spectrum grid too short around offset " + std::to_string(center));
  }
  const double xa = x[a], xb = x[b], xc = x[c];
  const double ya = s.values[a], yb = s.values[b], yc = s.values[c];
  const double q = ya * (center - xb) * (center - xc) / ((xa - xb) * (xa - xc)) +
                   yb * (center - xa) * (center - xc) / ((xb - xa) * (xb - xc)) +
                   yc * (center - xa) * (center - xb) / ((xc - xa) * (xc - xb));
  const double lin = s.values[lo] + (s.values[hi] - s.values[lo]) * (center - x[lo]) / (x[hi] - x[lo]);
  return {q, std::abs(q - lin)};
}

}  // namespace

Reconstruction populations_from_spectrum(const SpectrumData& spectrum, double detection_threshold) {
  if (spectrum.peaks.empty()) throw ArgumentError("populations_from_spectrum: empty peak table");
  if (spectrum.offsets.size() != spectrum.values.size() || spectrum.offsets.size() < 3)
    throw ArgumentError("populations_from_spectrum: malformed spectrum");
  if (!std::is_sorted(spectrum.offsets.begin(), spectrum.offsets.end()))
    throw ArgumentError("populations_from_spectrum: offsets must be sorted");

  // Lines 2k (at +delta, carries P_n) and 2k+1 (at -delta, carries P_{n-1}) for n = k+1.
  const std::size_t m = spectrum.peaks.size();
  const auto lines = static_cast<long>(2 * m);
  std::vector<double> centers(2 * m), widths(2 * m);
  for (std::size_t k = 0; k < m; ++k) {
    centers[2 * k] = spectrum.peaks[k].delta;
    centers[2 * k + 1] = -spectrum.peaks[k].delta;
    widths[2 * k] = widths[2 * k + 1] = spectrum.peaks[k].linewidth;
  }
  Eigen::VectorXd s(lines), rel(lines);
  Eigen::MatrixXd shape(lines, lines);
  for (long i = 0; i < lines; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const Sample smp = sample_at(spectrum, centers[ui], widths[ui]);
    s(i) = smp.value;
    rel(i) = smp.value > 0.0 ? smp.error / smp.value : 0.0;
    for (long k = 0; k < lines; ++k) {
      const auto uk = static_cast<std::size_t>(k);
      // Unit-height Lorentzian of line k evaluated at center i.
      shape(i, k) = 0.25 * widths[uk] * widths[uk] * lorentzian(centers[ui], centers[uk], widths[uk]);
    }
  }
  Eigen::VectorXd h = shape.partialPivLu().solve(s);
  const double h_max = h.maxCoeff();
  if (!(h_max > 0.0)) throw PreconditionError("spectrum carries no sideband weight");
  const double floor = detection_threshold * h_max;

  Reconstruction out;
  std::vector<double> log_p{0.0};
  std::vector<double> err{0.0};
  for (std::size_t k = 0; k < m; ++k) {
    const double hp = h(static_cast<long>(2 * k));
    const double hm = h(static_cast<long>(2 * k + 1));
    if (!(hp > floor) || !(hm > floor)) break;
    const auto& pk = spectrum.peaks[k];
    if (spectrum.line_spacing < 3.0 * pk.linewidth) {
      std::ostringstream msg;
      msg << "line n = " << pk.n << " is not resolved: lambda = " << spectrum.line_spacing
          << " rad/s is below 3 Gamma_n = " << 3.0 * pk.linewidth << " rad/s; inversion refused";
      throw PreconditionError(msg.str());
    }
    if (!(pk.probe_minus > 0.0) || !(pk.probe_plus > 0.0))
      throw PreconditionError("probe rates vanish at line n = " + std::to_string(pk.n));
    if (std::abs(pk.probe_plus - pk.probe_minus) > 1e-9 * std::max(pk.probe_plus, pk.probe_minus)) {
      std::ostringstream msg;
      msg << "probe is not resonant at line n = " << pk.n << " (A_+ / A_- = " << pk.probe_plus / pk.probe_minus
          << "); ratios corrected with the predicted probe rates";
      out.warnings.push_back(msg.str());
    }
    log_p.push_back(log_p.back() + std::log(hp / hm) + std::log(pk.probe_plus / pk.probe_minus));
    err.push_back(err.back() + rel(static_cast<long>(2 * k)) + rel(static_cast<long>(2 * k + 1)));
    out.highest_line = pk.n;
  }
  for (std::size_t k = out.highest_line; k < m; ++k)
    if (h(static_cast<long>(2 * k)) > floor) {
      out.warnings.push_back("sideband weight above the highest chained line n = " + std::to_string(out.highest_line) +
                             " was ignored");
      break;
    }

  const double peak = *std::max_element(log_p.begin(), log_p.end());
  double total = 0.0;
  for (double v : log_p) total += std::exp(v - peak);
  for (std::size_t n = 0; n < log_p.size(); ++n) {
    const double p = std::exp(log_p[n] - peak) / total;
    out.populations.push_back(p);
    out.uncertainties.push_back(p * err[n]);
  }
  out.wigner_origin = wigner_origin(out.populations);
  return out;
}

}  // namespace nanofock
