#include "bosewell/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "bosewell/eigensolve.hpp"
#include "bosewell/parallel.hpp"

namespace bosewell {

double plasma_frequency(const ModelParams& params) {
  validate(params);
  const auto lam = lambda(params);
  if (!lam) {
    throw std::domain_error("plasma_frequency: undefined for J = 0");
  }
  return 2.0 * params.j * std::sqrt(1.0 + *lam);
}

DoubletSplitting analytic_doublet_splitting(int n_particles, double j_over_u) {
  if (n_particles < 2) {
    throw std::domain_error("analytic_doublet_splitting: requires N >= 2");
  }
  if (!(j_over_u > 0.0) || !std::isfinite(j_over_u)) {
    throw std::domain_error("analytic_doublet_splitting: requires J/U > 0");
  }
  const double n = n_particles;
  DoubletSplitting out;
  out.log_value = std::log(2.0) + std::log(n) + n * std::log(j_over_u) - std::lgamma(n);
  out.log10_value = out.log_value / std::numbers::ln10;
  out.value = std::exp(out.log_value);
  return out;
}

CriticalImbalance semiclassical_zc(double lambda) {
  if (!(lambda > 0.0)) {
    throw std::domain_error("semiclassical_zc: Lambda must be > 0");
  }
  CriticalImbalance out;
  if (std::isinf(lambda)) return out;
  const double raw = 2.0 * std::sqrt(1.0 + lambda) / lambda;
  out.no_trapping = raw > 1.0;
  out.z_c = std::min(1.0, raw);
  return out;
}

DoubletReport classify_spectrum(const Spectrum& spectrum, double threshold) {
  if (!(threshold > 0.0)) {
    throw std::invalid_argument("classify_spectrum: threshold must be > 0");
  }
  const std::size_t dim = spectrum.dim();
  DoubletReport report;
  report.threshold = threshold;
  report.separatrix_index = dim;
  if (dim < 4) return report;

  const auto& e = spectrum.values;
  std::vector<double> gaps(dim - 1);
  for (std::size_t m = 0; m + 1 < dim; ++m) gaps[m] = e[m + 1] - e[m];
  std::vector<double> sorted = gaps;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t h = sorted.size() / 2;
  report.median_gap = sorted.size() % 2 ? sorted[h] : 0.5 * (sorted[h - 1] + sorted[h]);
  const double cut = threshold * report.median_gap;

  for (std::size_t m = 0; m + 1 < dim;) {
    if (gaps[m] < cut) {
      report.doublets.push_back({m, m + 1, gaps[m], std::numeric_limits<double>::quiet_NaN()});
      m += 2;
    } else {
      ++m;
    }
  }
  if (report.doublets.empty()) return report;

  report.separatrix_index = report.doublets.front().lower;
  for (std::size_t i = 0; i < report.doublets.size(); ++i) {
    auto& d = report.doublets[i];
    if (d.lower != report.separatrix_index + 2 * i) report.irregular = true;
    if (i + 1 < report.doublets.size()) {
      const auto& next = report.doublets[i + 1];
      d.gap_to_next = 0.5 * (e[next.lower] + e[next.upper]) - 0.5 * (e[d.lower] + e[d.upper]);
    }
  }
  if (report.doublets.back().upper != dim - 1) report.irregular = true;
  return report;
}

double adjacent_doublet_gap(const Spectrum& spectrum, const DoubletReport& report,
                            std::size_t top_doublets) {
  if (report.doublets.size() < 2) {
    throw std::invalid_argument("adjacent_doublet_gap: need at least two doublets, found " +
                                std::to_string(report.doublets.size()));
  }
  if (top_doublets < 2) {
    throw std::invalid_argument("adjacent_doublet_gap: top_doublets must be >= 2");
  }
  const std::size_t count = std::min(top_doublets, report.doublets.size());
  const auto& first = report.doublets[report.doublets.size() - count];
  const auto& last = report.doublets.back();
  const auto& e = spectrum.values;
  if (last.upper >= e.size()) {
    throw std::invalid_argument("adjacent_doublet_gap: report does not match spectrum");
  }
  const double top = 0.5 * (e[last.lower] + e[last.upper]);
  const double bottom = 0.5 * (e[first.lower] + e[first.upper]);
  return (top - bottom) / static_cast<double>(count - 1);
}

SweepResult sweep_zc(const ModelParams& params_symmetric, std::span<const double> z0_grid,
                     const SweepOptions& options) {
  return sweep_zc(params_symmetric, eigh_tridiagonal(build_hamiltonian(params_symmetric)),
                  z0_grid, options);
}

SweepResult sweep_zc(const ModelParams& params_symmetric, const Spectrum& spectrum,
                     std::span<const double> z0_grid, const SweepOptions& options) {
  if (z0_grid.empty()) {
    throw std::invalid_argument("sweep_zc: empty z0 grid");
  }
  for (std::size_t i = 0; i < z0_grid.size(); ++i) {
    if (!(z0_grid[i] > 0.0 && z0_grid[i] < 1.0)) {
      throw std::domain_error("sweep_zc: grid values must lie in (0, 1)");
    }
    if (i > 0 && !(z0_grid[i] > z0_grid[i - 1])) {
      throw std::invalid_argument("sweep_zc: grid must be strictly increasing");
    }
  }
  if (!(options.window_periods > 0.0)) {
    throw std::invalid_argument("sweep_zc: window_periods must be > 0");
  }
  const double omega_p = plasma_frequency(params_symmetric);
  if (spectrum.dim() != static_cast<std::size_t>(params_symmetric.n_particles) + 1) {
    throw std::invalid_argument("sweep_zc: spectrum dimension does not match N+1");
  }

  SweepResult result;
  result.lambda = *lambda(params_symmetric);
  result.window = options.window_periods * 2.0 * std::numbers::pi / omega_p;
  result.z0_grid.assign(z0_grid.begin(), z0_grid.end());
  result.zbar_over_z0.resize(z0_grid.size());

  auto ratio = [&](double z0) {
    const InitialState state = prepare_initial(z0, params_symmetric, spectrum);
    return window_average(state, spectrum, result.window) / state.z0;
  };
  parallel_for(z0_grid.size(), options.threads,
               [&](std::size_t i) { result.zbar_over_z0[i] = ratio(z0_grid[i]); });

  result.z_c_estimate = std::numeric_limits<double>::quiet_NaN();
  const auto it = std::find_if(result.zbar_over_z0.begin(), result.zbar_over_z0.end(),
                               [&](double r) { return r > options.zc_threshold; });
  if (it != result.zbar_over_z0.end()) {
    const auto i = static_cast<std::size_t>(it - result.zbar_over_z0.begin());
    result.found = true;
    result.z_c_estimate = z0_grid[i];
    if (i > 0) {
      const double mid = 0.5 * (z0_grid[i - 1] + z0_grid[i]);
      if (ratio(mid) > options.zc_threshold) result.z_c_estimate = mid;
    }
  }
  return result;
}

double zero_crossing_frequency(const ImbalanceTrace& trace, double hysteresis) {
  if (trace.times.size() != trace.z.size()) {
    throw std::invalid_argument("zero_crossing_frequency: times and z differ in length");
  }
  if (trace.z.size() < 2) return 0.0;
  double amplitude = 0.0;
  for (double z : trace.z) amplitude = std::max(amplitude, std::abs(z));
  const double band = hysteresis * amplitude;

  int state = 0;
  double last_zero = trace.times.front();
  std::vector<double> crossings;
  for (std::size_t i = 0; i < trace.z.size(); ++i) {
    const double z = trace.z[i];
    if (i > 0) {
      const double zp = trace.z[i - 1];
      if ((zp < 0.0 && z >= 0.0) || (zp > 0.0 && z <= 0.0)) {
        const double frac = zp / (zp - z);
        last_zero = trace.times[i - 1] + frac * (trace.times[i] - trace.times[i - 1]);
      }
    }
    const int next = z > band ? 1 : (z < -band ? -1 : state);
    if (state != 0 && next != state) crossings.push_back(last_zero);
    state = next;
  }
  if (crossings.size() < 2) return 0.0;
  const double span = crossings.back() - crossings.front();
  return std::numbers::pi * static_cast<double>(crossings.size() - 1) / span;
}

}  // namespace bosewell
