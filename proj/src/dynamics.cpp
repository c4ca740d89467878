#include "bosewell/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bosewell/eigensolve.hpp"
#include "bosewell/parallel.hpp"

namespace bosewell {

namespace {

double imbalance_weighted(std::span<const double> probabilities) {
  const auto n = static_cast<double>(probabilities.size() - 1);
  double z = 0.0;
  for (std::size_t k = 0; k < probabilities.size(); ++k) {
    z += probabilities[k] * (2.0 * static_cast<double>(k) - n);
  }
  return z / n;
}

double fock_imbalance(std::span<const double> v) {
  std::vector<double> p(v.size());
  std::transform(v.begin(), v.end(), p.begin(), [](double a) { return a * a; });
  return imbalance_weighted(p);
}

std::vector<double> project(const Spectrum& spectrum, std::span<const double> amplitudes) {
  std::vector<double> coeffs(spectrum.dim());
  for (std::size_t m = 0; m < spectrum.dim(); ++m) {
    const auto vm = spectrum.vector(m);
    double c = 0.0;
    for (std::size_t k = 0; k < vm.size(); ++k) c += vm[k] * amplitudes[k];
    coeffs[m] = c;
  }
  return coeffs;
}

void check_consistent(const InitialState& state, const Spectrum& spectrum) {
  if (state.coeffs.size() != spectrum.dim() || spectrum.dim() < 2) {
    throw std::invalid_argument("dimension mismatch: state has " +
                                std::to_string(state.coeffs.size()) +
                                " coefficients, spectrum has dimension " +
                                std::to_string(spectrum.dim()));
  }
}

}  // namespace

CoherenceMatrix::CoherenceMatrix(const InitialState& state, const Spectrum& spectrum)
    : dim_(spectrum.dim()), entries_(dim_ * dim_, 0.0), energies_(spectrum.values) {
  check_consistent(state, spectrum);
  const auto n = static_cast<double>(dim_ - 1);
  std::vector<double> weighted(dim_);
  for (std::size_t m = 0; m < dim_; ++m) {
    const auto vm = spectrum.vector(m);
    for (std::size_t k = 0; k < dim_; ++k) {
      weighted[k] = vm[k] * (2.0 * static_cast<double>(k) - n) / n;
    }
    for (std::size_t m2 = m; m2 < dim_; ++m2) {
      const auto v2 = spectrum.vector(m2);
      double element = 0.0;
      for (std::size_t k = 0; k < dim_; ++k) element += weighted[k] * v2[k];
      const double z = state.coeffs[m] * state.coeffs[m2] * element;
      entries_[m * dim_ + m2] = z;
      entries_[m2 * dim_ + m] = z;
    }
    diagonal_sum_ += entries_[m * dim_ + m];
  }
}

double CoherenceMatrix::imbalance_at(double t) const {
  double off = 0.0;
  for (std::size_t m = 0; m < dim_; ++m) {
    const double* row = entries_.data() + m * dim_;
    const double em = energies_[m];
    for (std::size_t m2 = m + 1; m2 < dim_; ++m2) {
      off += row[m2] * std::cos((em - energies_[m2]) * t);
    }
  }
  return diagonal_sum_ + 2.0 * off;
}

double CoherenceMatrix::window_mean(double window) const {
  double off = 0.0;
  for (std::size_t m = 0; m < dim_; ++m) {
    const double* row = entries_.data() + m * dim_;
    for (std::size_t m2 = m + 1; m2 < dim_; ++m2) {
      const double x = (energies_[m] - energies_[m2]) * window;
      const double sinc = std::abs(x) < 1e-12 ? 1.0 : std::sin(x) / x;
      off += row[m2] * sinc;
    }
  }
  return diagonal_sum_ + 2.0 * off;
}

double ground_state_imbalance(const ModelParams& params, double delta) {
  ModelParams p = params;
  p.delta = delta;
  return fock_imbalance(ground_vector(build_hamiltonian(p)).vector);
}

InitialState prepare_initial(double z0_target, const ModelParams& params_symmetric,
                             const Spectrum& symmetric_spectrum) {
  validate(params_symmetric);
  if (!(std::abs(z0_target) < 1.0)) {
    throw std::domain_error("prepare_initial: |z0| must be < 1, got " +
                            std::to_string(z0_target));
  }
  if (params_symmetric.delta != 0.0) {
    throw std::invalid_argument("prepare_initial: reference parameters must have delta = 0");
  }
  const std::size_t dim = static_cast<std::size_t>(params_symmetric.n_particles) + 1;
  if (symmetric_spectrum.dim() != dim) {
    throw std::invalid_argument("prepare_initial: spectrum dimension does not match N+1");
  }

  InitialState state;
  if (z0_target == 0.0) {
    const auto v0 = symmetric_spectrum.vector(0);
    state.amplitudes_fock.assign(v0.begin(), v0.end());
    state.delta_used = 0.0;
  } else {
    // z0(delta) decreases with delta: excess in well 1 (z0 > 0) needs delta < 0.
    const double direction = z0_target > 0.0 ? -1.0 : 1.0;
    const double target = std::abs(z0_target);
    const double limit =
        1e6 * std::max(params_symmetric.j, params_symmetric.u * params_symmetric.n_particles);
    auto signed_z = [&](double magnitude) {
      return direction * -1.0 * ground_state_imbalance(params_symmetric, direction * magnitude);
    };

    double lo = 0.0;
    double z_lo = 0.0;
    double hi = params_symmetric.u > 0.0 ? params_symmetric.u : params_symmetric.j;
    double z_hi = signed_z(hi);
    while (z_hi < target) {
      if (z_hi < z_lo - 1e-12) {
        throw std::runtime_error("prepare_initial: ground-state imbalance not monotone in delta");
      }
      lo = hi;
      z_lo = z_hi;
      hi *= 2.0;
      if (hi > limit) {
        throw NoSolutionError("prepare_initial: no asymmetry within |delta| <= " +
                              std::to_string(limit) + " reaches z0 = " +
                              std::to_string(z0_target));
      }
      z_hi = signed_z(hi);
    }

    double best = hi;
    double z_best = z_hi;
    for (int it = 0; it < 200; ++it) {
      if (std::abs(z_best - target) <= 1e-13) break;
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      const double z_mid = signed_z(mid);
      if (z_mid < z_lo - 1e-12 || z_mid > z_hi + 1e-12) {
        throw std::runtime_error("prepare_initial: ground-state imbalance not monotone in delta");
      }
      if (z_mid < target) {
        lo = mid;
        z_lo = z_mid;
      } else {
        hi = mid;
        z_hi = z_mid;
      }
      if (std::abs(z_mid - target) < std::abs(z_best - target)) {
        best = mid;
        z_best = z_mid;
      }
    }
    if (std::abs(z_best - target) > kPreparationTolerance) {
      throw NoSolutionError("prepare_initial: bisection stalled at |z - z0| = " +
                            std::to_string(std::abs(z_best - target)));
    }
    ModelParams asymmetric = params_symmetric;
    asymmetric.delta = direction * best;
    state.amplitudes_fock = ground_vector(build_hamiltonian(asymmetric)).vector;
    state.delta_used = asymmetric.delta;
  }

  state.z0 = fock_imbalance(state.amplitudes_fock);
  state.coeffs = project(symmetric_spectrum, state.amplitudes_fock);
  return state;
}

InitialState prepare_with_delta(double delta, const ModelParams& params_symmetric,
                                const Spectrum& symmetric_spectrum) {
  validate(params_symmetric);
  if (params_symmetric.delta != 0.0) {
    throw std::invalid_argument("prepare_with_delta: reference parameters must have delta = 0");
  }
  if (!std::isfinite(delta)) {
    throw std::invalid_argument("prepare_with_delta: delta must be finite");
  }
  const std::size_t dim = static_cast<std::size_t>(params_symmetric.n_particles) + 1;
  if (symmetric_spectrum.dim() != dim) {
    throw std::invalid_argument("prepare_with_delta: spectrum dimension does not match N+1");
  }
  ModelParams asymmetric = params_symmetric;
  asymmetric.delta = delta;
  InitialState state;
  state.amplitudes_fock = ground_vector(build_hamiltonian(asymmetric)).vector;
  state.delta_used = delta;
  state.z0 = fock_imbalance(state.amplitudes_fock);
  state.coeffs = project(symmetric_spectrum, state.amplitudes_fock);
  return state;
}

InitialState prepare_initial(double z0_target, const ModelParams& params_symmetric) {
  return prepare_initial(z0_target, params_symmetric,
                         eigh_tridiagonal(build_hamiltonian(params_symmetric)));
}

double imbalance_of_state(std::span<const double> amplitudes_fock) {
  if (amplitudes_fock.size() < 2) {
    throw std::invalid_argument("imbalance_of_state: need at least two Fock amplitudes");
  }
  double norm = 0.0;
  for (double a : amplitudes_fock) norm += a * a;
  if (std::abs(norm - 1.0) > 1e-10) {
    throw std::invalid_argument("imbalance_of_state: amplitudes not normalised (norm^2 = " +
                                std::to_string(norm) + ")");
  }
  return fock_imbalance(amplitudes_fock);
}

double imbalance_of_state(std::span<const std::complex<double>> amplitudes_fock) {
  if (amplitudes_fock.size() < 2) {
    throw std::invalid_argument("imbalance_of_state: need at least two Fock amplitudes");
  }
  std::vector<double> p(amplitudes_fock.size());
  std::transform(amplitudes_fock.begin(), amplitudes_fock.end(), p.begin(),
                 [](std::complex<double> a) { return std::norm(a); });
  double norm = 0.0;
  for (double x : p) norm += x;
  if (std::abs(norm - 1.0) > 1e-10) {
    throw std::invalid_argument("imbalance_of_state: amplitudes not normalised");
  }
  return imbalance_weighted(p);
}

ImbalanceTrace evolve_imbalance(const InitialState& state, const Spectrum& spectrum,
                                std::span<const double> times, unsigned threads) {
  const CoherenceMatrix coherence(state, spectrum);
  ImbalanceTrace trace;
  trace.times.assign(times.begin(), times.end());
  trace.z.resize(times.size());
  parallel_for(times.size(), threads,
               [&](std::size_t i) { trace.z[i] = coherence.imbalance_at(times[i]); });
  return trace;
}

double max_oracle_step(const TridiagonalMatrix& matrix) {
  double row_max = 0.0;
  const std::size_t n = matrix.dim();
  for (std::size_t i = 0; i < n; ++i) {
    double row = std::abs(matrix.diag[i]);
    if (i > 0) row += std::abs(matrix.offdiag[i - 1]);
    if (i + 1 < n) row += std::abs(matrix.offdiag[i]);
    row_max = std::max(row_max, row);
  }
  return row_max == 0.0 ? std::numeric_limits<double>::infinity() : 0.01 / row_max;
}

std::vector<std::complex<double>> propagate_oracle(
    std::span<const std::complex<double>> amplitudes_fock, const TridiagonalMatrix& matrix,
    double t_final, double dt) {
  using cplx = std::complex<double>;
  const std::size_t n = matrix.dim();
  if (amplitudes_fock.size() != n || matrix.offdiag.size() + 1 != n) {
    throw std::invalid_argument("propagate_oracle: dimension mismatch");
  }
  if (!(dt > 0.0) || !(t_final >= 0.0)) {
    throw std::invalid_argument("propagate_oracle: need dt > 0 and t_final >= 0");
  }
  if (dt > max_oracle_step(matrix)) {
    throw std::invalid_argument("propagate_oracle: step too large, dt must be <= " +
                                std::to_string(max_oracle_step(matrix)));
  }
  std::vector<cplx> psi(amplitudes_fock.begin(), amplitudes_fock.end());
  if (t_final == 0.0) return psi;

  const auto steps = static_cast<long long>(std::ceil(t_final / dt));
  const double h = t_final / static_cast<double>(steps);
  const cplx minus_i(0.0, -1.0);

  // out = -i H in
  auto apply = [&](const std::vector<cplx>& in, std::vector<cplx>& out) {
    for (std::size_t k = 0; k < n; ++k) {
      cplx acc = matrix.diag[k] * in[k];
      if (k > 0) acc += matrix.offdiag[k - 1] * in[k - 1];
      if (k + 1 < n) acc += matrix.offdiag[k] * in[k + 1];
      out[k] = minus_i * acc;
    }
  };

  std::vector<cplx> k1(n), k2(n), k3(n), k4(n), tmp(n);
  for (long long s = 0; s < steps; ++s) {
    apply(psi, k1);
    for (std::size_t k = 0; k < n; ++k) tmp[k] = psi[k] + 0.5 * h * k1[k];
    apply(tmp, k2);
    for (std::size_t k = 0; k < n; ++k) tmp[k] = psi[k] + 0.5 * h * k2[k];
    apply(tmp, k3);
    for (std::size_t k = 0; k < n; ++k) tmp[k] = psi[k] + h * k3[k];
    apply(tmp, k4);
    for (std::size_t k = 0; k < n; ++k) {
      psi[k] += (h / 6.0) * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
    }
  }
  return psi;
}

std::vector<std::vector<double>> occupation_map(const ModelParams& params_symmetric,
                                                std::span<const double> z0_grid,
                                                unsigned threads) {
  for (double z0 : z0_grid) {
    if (!(std::abs(z0) < 1.0)) {
      throw std::domain_error("occupation_map: every z0 must lie in (-1, 1)");
    }
  }
  const Spectrum spectrum = eigh_tridiagonal(build_hamiltonian(params_symmetric));
  std::vector<std::vector<double>> rows(z0_grid.size());
  parallel_for(z0_grid.size(), threads, [&](std::size_t i) {
    const InitialState state = prepare_initial(z0_grid[i], params_symmetric, spectrum);
    std::vector<double> row(state.coeffs.size());
    std::transform(state.coeffs.begin(), state.coeffs.end(), row.begin(),
                   [](double c) { return c * c; });
    rows[i] = std::move(row);
  });
  return rows;
}

double window_average(const InitialState& state, const Spectrum& spectrum, double window) {
  if (!(window > 0.0)) {
    throw std::invalid_argument("window_average: window length must be > 0");
  }
  return CoherenceMatrix(state, spectrum).window_mean(window);
}

std::vector<double> time_grid(double period, double periods, int samples_per_period) {
  if (!(period > 0.0) || !(periods > 0.0) || samples_per_period < 1) {
    throw std::invalid_argument("time_grid: period, periods and samples must be positive");
  }
  const auto count =
      static_cast<std::size_t>(std::llround(periods * samples_per_period)) + 1;
  const double dt = period / samples_per_period;
  std::vector<double> t(count);
  for (std::size_t i = 0; i < count; ++i) t[i] = static_cast<double>(i) * dt;
  return t;
}

}  // namespace bosewell
