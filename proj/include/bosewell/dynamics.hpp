#pragma once

// Initial-state preparation and population-imbalance dynamics.
//
// The initial state is the ground state of the asymmetric Hamiltonian
// H(delta*), with delta* chosen so that its imbalance equals a target z0,
// expanded in the eigenbasis |m> of the symmetric Hamiltonian H(0). Since both
// are real symmetric, every amplitude is real and
//
//   z(t) = sum_m z_mm + 2 sum_{m<m'} z_mm' cos((E_m - E_m') t),
//   z_mm' = c_m c_m' <m| (n1 - n2)/N |m'>.

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bosewell/model.hpp"
#include "bosewell/spectrum.hpp"

namespace bosewell {

/// Root finding for the preparation asymmetry failed to bracket the target.
class NoSolutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct InitialState {
  std::vector<double> amplitudes_fock;  ///< ground state of H(delta_used), Fock basis
  std::vector<double> coeffs;           ///< c_m = <m|psi(0)> in the symmetric eigenbasis
  double delta_used = 0.0;
  double z0 = 0.0;
};

struct ImbalanceTrace {
  std::vector<double> times;
  std::vector<double> z;
};

/// z_mm' and omega_mm' = E_m - E_m' for one state and one symmetric spectrum.
/// Immutable after construction; safe to share between threads.
class CoherenceMatrix {
 public:
  CoherenceMatrix(const InitialState& state, const Spectrum& spectrum);

  std::size_t dim() const { return dim_; }
  double entry(std::size_t m, std::size_t m2) const { return entries_[m * dim_ + m2]; }
  double frequency(std::size_t m, std::size_t m2) const {
    return energies_[m] - energies_[m2];
  }
  /// sum_m z_mm, the stationary part of z(t).
  double diagonal_sum() const { return diagonal_sum_; }

  double imbalance_at(double t) const;
  double window_mean(double window) const;

 private:
  std::size_t dim_ = 0;
  std::vector<double> entries_;
  std::vector<double> energies_;
  double diagonal_sum_ = 0.0;
};

inline constexpr double kPreparationTolerance = 1e-8;

/// Ground-state imbalance of H(params with delta replaced).
double ground_state_imbalance(const ModelParams& params, double delta);

/// Finds delta* by bracket expansion and bisection, then projects the
/// ground state of H(delta*) onto `symmetric_spectrum`. params_symmetric must
/// have delta == 0 and `symmetric_spectrum` must be its decomposition.
InitialState prepare_initial(double z0_target, const ModelParams& params_symmetric,
                             const Spectrum& symmetric_spectrum);
InitialState prepare_initial(double z0_target, const ModelParams& params_symmetric);

/// Same projection for a given asymmetry, without root finding.
InitialState prepare_with_delta(double delta, const ModelParams& params_symmetric,
                                const Spectrum& symmetric_spectrum);

/// Throws std::invalid_argument if the amplitudes are not normalised to 1e-10.
double imbalance_of_state(std::span<const double> amplitudes_fock);

ImbalanceTrace evolve_imbalance(const InitialState& state, const Spectrum& spectrum,
                                std::span<const double> times, unsigned threads = 1);

/// Fixed-step RK4 integration of i dpsi/dt = H psi, used to cross-check the
/// spectral evolution. dt must not exceed 0.01 / (max row sum of |H|); the
/// actual step is t_final / ceil(t_final / dt).
std::vector<std::complex<double>> propagate_oracle(
    std::span<const std::complex<double>> amplitudes_fock, const TridiagonalMatrix& matrix,
    double t_final, double dt);

/// Largest step propagate_oracle accepts for this matrix.
double max_oracle_step(const TridiagonalMatrix& matrix);

/// sum_k |psi_k|^2 (2k - N)/N for complex amplitudes.
double imbalance_of_state(std::span<const std::complex<double>> amplitudes_fock);

/// Row per z0: |c_m|^2 over eigenindex m.
std::vector<std::vector<double>> occupation_map(const ModelParams& params_symmetric,
                                                std::span<const double> z0_grid,
                                                unsigned threads = 1);

/// Exact mean of z(t) over [0, window].
double window_average(const InitialState& state, const Spectrum& spectrum, double window);

/// Uniform grid of samples_per_period * periods + 1 points starting at 0.
std::vector<double> time_grid(double period, double periods, int samples_per_period);

}  // namespace bosewell
