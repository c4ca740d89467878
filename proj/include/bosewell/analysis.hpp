#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bosewell/dynamics.hpp"
#include "bosewell/model.hpp"
#include "bosewell/spectrum.hpp"

namespace bosewell {

/// Small-oscillation frequency 2 J sqrt(1 + Lambda). Throws std::domain_error for J == 0.
double plasma_frequency(const ModelParams& params);

struct DoubletSplitting {
  double log_value = 0.0;    ///< natural log of Delta E / U
  double log10_value = 0.0;
  double value = 0.0;        ///< exp(log_value); zero when it underflows
};

/// Delta E / U = 2N (J/U)^N / (N-1)!, evaluated through lgamma.
DoubletSplitting analytic_doublet_splitting(int n_particles, double j_over_u);

struct CriticalImbalance {
  double z_c = 0.0;
  bool no_trapping = false;  ///< raw 2 sqrt(1+Lambda)/Lambda exceeded 1 and was clipped
};

CriticalImbalance semiclassical_zc(double lambda);

struct Doublet {
  std::size_t lower = 0;
  std::size_t upper = 0;
  double splitting = 0.0;
  double gap_to_next = 0.0;  ///< centroid gap to the next doublet up; NaN for the last one
};

struct DoubletReport {
  std::size_t separatrix_index = 0;  ///< first eigenindex of the doublet region (dim if none)
  double threshold = 1e-3;
  double median_gap = 0.0;
  bool irregular = false;  ///< doublets do not tile the region above the separatrix
  std::vector<Doublet> doublets;
};

inline constexpr double kDefaultDoubletThreshold = 1e-3;

/// Pairs (m, m+1) whose gap is below threshold * median gap.
DoubletReport classify_spectrum(const Spectrum& spectrum,
                                double threshold = kDefaultDoubletThreshold);

/// Mean gap between the centroids of the topmost `top_doublets` doublets,
/// in the energy unit of the spectrum. Throws if fewer than two doublets.
double adjacent_doublet_gap(const Spectrum& spectrum, const DoubletReport& report,
                            std::size_t top_doublets = 2);

struct SweepOptions {
  double window_periods = 50.0;
  double zc_threshold = 0.1;
  unsigned threads = 1;
};

struct SweepResult {
  std::vector<double> z0_grid;
  std::vector<double> zbar_over_z0;
  double z_c_estimate = 0.0;  ///< NaN when not found
  bool found = false;
  double lambda = 0.0;
  double window = 0.0;  ///< averaging window used, window_periods * 2 pi / omega_p
};

SweepResult sweep_zc(const ModelParams& params_symmetric, std::span<const double> z0_grid,
                     const SweepOptions& options = {});

/// As above with a precomputed decomposition of H(params_symmetric).
SweepResult sweep_zc(const ModelParams& params_symmetric, const Spectrum& spectrum,
                     std::span<const double> z0_grid, const SweepOptions& options = {});

/// Dominant angular frequency of a sampled signal from the mean spacing of
/// zero crossings. A crossing is counted when the signal moves from above
/// +band to below -band or back, band = hysteresis * max|z|, so that
/// low-amplitude jitter does not register. Returns 0 with fewer than two
/// crossings.
double zero_crossing_frequency(const ImbalanceTrace& trace, double hysteresis = 0.05);

}  // namespace bosewell
