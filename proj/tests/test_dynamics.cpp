#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "bosewell/analysis.hpp"
#include "bosewell/dynamics.hpp"
#include "bosewell/eigensolve.hpp"
#include "bosewell/model.hpp"
#include "oracles.hpp"

using namespace bosewell;

namespace {

Spectrum symmetric_spectrum(const ModelParams& p) {
  return eigh_tridiagonal(build_hamiltonian(p));
}

// Expands Fock amplitudes in a spectrum by hand.
InitialState state_from_fock(std::vector<double> amps, const Spectrum& s) {
  InitialState st;
  st.coeffs.resize(s.dim());
  for (std::size_t m = 0; m < s.dim(); ++m) {
    const auto v = s.vector(m);
    st.coeffs[m] = std::inner_product(v.begin(), v.end(), amps.begin(), 0.0);
  }
  st.z0 = imbalance_of_state(amps);
  st.amplitudes_fock = std::move(amps);
  return st;
}

}  // namespace

TEST(ImbalanceOfState, Examples) {
  EXPECT_DOUBLE_EQ(imbalance_of_state(std::vector<double>{0, 0, 0, 1}), 1.0);
  EXPECT_DOUBLE_EQ(imbalance_of_state(std::vector<double>{1, 0, 0, 0}), -1.0);
  const std::vector<double> uniform(7, 1.0 / std::sqrt(7.0));
  EXPECT_NEAR(imbalance_of_state(uniform), 0.0, 1e-15);
  EXPECT_THROW(imbalance_of_state(std::vector<double>{1, 1}), std::invalid_argument);
  EXPECT_THROW(imbalance_of_state(std::vector<double>{1}), std::invalid_argument);
}

TEST(PrepareInitial, ZeroTargetIsSymmetricGroundState) {
  const auto p = make_params(10, 0.7, 1.0, 0.0);
  const auto st = prepare_initial(0.0, p);
  EXPECT_EQ(st.delta_used, 0.0);
  EXPECT_NEAR(st.coeffs[0], 1.0, 1e-12);
  for (std::size_t m = 1; m < st.coeffs.size(); ++m) EXPECT_NEAR(st.coeffs[m], 0.0, 1e-12);
}

// Two-level case, H = [[-d/2, -J], [-J, d/2]]: the ground state has
// imbalance -d / sqrt(d^2 + 4 J^2).
TEST(PrepareInitial, TwoLevelClosedForm) {
  const auto p = make_params(1, 1.0, 0.0, 0.0);
  const auto st = prepare_initial(0.6, p);
  const double delta = -2.0 * 0.6 / std::sqrt(1.0 - 0.36);
  EXPECT_NEAR(st.delta_used, delta, 1e-7);
  EXPECT_NEAR(st.z0, 0.6, 1e-8);

  const double r = std::hypot(delta, 2.0);
  // Normalised ground state (a0, a1) with a1 > a0 > 0 for delta < 0.
  const double a0 = std::sqrt(0.5 * (1.0 + delta / r));
  const double a1 = std::sqrt(0.5 * (1.0 - delta / r));
  EXPECT_NEAR(st.amplitudes_fock[0], a0, 1e-8);
  EXPECT_NEAR(st.amplitudes_fock[1], a1, 1e-8);
  // Symmetric basis: (1,1)/sqrt2 at -J, (1,-1)/sqrt2 at +J.
  EXPECT_NEAR(st.coeffs[0], (a0 + a1) / std::sqrt(2.0), 1e-8);
  EXPECT_NEAR(std::abs(st.coeffs[1]), std::abs(a0 - a1) / std::sqrt(2.0), 1e-8);
}

TEST(PrepareInitial, MatchesDenseOracle) {
  for (int n : {4, 12, 30}) {
    const auto p = make_params(n, 0.8, 1.0, 0.0);
    const auto s = symmetric_spectrum(p);
    for (double z0 : {-0.5, 0.2, 0.75}) {
      const auto st = prepare_initial(z0, p, s);
      EXPECT_NEAR(st.z0, z0, 1e-8);
      const Eigen::VectorXd g =
          oracle::dense_ground_state(oracle::dense_hamiltonian(n, 0.8, 1.0, st.delta_used));
      for (int k = 0; k <= n; ++k) EXPECT_NEAR(st.amplitudes_fock[k], g(k), 1e-9);
      const double z_oracle = g.dot(oracle::dense_imbalance(n) * g);
      EXPECT_NEAR(z_oracle, z0, 1e-8);
      double norm = 0.0;
      for (double c : st.coeffs) norm += c * c;
      EXPECT_NEAR(norm, 1.0, 1e-12);
    }
  }
}

TEST(PrepareInitial, ImbalanceIsMonotoneInDelta) {
  const auto p = make_params(20, 0.5, 1.0, 0.0);
  double previous = 2.0;
  for (double delta = -40.0; delta <= 40.0; delta += 0.5) {
    const double z = ground_state_imbalance(p, delta);
    EXPECT_LE(z, previous + 1e-12);
    previous = z;
  }
}

TEST(PrepareInitial, Errors) {
  const auto p = make_params(6, 1.0, 1.0, 0.0);
  EXPECT_THROW(prepare_initial(1.0, p), std::domain_error);
  EXPECT_THROW(prepare_initial(-1.2, p), std::domain_error);
  EXPECT_THROW(prepare_initial(0.3, make_params(6, 1.0, 1.0, 0.5)), std::invalid_argument);
  EXPECT_THROW(prepare_initial(0.3, p, symmetric_spectrum(make_params(5, 1.0, 1.0, 0.0))),
               std::invalid_argument);
  // The two-level imbalance at the bracket cap |delta| = 1e6 J is 1 - 2e-12.
  EXPECT_THROW(prepare_initial(1.0 - 1e-14, make_params(1, 1.0, 0.0, 0.0)), NoSolutionError);
}

TEST(EvolveImbalance, TwoLevelRabi) {
  const auto p = make_params(1, 1.0, 0.0, 0.0);
  const auto s = symmetric_spectrum(p);
  const auto st = state_from_fock({0.0, 1.0}, s);
  std::vector<double> times;
  for (int i = 0; i <= 200; ++i) times.push_back(0.05 * i);
  const auto trace = evolve_imbalance(st, s, times);
  for (std::size_t i = 0; i < times.size(); ++i) {
    EXPECT_NEAR(trace.z[i], std::cos(2.0 * times[i]), 1e-12);
  }
}

TEST(EvolveImbalance, GroundStateIsStationary) {
  const auto p = make_params(16, 0.4, 1.0, 0.0);
  const auto s = symmetric_spectrum(p);
  const auto st = prepare_initial(0.0, p, s);
  const auto trace = evolve_imbalance(st, s, time_grid(1.0, 5.0, 40));
  for (double z : trace.z) EXPECT_NEAR(z, 0.0, 1e-12);
  EXPECT_NEAR(window_average(st, s, 17.0), 0.0, 1e-12);
}

TEST(EvolveImbalance, MatchesDenseExponentiation) {
  for (int n : {3, 8, 15}) {
    for (double j : {0.3, 2.0}) {
      const auto p = make_params(n, j, 1.0, 0.0);
      const auto s = symmetric_spectrum(p);
      const auto st = prepare_initial(0.45, p, s);
      const auto times = time_grid(2.0 * std::numbers::pi / plasma_frequency(p), 4.0, 50);
      const auto trace = evolve_imbalance(st, s, times);
      Eigen::VectorXd psi0(n + 1);
      for (int k = 0; k <= n; ++k) psi0(k) = st.amplitudes_fock[k];
      const auto ref = oracle::dense_imbalance_trace(oracle::dense_hamiltonian(n, j, 1.0, 0.0),
                                                     psi0, times);
      for (std::size_t i = 0; i < times.size(); ++i) EXPECT_NEAR(trace.z[i], ref[i], 1e-10);
    }
  }
}

TEST(EvolveImbalance, TraceInvariants) {
  const auto p = make_params(40, 1.0, 1.0, 0.0);
  const auto s = symmetric_spectrum(p);
  const auto st = prepare_initial(0.65, p, s);
  const auto times = time_grid(0.3, 30.0, 64);
  const auto trace = evolve_imbalance(st, s, times);
  ASSERT_EQ(trace.times, times);
  EXPECT_NEAR(trace.z[0], st.z0, 1e-10);
  for (double z : trace.z) EXPECT_LE(std::abs(z), 1.0 + 1e-12);
}

TEST(EvolveImbalance, TimeReversal) {
  const auto p = make_params(25, 0.9, 1.0, 0.0);
  const auto s = symmetric_spectrum(p);
  const auto st = prepare_initial(0.4, p, s);
  std::vector<double> forward;
  std::vector<double> backward;
  for (int i = 0; i < 300; ++i) {
    forward.push_back(0.037 * i);
    backward.push_back(-0.037 * i);
  }
  const auto a = evolve_imbalance(st, s, forward);
  const auto b = evolve_imbalance(st, s, backward);
  for (std::size_t i = 0; i < forward.size(); ++i) EXPECT_NEAR(a.z[i], b.z[i], 1e-12);
}

TEST(EvolveImbalance, ThreadCountDoesNotChangeResult) {
  const auto p = make_params(60, 1.5, 1.0, 0.0);
  const auto s = symmetric_spectrum(p);
  const auto st = prepare_initial(0.5, p, s);
  const auto times = time_grid(0.1, 20.0, 50);
  const auto one = evolve_imbalance(st, s, times, 1);
  for (unsigned threads : {2u, 3u, 8u}) {
    EXPECT_EQ(evolve_imbalance(st, s, times, threads).z, one.z);
  }
}

TEST(EvolveImbalance, DimensionMismatch) {
  const auto s4 = symmetric_spectrum(make_params(4, 1.0, 1.0, 0.0));
  const auto p5 = make_params(5, 1.0, 1.0, 0.0);
  const auto st = prepare_initial(0.2, p5);
  const std::vector<double> t{0.0};
  EXPECT_THROW(evolve_imbalance(st, s4, t), std::invalid_argument);
}

TEST(CoherenceMatrix, SymmetricWithVanishingDiagonal) {
  const auto p = make_params(30, 0.2, 1.0, 0.0);
  const auto s = symmetric_spectrum(p);
  const CoherenceMatrix cm(prepare_initial(0.7, p, s), s);
  for (std::size_t m = 0; m < cm.dim(); ++m) {
    EXPECT_LE(std::abs(cm.entry(m, m)), 1e-12);
    for (std::size_t m2 = 0; m2 < cm.dim(); ++m2) {
      EXPECT_EQ(cm.entry(m, m2), cm.entry(m2, m));
      EXPECT_EQ(cm.frequency(m, m2), -cm.frequency(m2, m));
    }
  }
  EXPECT_LE(std::abs(cm.diagonal_sum()), 1e-12 * cm.dim());
}

TEST(PropagateOracle, ZeroHamiltonianIsIdentity) {
  const TridiagonalMatrix zero{{0.0, 0.0, 0.0}, {0.0, 0.0}};
  const std::vector<std::complex<double>> psi{{0.6, 0.0}, {0.0, 0.8}, {0.0, 0.0}};
  const auto out = propagate_oracle(psi, zero, 5.0, 0.1);
  for (std::size_t k = 0; k < psi.size(); ++k) EXPECT_EQ(out[k], psi[k]);
}

TEST(PropagateOracle, TwoLevelRabi) {
  const auto t = build_hamiltonian(make_params(1, 1.0, 0.0, 0.0));
  const std::vector<std::complex<double>> psi{{0.0, 0.0}, {1.0, 0.0}};
  const double dt = max_oracle_step(t);
  for (double tf : {0.3, 1.7, 4.0}) {
    const auto out = propagate_oracle(psi, t, tf, dt);
    EXPECT_NEAR(imbalance_of_state(out), std::cos(2.0 * tf), 1e-8);
  }
  EXPECT_THROW(propagate_oracle(psi, t, 1.0, 2.0 * dt), std::invalid_argument);
}

TEST(PropagateOracle, AgreesWithSpectralEvolution) {
  const auto p = make_params(12, 1.0, 1.0, 0.0);
  const auto t = build_hamiltonian(p);
  const auto s = eigh_tridiagonal(t);
  const auto st = prepare_initial(0.5, p, s);
  const double period = 2.0 * std::numbers::pi / plasma_frequency(p);
  std::vector<std::complex<double>> psi(st.amplitudes_fock.begin(), st.amplitudes_fock.end());
  const double dt = max_oracle_step(t);
  const int steps = 40;
  double worst = 0.0;
  double norm_drift = 0.0;
  for (int i = 1; i <= steps; ++i) {
    const double span = 10.0 * period / steps;
    psi = propagate_oracle(psi, t, span, dt);
    double norm = 0.0;
    for (const auto& a : psi) norm += std::norm(a);
    norm_drift = std::max(norm_drift, std::abs(norm - 1.0));
    const std::vector<double> when{i * span};
    worst = std::max(worst,
                     std::abs(imbalance_of_state(psi) - evolve_imbalance(st, s, when).z[0]));
  }
  EXPECT_LT(worst, 1e-6);
  EXPECT_LT(norm_drift, 1e-8);
}

TEST(OccupationMap, RowsAreDistributions) {
  const auto p = make_params(30, 1.0, 1.0, 0.0);
  const std::vector<double> grid{0.0, 0.1, 0.5, 0.9, -0.4};
  const auto rows = occupation_map(p, grid, 3);
  ASSERT_EQ(rows.size(), grid.size());
  for (const auto& row : rows) {
    ASSERT_EQ(row.size(), 31u);
    double sum = 0.0;
    for (double x : row) {
      EXPECT_GE(x, 0.0);
      EXPECT_LE(x, 1.0);
      sum += x;
    }
    EXPECT_NEAR(sum, 1.0, 1e-10);
  }
  EXPECT_NEAR(rows[0][0], 1.0, 1e-12);
  EXPECT_EQ(occupation_map(p, grid, 1), rows);
  EXPECT_THROW(occupation_map(p, std::vector<double>{0.2, 1.0}), std::domain_error);
}

// Below z_c only the equidistant lower band is populated, above it the
// doublets are.
TEST(OccupationMap, SupportFollowsSeparatrix) {
  const auto p = make_params(100, 100.0 / 30.0, 1.0, 0.0);
  const auto s = symmetric_spectrum(p);
  const auto report = classify_spectrum(s);
  ASSERT_LT(report.separatrix_index, s.dim());
  const std::vector<double> grid{0.3, 0.7};
  const auto rows = occupation_map(p, grid);
  const auto weight_above = [&](const std::vector<double>& row) {
    return std::accumulate(row.begin() + static_cast<std::ptrdiff_t>(report.separatrix_index),
                           row.end(), 0.0);
  };
  EXPECT_LT(weight_above(rows[0]), 1e-3);
  EXPECT_GT(weight_above(rows[1]), 0.5);
}

TEST(WindowAverage, MatchesDenseSampling) {
  for (int n : {6, 20, 50}) {
    const auto p = make_params(n, 0.6, 1.0, 0.0);
    const auto s = symmetric_spectrum(p);
    const auto st = prepare_initial(0.55, p, s);
    const double window = 40.0;
    const int samples = 20000;
    std::vector<double> mids;
    for (int i = 0; i < samples; ++i) mids.push_back(window * (i + 0.5) / samples);
    const auto trace = evolve_imbalance(st, s, mids, 4);
    const double sampled = std::accumulate(trace.z.begin(), trace.z.end(), 0.0) / samples;
    EXPECT_NEAR(sampled, window_average(st, s, window), 1e-3) << "N=" << n;
  }
}

// Parameters keep every level spacing (doublets included) well above
// rounding so that all cross terms are resolvable.
TEST(WindowAverage, LongWindowTendsToDiagonal) {
  for (auto [n, j] : {std::pair{4, 0.3}, std::pair{10, 1.0}, std::pair{20, 3.0}}) {
    const auto p = make_params(n, j, 1.0, 0.0);
    const auto s = symmetric_spectrum(p);
    const auto st = prepare_initial(0.8, p, s);
    double gap = INFINITY;
    for (std::size_t m = 1; m < s.dim(); ++m) gap = std::min(gap, s.values[m] - s.values[m - 1]);
    ASSERT_GT(gap, 1e-9);
    EXPECT_NEAR(window_average(st, s, 1e4 / gap), 0.0, 1e-3) << "N=" << n;
  }
}

TEST(WindowAverage, RejectsEmptyWindow) {
  const auto p = make_params(4, 1.0, 1.0, 0.0);
  const auto s = symmetric_spectrum(p);
  const auto st = prepare_initial(0.2, p, s);
  EXPECT_THROW(window_average(st, s, 0.0), std::invalid_argument);
  EXPECT_THROW(window_average(st, s, -1.0), std::invalid_argument);
}

TEST(TimeGrid, Shape) {
  const auto g = time_grid(2.0, 3.0, 4);
  ASSERT_EQ(g.size(), 13u);
  EXPECT_EQ(g.front(), 0.0);
  EXPECT_NEAR(g.back(), 6.0, 1e-15);
  EXPECT_THROW(time_grid(0.0, 1.0, 4), std::invalid_argument);
}
