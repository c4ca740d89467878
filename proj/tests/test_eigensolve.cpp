#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numeric>
#include <random>

#include "bosewell/eigensolve.hpp"
#include "bosewell/model.hpp"

using namespace bosewell;

namespace {

double residual(const TridiagonalMatrix& t, const Spectrum& s, std::size_t m) {
  const auto v = s.vector(m);
  const std::size_t n = t.dim();
  double r2 = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double tv = t.diag[k] * v[k];
    if (k > 0) tv += t.offdiag[k - 1] * v[k - 1];
    if (k + 1 < n) tv += t.offdiag[k] * v[k + 1];
    const double r = tv - s.values[m] * v[k];
    r2 += r * r;
  }
  return std::sqrt(r2);
}

void expect_decomposition_quality(const TridiagonalMatrix& t, const Spectrum& s) {
  const std::size_t n = t.dim();
  ASSERT_EQ(s.dim(), n);
  const double norm = frobenius_norm(t);
  for (std::size_t m = 0; m < n; ++m) {
    if (m > 0) {
      EXPECT_LE(s.values[m - 1], s.values[m]);
    }
    EXPECT_LE(residual(t, s, m), 1e-10 * norm) << "m=" << m;
  }
  // Orthonormality, sampled on a stride for big matrices.
  const std::size_t stride = n > 300 ? 37 : 1;
  for (std::size_t a = 0; a < n; a += stride) {
    for (std::size_t b = 0; b < n; ++b) {
      const auto va = s.vector(a);
      const auto vb = s.vector(b);
      const double dot = std::inner_product(va.begin(), va.end(), vb.begin(), 0.0);
      EXPECT_LE(std::abs(dot - (a == b ? 1.0 : 0.0)), 1e-10) << a << "," << b;
    }
  }
}

TridiagonalMatrix random_tridiagonal(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  TridiagonalMatrix t;
  t.diag.resize(n);
  t.offdiag.resize(n - 1);
  for (auto& d : t.diag) d = 5.0 * dist(rng);
  for (auto& e : t.offdiag) e = dist(rng);
  return t;
}

int sign_changes(std::span<const double> v) {
  double vmax = 0.0;
  for (double x : v) vmax = std::max(vmax, std::abs(x));
  int changes = 0;
  int last = 0;
  for (double x : v) {
    if (std::abs(x) <= 1e-12 * vmax) continue;
    const int s = x > 0 ? 1 : -1;
    if (last != 0 && s != last) ++changes;
    last = s;
  }
  return changes;
}

}  // namespace

TEST(EighTridiagonal, TwoByTwo) {
  const auto s = eigh_tridiagonal({{0.0, 0.0}, {-0.5}});
  EXPECT_NEAR(s.values[0], -0.5, 1e-15);
  EXPECT_NEAR(s.values[1], 0.5, 1e-15);
  const double r = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(s.vector(0)[0], r, 1e-15);
  EXPECT_NEAR(s.vector(0)[1], r, 1e-15);
  EXPECT_NEAR(s.vector(1)[0], r, 1e-15);
  EXPECT_NEAR(s.vector(1)[1], -r, 1e-15);
}

// diag (1,0,1), offdiag (c,c): the odd vector (1,0,-1) gives 1; the even
// block [[1, sqrt2 c], [sqrt2 c, 0]] gives (1 -+ sqrt(1 + 8c^2))/2.
TEST(EighTridiagonal, ThreeByThreeClosedForm) {
  for (double c : {-std::sqrt(0.5), -std::sqrt(2.0)}) {
    const auto s = eigh_tridiagonal({{1.0, 0.0, 1.0}, {c, c}});
    const double root = std::sqrt(1.0 + 8.0 * c * c);
    EXPECT_NEAR(s.values[0], 0.5 * (1.0 - root), 1e-14);
    EXPECT_NEAR(s.values[1], 1.0, 1e-14);
    EXPECT_NEAR(s.values[2], 0.5 * (1.0 + root), 1e-14);
  }
  const auto s = eigh_tridiagonal({{1.0, 0.0, 1.0}, {-std::sqrt(0.5), -std::sqrt(0.5)}});
  EXPECT_NEAR(s.values[0], (1.0 - std::sqrt(5.0)) / 2.0, 1e-14);
  EXPECT_NEAR(s.values[2], (1.0 + std::sqrt(5.0)) / 2.0, 1e-14);
}

TEST(EighTridiagonal, TraceInvariance) {
  std::mt19937_64 rng(7);
  for (std::size_t n : {1u, 2u, 5u, 33u, 120u}) {
    const auto t = n == 1 ? TridiagonalMatrix{{2.5}, {}} : random_tridiagonal(n, rng);
    const auto s = eigh_tridiagonal(t);
    const double trace = std::accumulate(t.diag.begin(), t.diag.end(), 0.0);
    const double sum = std::accumulate(s.values.begin(), s.values.end(), 0.0);
    EXPECT_NEAR(sum, trace, 1e-12 * (1.0 + std::abs(trace)) * n);
  }
}

TEST(EighTridiagonal, AgreesWithDenseSolver) {
  std::mt19937_64 rng(20240601);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + rng() % 49;
    const auto t = random_tridiagonal(n, rng);
    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      dense(i, i) = t.diag[i];
      if (i + 1 < n) dense(i, i + 1) = dense(i + 1, i) = t.offdiag[i];
    }
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ref(dense);
    const auto s = eigh_tridiagonal(t);
    for (std::size_t m = 0; m < n; ++m) {
      EXPECT_NEAR(s.values[m], ref.eigenvalues()(m), 1e-10) << "n=" << n << " m=" << m;
    }
    expect_decomposition_quality(t, s);
  }
}

TEST(EighTridiagonal, HamiltonianQuality) {
  for (int n : {1, 2, 3, 10, 101, 400}) {
    for (double j : {0.05, 0.5, 3.333}) {
      const auto t = build_hamiltonian(make_params(n, j, 1.0, n % 2 ? 0.0 : -0.3));
      expect_decomposition_quality(t, eigh_tridiagonal(t));
    }
  }
}

TEST(EighTridiagonal, SignConvention) {
  std::mt19937_64 rng(3);
  const auto s = eigh_tridiagonal(random_tridiagonal(25, rng));
  for (std::size_t m = 0; m < s.dim(); ++m) {
    for (double x : s.vector(m)) {
      if (std::abs(x) > 1e-14) {
        EXPECT_GT(x, 0.0);
        break;
      }
    }
  }
}

TEST(EighTridiagonal, ScalingCovariance) {
  std::mt19937_64 rng(11);
  const auto t = random_tridiagonal(30, rng);
  auto scaled = t;
  const double alpha = 3.7;
  for (auto& d : scaled.diag) d *= alpha;
  for (auto& e : scaled.offdiag) e *= alpha;
  const auto a = eigh_tridiagonal(t);
  const auto b = eigh_tridiagonal(scaled);
  for (std::size_t m = 0; m < a.dim(); ++m) {
    EXPECT_NEAR(b.values[m], alpha * a.values[m], 1e-12 * std::abs(alpha * a.values[m]) + 1e-13);
    const auto va = a.vector(m);
    const auto vb = b.vector(m);
    const double dot = std::inner_product(va.begin(), va.end(), vb.begin(), 0.0);
    EXPECT_NEAR(std::abs(dot), 1.0, 1e-10);
  }
}

TEST(EighTridiagonal, Deterministic) {
  const auto t = build_hamiltonian(make_params(60, 1.3, 1.0, 0.4));
  const auto a = eigh_tridiagonal(t);
  const auto b = eigh_tridiagonal(t);
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(a.vectors, b.vectors);
}

TEST(EighTridiagonal, ParityStructure) {
  for (int n : {1, 2, 9, 20, 100, 200}) {
    for (double j : {0.05, 0.333, 3.333}) {
      const auto s = eigh_tridiagonal(build_hamiltonian(make_params(n, j, 1.0, 0.0)));
      for (std::size_t m = 0; m < s.dim(); ++m) {
        const auto v = s.vector(m);
        double dev_even = 0.0;
        double dev_odd = 0.0;
        for (int i = 0; i <= n; ++i) {
          dev_even = std::max(dev_even, std::abs(v[n - i] - v[i]));
          dev_odd = std::max(dev_odd, std::abs(v[n - i] + v[i]));
        }
        EXPECT_LE(std::min(dev_even, dev_odd), 1e-9) << "N=" << n << " m=" << m;
        // Ascending levels alternate even, odd, even, ...
        EXPECT_EQ(dev_odd < dev_even, m % 2 == 1) << "N=" << n << " J/U=" << j << " m=" << m;
      }
    }
  }
}

// Nodes of localised states sit in tails far below the 1e-12 cut, where no
// double-precision vector resolves them, so the thresholded count is exact
// only when every entry clears the cut; otherwise it can only undercount.
TEST(EighTridiagonal, SturmSignChanges) {
  int resolved = 0;
  for (int n : {1, 2, 9, 20, 100, 200}) {
    for (double j : {0.05, 0.333, 3.333, 30.0}) {
      const auto s = eigh_tridiagonal(build_hamiltonian(make_params(n, j, 1.0, 0.0)));
      for (std::size_t m = 0; m < s.dim(); ++m) {
        const auto v = s.vector(m);
        double vmax = 0.0;
        double vmin = INFINITY;
        for (double x : v) {
          vmax = std::max(vmax, std::abs(x));
          vmin = std::min(vmin, std::abs(x));
        }
        const int count = sign_changes(v);
        EXPECT_LE(count, static_cast<int>(m));
        if (vmin > 1e-6 * vmax) {
          ++resolved;
          EXPECT_EQ(count, static_cast<int>(m)) << "N=" << n << " J/U=" << j << " m=" << m;
        }
      }
    }
  }
  EXPECT_GT(resolved, 100);
}

TEST(EighTridiagonal, LargeHamiltonianRuns) {
  const auto t = build_hamiltonian(make_params(1000, 3.0, 1.0, 0.0));
  const auto s = eigh_tridiagonal(t);
  EXPECT_EQ(s.dim(), 1001u);
  EXPECT_LE(residual(t, s, 0), 1e-10 * frobenius_norm(t));
  EXPECT_LE(residual(t, s, 1000), 1e-10 * frobenius_norm(t));
}

TEST(EighTridiagonal, RejectsMalformedInput) {
  EXPECT_THROW(eigh_tridiagonal({{}, {}}), std::invalid_argument);
  EXPECT_THROW(eigh_tridiagonal({{1.0, 2.0}, {}}), std::invalid_argument);
  EXPECT_THROW(eigh_tridiagonal({{1.0, NAN}, {0.5}}), std::invalid_argument);
}

TEST(ConvergenceError, CarriesIndex) {
  const ConvergenceError e(7, "stalled");
  EXPECT_EQ(e.index(), 7u);
  EXPECT_STREQ(e.what(), "stalled");
}

TEST(GroundVector, TwoByTwo) {
  const auto g = ground_vector({{0.0, 0.0}, {-0.5}});
  EXPECT_NEAR(g.energy, -0.5, 1e-15);
  EXPECT_NEAR(g.vector[0], 1.0 / std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(g.vector[1], 1.0 / std::sqrt(2.0), 1e-14);
}

TEST(GroundVector, ThreeByThreeIsPositive) {
  const auto g = ground_vector({{1.0, 0.0, 1.0}, {-std::sqrt(0.5), -std::sqrt(0.5)}});
  EXPECT_NEAR(g.energy, (1.0 - std::sqrt(5.0)) / 2.0, 1e-14);
  for (double x : g.vector) EXPECT_GT(x, 0.0);
}

TEST(GroundVector, DiagonalMatrix) {
  // J = 0, U = 1, N = 4: Fock state k = 2 has (U/2)(2 + 2) = 2.
  auto t = build_hamiltonian(make_params(4, 0.0, 1.0, 0.0));
  const auto g = ground_vector(t);
  EXPECT_NEAR(g.energy, 2.0, 1e-14);
  EXPECT_NEAR(g.vector[2], 1.0, 1e-12);
}

TEST(GroundVector, MatchesFullDecomposition) {
  for (int n : {1, 2, 7, 50, 100, 301}) {
    for (double delta : {0.0, -3.0, 17.0}) {
      for (double j : {0.1, 1.0, 3.333}) {
        const auto t = build_hamiltonian(make_params(n, j, 1.0, delta));
        const auto full = eigh_tridiagonal(t);
        const auto g = ground_vector(t);
        EXPECT_NEAR(g.energy, full.values[0], 1e-12 * (1.0 + std::abs(full.values[0])));
        const auto v0 = full.vector(0);
        for (std::size_t k = 0; k < v0.size(); ++k) {
          EXPECT_NEAR(g.vector[k], v0[k], 1e-9) << "N=" << n << " k=" << k;
          EXPECT_GT(g.vector[k], 0.0);
        }
      }
    }
  }
}
