#include "bosewell/eigensolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#if defined(__SSE2__)
#include <xmmintrin.h>
#endif

namespace bosewell {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void check_input(const TridiagonalMatrix& matrix) {
  const std::size_t n = matrix.dim();
  if (n == 0) {
    throw std::invalid_argument("eigh_tridiagonal: matrix dimension must be >= 1");
  }
  if (matrix.offdiag.size() + 1 != n) {
    throw std::invalid_argument("eigh_tridiagonal: offdiagonal length must be dim - 1");
  }
  const auto finite = [](double x) { return std::isfinite(x); };
  if (!std::all_of(matrix.diag.begin(), matrix.diag.end(), finite) ||
      !std::all_of(matrix.offdiag.begin(), matrix.offdiag.end(), finite)) {
    throw std::invalid_argument("eigh_tridiagonal: matrix entries must be finite");
  }
}

// Number of eigenvalues strictly below x (Sturm sequence on the LDL^T pivots).
std::size_t count_below(const TridiagonalMatrix& t, double x, double pivmin) {
  std::size_t count = 0;
  double q = t.diag[0] - x;
  if (std::abs(q) < pivmin) q = -pivmin;
  if (q < 0.0) ++count;
  for (std::size_t i = 1; i < t.dim(); ++i) {
    const double e = t.offdiag[i - 1];
    q = t.diag[i] - x - e * e / q;
    if (std::abs(q) < pivmin) q = -pivmin;
    if (q < 0.0) ++count;
  }
  return count;
}

// Solves (T - shift I) x = rhs by Gaussian elimination with partial pivoting.
// Zero pivots are replaced by a tiny value so a singular shift still yields
// the dominant direction, which is what inverse iteration needs.
void shifted_solve(const TridiagonalMatrix& t, double shift, double tiny,
                   std::vector<double>& rhs) {
  const std::size_t n = t.dim();
  // Row i holds (a[i], b[i], c[i]) in columns (i, i+1, i+2) after pivoting.
  std::vector<double> a(n), b(n, 0.0), c(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = t.diag[i] - shift;
    if (i + 1 < n) b[i] = t.offdiag[i];
  }
  std::vector<double> lower(n > 0 ? n - 1 : 0, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double sub = t.offdiag[i];
    if (std::abs(a[i]) >= std::abs(sub)) {
      if (a[i] == 0.0) a[i] = tiny;
      const double f = sub / a[i];
      a[i + 1] -= f * b[i];
      rhs[i + 1] -= f * rhs[i];
    } else {
      // Swap rows i and i+1.
      const double f = a[i] / sub;
      const double ai1 = a[i + 1];
      const double bi1 = (i + 2 < n) ? b[i + 1] : 0.0;
      a[i] = sub;
      const double old_b = b[i];
      b[i] = ai1;
      c[i] = bi1;
      a[i + 1] = old_b - f * ai1;
      if (i + 2 < n) b[i + 1] = -f * bi1;
      std::swap(rhs[i], rhs[i + 1]);
      rhs[i + 1] -= f * rhs[i];
    }
  }
  if (a[n - 1] == 0.0) a[n - 1] = tiny;
  for (std::size_t ii = n; ii-- > 0;) {
    double s = rhs[ii];
    if (ii + 1 < n) s -= b[ii] * rhs[ii + 1];
    if (ii + 2 < n) s -= c[ii] * rhs[ii + 2];
    double pivot = a[ii];
    if (pivot == 0.0) pivot = tiny;
    rhs[ii] = s / pivot;
  }
}

void normalize(std::span<double> v) {
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
}

}  // namespace

void fix_sign(std::span<double> v) {
  for (double x : v) {
    if (std::abs(x) > 1e-14) {
      if (x < 0.0) {
        for (double& y : v) y = -y;
      }
      return;
    }
  }
}

double frobenius_norm(const TridiagonalMatrix& matrix) {
  double s = 0.0;
  for (double d : matrix.diag) s += d * d;
  for (double e : matrix.offdiag) s += 2.0 * e * e;
  return std::sqrt(s);
}

namespace {

struct Eigenpairs {
  std::vector<double> values;
  std::vector<double> vectors;  // vector i in [i*n, (i+1)*n)
};

// Implicit QL with Wilkinson shifts on diagonal d and offdiagonal e
// (e[i] couples i and i+1). Unsorted output. `index_offset` only labels errors.
// Localised eigenvectors (random matrices, deep self-trapping) push most
// rotation operands into the subnormal range, where x86 arithmetic is
// dozens of times slower. Flushing them to zero changes nothing above
// 2.2e-308. MXCSR is per thread, so this is safe under parallel callers.
class FlushSubnormals {
 public:
#if defined(__SSE2__)
  FlushSubnormals() : saved_(_mm_getcsr()) { _mm_setcsr(saved_ | 0x8040); }
  ~FlushSubnormals() { _mm_setcsr(saved_); }

 private:
  unsigned saved_;
#endif
};

// Applies one QL sweep's plane rotations, i = hi-1 down to lo, to the
// eigenvector rows. Working through the columns in blocks keeps the touched
// row segments in cache; the arithmetic per element is unchanged.
void apply_rotations(std::vector<double>& z, std::size_t n, std::size_t lo, std::size_t hi,
                     const std::vector<double>& cs, const std::vector<double>& sn) {
  constexpr std::size_t kBlock = 128;
  for (std::size_t k0 = 0; k0 < n; k0 += kBlock) {
    const std::size_t k1 = std::min(n, k0 + kBlock);
    for (std::size_t i = hi; i-- > lo;) {
      const double c = cs[i];
      const double s = sn[i];
      double* __restrict zi = z.data() + i * n;
      double* __restrict zi1 = z.data() + (i + 1) * n;
      for (std::size_t k = k0; k < k1; ++k) {
        const double f = zi1[k];
        zi1[k] = s * zi[k] + c * f;
        zi[k] = c * zi[k] - s * f;
      }
    }
  }
}

Eigenpairs ql_implicit(std::vector<double> d, const std::vector<double>& offdiag,
                       std::size_t index_offset) {
  const std::size_t n = d.size();
  std::vector<double> e(n, 0.0);
  std::copy(offdiag.begin(), offdiag.end(), e.begin());

  std::vector<double> z(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) z[i * n + i] = 1.0;
  std::vector<double> cs(n);
  std::vector<double> sn(n);

  for (std::size_t l = 0; l < n; ++l) {
    int iter = 0;
    std::size_t m = l;
    do {
      for (m = l; m + 1 < n; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= kEps * dd) break;
      }
      if (m == l) break;
      if (iter++ == kMaxQlIterations) {
        const std::size_t index = index_offset + l;
        throw ConvergenceError(index, "eigh_tridiagonal: no convergence for eigenvalue index " +
                                          std::to_string(index) + " after " +
                                          std::to_string(kMaxQlIterations) + " iterations");
      }
      // Wilkinson shift from the leading 2x2 block.
      double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
      double r = std::hypot(g, 1.0);
      g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
      double s = 1.0;
      double c = 1.0;
      double p = 0.0;
      bool underflow = false;
      std::size_t lowest = m;  // rotations recorded for rows [lowest, m)
      for (std::size_t i = m; i-- > l;) {
        double f = s * e[i];
        const double b = c * e[i];
        r = std::hypot(f, g);
        e[i + 1] = r;
        if (r == 0.0) {
          d[i + 1] -= p;
          e[m] = 0.0;
          underflow = true;
          break;
        }
        s = f / r;
        c = g / r;
        g = d[i + 1] - p;
        r = (d[i] - g) * s + 2.0 * c * b;
        p = s * r;
        d[i + 1] = g + p;
        g = c * r - b;
        cs[i] = c;
        sn[i] = s;
        lowest = i;
      }
      apply_rotations(z, n, lowest, m, cs, sn);
      if (underflow) continue;
      d[l] -= p;
      e[l] = g;
      e[m] = 0.0;
    } while (m != l);
  }
  return {std::move(d), std::move(z)};
}

bool is_persymmetric(const TridiagonalMatrix& t) {
  const std::size_t n = t.dim();
  for (std::size_t i = 0; i < n / 2; ++i) {
    if (t.diag[i] != t.diag[n - 1 - i]) return false;
  }
  for (std::size_t i = 0; i < t.offdiag.size() / 2; ++i) {
    if (t.offdiag[i] != t.offdiag[t.offdiag.size() - 1 - i]) return false;
  }
  return true;
}

// A persymmetric matrix commutes with the reversal k -> n-1-k, so it splits
// into even (v[k] = v[n-1-k]) and odd (v[k] = -v[n-1-k]) blocks of about n/2.
// Solving the blocks separately keeps every eigenvector an exact parity
// eigenstate even when doublet splittings fall below machine precision.
Eigenpairs parity_decompose(const TridiagonalMatrix& t) {
  const std::size_t n = t.dim();
  const std::size_t half = n / 2;
  const double r2 = std::sqrt(2.0);
  const double inv_r2 = 1.0 / r2;

  std::vector<double> even_d(t.diag.begin(), t.diag.begin() + static_cast<std::ptrdiff_t>(half));
  std::vector<double> odd_d = even_d;
  std::vector<double> even_e;
  std::vector<double> odd_e;
  if (half >= 2) {
    even_e.assign(t.offdiag.begin(), t.offdiag.begin() + static_cast<std::ptrdiff_t>(half - 1));
    odd_e = even_e;
  }
  if (n % 2 == 0) {
    // Rows half-1 and half couple through offdiag[half-1].
    even_d[half - 1] += t.offdiag[half - 1];
    odd_d[half - 1] -= t.offdiag[half - 1];
  } else {
    // Centre row `half` belongs to the even block only; rescaling the outer
    // components by sqrt(2) keeps the block symmetric.
    even_d.push_back(t.diag[half]);
    even_e.push_back(r2 * t.offdiag[half - 1]);
  }

  const Eigenpairs even = ql_implicit(even_d, even_e, 0);
  const Eigenpairs odd = ql_implicit(odd_d, odd_e, even_d.size());

  Eigenpairs out;
  out.values.reserve(n);
  out.vectors.assign(n * n, 0.0);
  std::size_t slot = 0;
  const std::size_t ne = even_d.size();
  for (std::size_t i = 0; i < ne; ++i, ++slot) {
    out.values.push_back(even.values[i]);
    const double* x = even.vectors.data() + i * ne;
    double* v = out.vectors.data() + slot * n;
    for (std::size_t k = 0; k < half; ++k) {
      v[k] = x[k] * inv_r2;
      v[n - 1 - k] = x[k] * inv_r2;
    }
    if (n % 2 == 1) v[half] = x[half];
  }
  const std::size_t no = odd_d.size();
  for (std::size_t i = 0; i < no; ++i, ++slot) {
    out.values.push_back(odd.values[i]);
    const double* x = odd.vectors.data() + i * no;
    double* v = out.vectors.data() + slot * n;
    for (std::size_t k = 0; k < half; ++k) {
      v[k] = x[k] * inv_r2;
      v[n - 1 - k] = -x[k] * inv_r2;
    }
  }
  return out;
}

}  // namespace

Spectrum eigh_tridiagonal(const TridiagonalMatrix& matrix) {
  check_input(matrix);
  const FlushSubnormals ftz;
  const std::size_t n = matrix.dim();
  const bool parity = n >= 2 && is_persymmetric(matrix);
  Eigenpairs pairs = parity ? parity_decompose(matrix)
                            : ql_implicit(matrix.diag, matrix.offdiag, 0);

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return pairs.values[a] < pairs.values[b];
  });

  // With all couplings negative the exact levels alternate even, odd, even,
  // ... Doublets split below rounding can come out inverted; interleave the
  // blocks and absorb inversions at rounding level.
  const bool negative = std::all_of(matrix.offdiag.begin(), matrix.offdiag.end(),
                                    [](double e) { return e < 0.0; });
  if (parity && negative) {
    const std::size_t ne = (n + 1) / 2;
    const double slack = 16.0 * kEps * frobenius_norm(matrix);
    std::vector<std::size_t> interleaved(n);
    std::vector<std::size_t> even(ne);
    std::vector<std::size_t> odd(n - ne);
    for (std::size_t i = 0; i < ne; ++i) even[i] = i;
    for (std::size_t i = 0; i < n - ne; ++i) odd[i] = ne + i;
    const auto by_value = [&](std::size_t a, std::size_t b) {
      return pairs.values[a] < pairs.values[b];
    };
    std::stable_sort(even.begin(), even.end(), by_value);
    std::stable_sort(odd.begin(), odd.end(), by_value);
    for (std::size_t m = 0; m < n; ++m) interleaved[m] = m % 2 == 0 ? even[m / 2] : odd[m / 2];
    bool consistent = true;
    for (std::size_t m = 1; m < n; ++m) {
      if (pairs.values[interleaved[m]] < pairs.values[interleaved[m - 1]] - slack) {
        consistent = false;
      }
    }
    if (consistent) {
      order = interleaved;
      for (std::size_t m = 1; m < n; ++m) {
        double& v = pairs.values[order[m]];
        v = std::max(v, pairs.values[order[m - 1]]);
      }
    }
  }

  Spectrum spectrum;
  spectrum.values.resize(n);
  spectrum.vectors.resize(n * n);
  for (std::size_t m = 0; m < n; ++m) {
    spectrum.values[m] = pairs.values[order[m]];
    std::copy_n(pairs.vectors.begin() + static_cast<std::ptrdiff_t>(order[m] * n), n,
                spectrum.vectors.begin() + static_cast<std::ptrdiff_t>(m * n));
    fix_sign(spectrum.vector(m));
  }
  return spectrum;
}

GroundState ground_vector(const TridiagonalMatrix& matrix) {
  check_input(matrix);
  const std::size_t n = matrix.dim();
  if (n == 1) return {matrix.diag[0], {1.0}};

  // Gershgorin interval.
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  double max_e2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double radius = 0.0;
    if (i > 0) radius += std::abs(matrix.offdiag[i - 1]);
    if (i + 1 < n) radius += std::abs(matrix.offdiag[i]);
    lo = std::min(lo, matrix.diag[i] - radius);
    hi = std::max(hi, matrix.diag[i] + radius);
    if (i + 1 < n) max_e2 = std::max(max_e2, matrix.offdiag[i] * matrix.offdiag[i]);
  }
  const double scale = std::max(std::abs(lo), std::abs(hi));
  const double pivmin = std::max(std::numeric_limits<double>::min(),
                                 std::numeric_limits<double>::min() * max_e2);
  const double tol = 2.0 * kEps * std::max(scale, std::numeric_limits<double>::min());
  // Invariant: count_below(lo) == 0, count_below(hi) >= 1.
  hi += tol;
  lo -= tol;
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (count_below(matrix, mid, pivmin) >= 1) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  const double energy = 0.5 * (lo + hi);

  std::vector<double> v(n, 1.0);
  normalize(v);
  const double tiny = kEps * std::max(scale, 1.0);
  for (int it = 0; it < 4; ++it) {
    shifted_solve(matrix, energy, tiny, v);
    normalize(v);
  }
  fix_sign(v);
  return {energy, std::move(v)};
}

}  // namespace bosewell
