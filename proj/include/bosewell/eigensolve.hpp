#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "bosewell/model.hpp"
#include "bosewell/spectrum.hpp"

namespace bosewell {

/// Implicit QL did not converge within the per-eigenvalue iteration cap.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(std::size_t index, const std::string& what)
      : std::runtime_error(what), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

inline constexpr int kMaxQlIterations = 50;

/// Full eigen-decomposition by implicit-shift QL with Wilkinson shifts.
///
/// Persymmetric input (diag and offdiag palindromic, e.g. any delta = 0
/// Hamiltonian) is split into even and odd parity blocks first, so each
/// eigenvector is an exact parity eigenstate even inside doublets whose
/// splitting is below machine precision.
///
/// Eigenvalues are returned ascending. Every eigenvector is normalised and
/// sign-fixed so that its first entry with magnitude above 1e-14 is positive.
/// Throws std::invalid_argument for malformed input and ConvergenceError if an
/// eigenvalue stalls.
Spectrum eigh_tridiagonal(const TridiagonalMatrix& matrix);

struct GroundState {
  double energy = 0.0;
  std::vector<double> vector;
};

/// Lowest eigenpair only, by Sturm-sequence bisection followed by inverse
/// iteration. Same sign convention as eigh_tridiagonal.
GroundState ground_vector(const TridiagonalMatrix& matrix);

/// Applies the sign convention in place (first entry above 1e-14 positive).
void fix_sign(std::span<double> v);

/// Frobenius norm of the full symmetric matrix.
double frobenius_norm(const TridiagonalMatrix& matrix);

}  // namespace bosewell
