#pragma once

// Two-mode Bose-Hubbard Hamiltonian in the Fock number basis.
//
//   H = -J (a1^+ a2 + a2^+ a1) + (U/2) [n1(n1-1) + n2(n2-1)] + (delta/2)(n1 - n2)
//
// Basis index k = n1 (particles in well 1), n2 = N - k, k ascending.
// The imbalance observable is z = (n1 - n2)/N.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "bosewell/spectrum.hpp"

namespace bosewell {

struct ModelParams {
  int n_particles = 1;
  double j = 0.0;      ///< tunneling energy, >= 0
  double u = 0.0;      ///< on-site interaction, >= 0
  double delta = 0.0;  ///< trap asymmetry, any sign
};

/// Throws std::invalid_argument naming the violated invariant.
void validate(const ModelParams& params);

/// Validating constructor.
ModelParams make_params(int n_particles, double j, double u, double delta = 0.0);

/// Lambda = N U / (2 J); empty when J == 0.
std::optional<double> lambda(const ModelParams& params);

/// Real symmetric tridiagonal matrix. offdiag[k] couples rows k and k+1.
struct TridiagonalMatrix {
  std::vector<double> diag;
  std::vector<double> offdiag;

  std::size_t dim() const { return diag.size(); }
};

TridiagonalMatrix build_hamiltonian(const ModelParams& params);

/// Diagonal of (n1 - n2)/N: element k is (2k - N)/N.
std::vector<double> imbalance_diagonal(int n_particles);

/// <v_m | (n1 - n2)/N | v_m2> for eigenvectors of a spectrum of dimension N+1.
double imbalance_matrix_element(const Spectrum& spectrum, std::size_t m, std::size_t m2,
                                int n_particles);

}  // namespace bosewell
