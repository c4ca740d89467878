#include "bosewell/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace bosewell {

void validate(const ModelParams& params) {
  if (params.n_particles < 1) {
    throw std::invalid_argument("ModelParams: particle number must be >= 1, got " +
                                std::to_string(params.n_particles));
  }
  if (!std::isfinite(params.j) || !std::isfinite(params.u) || !std::isfinite(params.delta)) {
    throw std::invalid_argument("ModelParams: J, U and delta must be finite");
  }
  if (params.j < 0.0) {
    throw std::invalid_argument("ModelParams: tunneling J must be >= 0");
  }
  if (params.u < 0.0) {
    throw std::invalid_argument("ModelParams: interaction U must be >= 0");
  }
  if (params.j == 0.0 && params.u == 0.0 && params.delta == 0.0) {
    throw std::invalid_argument("ModelParams: degenerate model, J, U and delta all zero");
  }
}

ModelParams make_params(int n_particles, double j, double u, double delta) {
  ModelParams params{n_particles, j, u, delta};
  validate(params);
  return params;
}

std::optional<double> lambda(const ModelParams& params) {
  if (params.j <= 0.0) return std::nullopt;
  return params.n_particles * params.u / (2.0 * params.j);
}

TridiagonalMatrix build_hamiltonian(const ModelParams& params) {
  validate(params);
  const int n = params.n_particles;
  TridiagonalMatrix h;
  h.diag.resize(static_cast<std::size_t>(n) + 1);
  h.offdiag.resize(static_cast<std::size_t>(n));
  for (int k = 0; k <= n; ++k) {
    const double n1 = k;
    const double n2 = n - k;
    h.diag[k] = 0.5 * params.u * (n1 * (n1 - 1.0) + n2 * (n2 - 1.0)) +
                0.5 * params.delta * (n1 - n2);
  }
  // a1^+ a2 |k, N-k> = sqrt((k+1)(N-k)) |k+1, N-k-1>
  for (int k = 0; k < n; ++k) {
    h.offdiag[k] = -params.j * std::sqrt((k + 1.0) * (n - k));
  }
  return h;
}

std::vector<double> imbalance_diagonal(int n_particles) {
  if (n_particles < 1) {
    throw std::invalid_argument("imbalance_diagonal: particle number must be >= 1");
  }
  std::vector<double> z(static_cast<std::size_t>(n_particles) + 1);
  for (int k = 0; k <= n_particles; ++k) {
    z[k] = static_cast<double>(2 * k - n_particles) / n_particles;
  }
  return z;
}

double imbalance_matrix_element(const Spectrum& spectrum, std::size_t m, std::size_t m2,
                                int n_particles) {
  const std::size_t dim = spectrum.dim();
  if (n_particles < 1 || dim != static_cast<std::size_t>(n_particles) + 1) {
    throw std::invalid_argument("imbalance_matrix_element: spectrum dimension " +
                                std::to_string(dim) + " does not match N+1");
  }
  if (m >= dim || m2 >= dim) {
    throw std::out_of_range("imbalance_matrix_element: eigenindex out of range");
  }
  const auto a = spectrum.vector(m);
  const auto b = spectrum.vector(m2);
  double sum = 0.0;
  for (std::size_t k = 0; k < dim; ++k) {
    sum += a[k] * b[k] * (2.0 * static_cast<double>(k) - n_particles);
  }
  return sum / n_particles;
}

}  // namespace bosewell
