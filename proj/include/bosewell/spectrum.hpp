#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace bosewell {

/// Eigen-decomposition of a real symmetric matrix: ascending eigenvalues and
/// unit-norm eigenvectors. Eigenvector m occupies the contiguous slice
/// vectors[m*dim, (m+1)*dim).
struct Spectrum {
  std::vector<double> values;
  std::vector<double> vectors;

  std::size_t dim() const { return values.size(); }

  std::span<const double> vector(std::size_t m) const {
    return {vectors.data() + m * dim(), dim()};
  }
  std::span<double> vector(std::size_t m) {
    return {vectors.data() + m * dim(), dim()};
  }
};

}  // namespace bosewell
