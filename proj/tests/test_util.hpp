// Shared helpers for the unit tests: seeded random states and matrices.
#pragma once

#include "tcnot/qstate.hpp"

#include <Eigen/Dense>

#include <random>
#include <vector>

namespace testutil {

inline tcnot::QubitState random_state(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  std::vector<tcnot::cx> amps(std::size_t{1} << n);
  for (auto& a : amps) a = tcnot::cx(gauss(rng), gauss(rng));
  return tcnot::QubitState::from_amplitudes(n, amps, /*normalize=*/true);
}

// Random full-rank-ish density matrix: a convex mixture of random pure
// states with random weights.
inline tcnot::DensityMatrix random_density(int n, std::mt19937_64& rng,
                                           int mixture = 4) {
  const int dim = 1 << n;
  std::uniform_real_distribution<double> uni(0.1, 1.0);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  double total = 0.0;
  for (int k = 0; k < mixture; ++k) {
    const tcnot::QubitState psi = random_state(n, rng);
    Eigen::VectorXcd v(dim);
    for (int i = 0; i < dim; ++i) v(i) = psi.amp(i);
    const double w = uni(rng);
    m += w * (v * v.adjoint());
    total += w;
  }
  return tcnot::DensityMatrix(n, m / total);
}

}  // namespace testutil
