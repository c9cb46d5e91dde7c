#pragma once

#include <random>

#include "dvtele/fock.hpp"

namespace dvtele::testing {

/// Random full-rank density operator with unit trace.
inline DensityOperator random_density(const ModeSpace& space, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  const auto d = static_cast<Eigen::Index>(space.total_dim());
  Matrix a(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) a(i, j) = Complex(n(rng), n(rng));
  }
  Matrix rho = a * a.adjoint();
  rho /= rho.trace().real();
  return DensityOperator(space, rho);
}

inline KetVector random_ket(const ModeSpace& space, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Vector v(static_cast<Eigen::Index>(space.total_dim()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = Complex(n(rng), n(rng));
  return KetVector(space, v / v.norm());
}

inline double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace dvtele::testing
