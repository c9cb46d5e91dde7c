#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "dvtele/fock.hpp"
#include "dvtele/resource.hpp"
#include "test_util.hpp"

using namespace dvtele;
using dvtele::testing::max_abs;
using dvtele::testing::random_density;

namespace {

DensityOperator fock_density(int n, int dim) { return KetVector::fock(n, dim).density(); }

KetVector psi_state(double sign) {
  Vector v = Vector::Zero(4);
  v(1) = 1.0 / std::numbers::sqrt2;
  v(2) = sign / std::numbers::sqrt2;
  return KetVector(ModeSpace({2, 2}), v);
}

// <m|D(a)|n> from the associated Laguerre closed form.
Complex displacement_element(int m, int n, Complex a) {
  const double x = std::norm(a);
  const double pre = std::exp(-0.5 * x);
  if (m >= n) {
    return std::sqrt(std::tgamma(n + 1.0) / std::tgamma(m + 1.0)) * std::pow(a, m - n) * pre *
           std::assoc_laguerre(n, m - n, x);
  }
  return std::sqrt(std::tgamma(m + 1.0) / std::tgamma(n + 1.0)) * std::pow(-std::conj(a), n - m) *
         pre * std::assoc_laguerre(m, n - m, x);
}

}  // namespace

TEST(ModeSpace, MixedRadixLayout) {
  ModeSpace s({2, 3, 4});
  EXPECT_EQ(s.total_dim(), 24u);
  EXPECT_EQ(s.stride(0), 12u);
  EXPECT_EQ(s.stride(2), 1u);
  EXPECT_EQ(s.digit(12 + 4 + 3, 0), 1);
  EXPECT_EQ(s.digit(12 + 4 + 3, 1), 1);
  EXPECT_EQ(s.digit(12 + 4 + 3, 2), 3);
  EXPECT_THROW(ModeSpace({2, 0}), std::invalid_argument);
  EXPECT_THROW(static_cast<void>(s.dim(3)), std::invalid_argument);
}

TEST(TensorProduct, BasisStates) {
  const DensityOperator r = tensor_product(fock_density(0, 2), fock_density(1, 2));
  Matrix expected = Matrix::Zero(4, 4);
  expected(1, 1) = 1.0;
  EXPECT_LT(max_abs(r.matrix() - expected), 1e-15);
  EXPECT_EQ(r.space(), ModeSpace({2, 2}));
}

TEST(TensorProduct, TraceIsMultiplicative) {
  const DensityOperator a(ModeSpace({2}), random_density(ModeSpace({2}), 1).matrix() * 0.5);
  const DensityOperator b(ModeSpace({3}), random_density(ModeSpace({3}), 2).matrix() * 0.4);
  EXPECT_NEAR(tensor_product(a, b).trace(), 0.2, 1e-12);
}

TEST(TensorProduct, CapacityIsEnforced) {
  const DensityOperator a = random_density(ModeSpace({8}), 3);
  EXPECT_THROW(tensor_product(a, a, 32), CapacityError);
  EXPECT_NO_THROW(tensor_product(a, a, 64));
}

TEST(PartialTrace, InvertsTensorProduct) {
  const DensityOperator a = random_density(ModeSpace({3}), 4);
  const DensityOperator b(ModeSpace({2, 2}), random_density(ModeSpace({2, 2}), 5).matrix() * 0.7);
  const DensityOperator ab = tensor_product(a, b);
  EXPECT_LT(max_abs(partial_trace(ab, {0}).matrix() - a.matrix() * 0.7), 1e-12);
  EXPECT_LT(max_abs(partial_trace(ab, {1, 2}).matrix() - b.matrix()), 1e-12);
  EXPECT_LT(partial_trace(ab, {0, 2}).hermiticity_error(), 1e-12);
  EXPECT_NEAR(partial_trace(ab, {2}).trace(), ab.trace(), 1e-12);
}

TEST(PartialTrace, BellMarginalIsMaximallyMixed) {
  const DensityOperator m = partial_trace(psi_state(1.0).density(), {0});
  EXPECT_LT(max_abs(m.matrix() - Matrix::Identity(2, 2) / 2.0), 1e-15);
}

TEST(PartialTrace, TmsvMarginalIsThermal) {
  const double lambda = 0.5;
  const int dim = 30;
  const DensityOperator m = partial_trace(tmsv_ket(lambda, dim).density(), {1});
  for (int n = 0; n < dim; ++n) {
    EXPECT_NEAR(m.matrix()(n, n).real(), (1 - lambda * lambda) * std::pow(lambda, 2 * n), 1e-14);
  }
  EXPECT_LT(max_abs(m.matrix() - Matrix(m.matrix().diagonal().asDiagonal())), 1e-15);
}

TEST(PartialTrace, RejectsBadIndices) {
  const DensityOperator r = random_density(ModeSpace({2, 2}), 6);
  EXPECT_THROW(partial_trace(r, {}), std::invalid_argument);
  EXPECT_THROW(partial_trace(r, {2}), std::invalid_argument);
  EXPECT_THROW(partial_trace(r, {0, 0}), std::invalid_argument);
}

TEST(ApplyKraus, IdentityLeavesStateUnchanged) {
  const DensityOperator r = random_density(ModeSpace({3, 2}), 7);
  const std::vector<OperatorMatrix> id{OperatorMatrix::single_mode(Matrix::Identity(3, 3))};
  EXPECT_LT(max_abs(apply_kraus(r, id, 0).matrix() - r.matrix()), 1e-15);
}

TEST(ApplyKraus, LosslessChannelIsIdentity) {
  const DensityOperator r = random_density(ModeSpace({4}), 8);
  EXPECT_LT(max_abs(apply_kraus(r, loss_channel(1.0, 4), 0).matrix() - r.matrix()), 1e-14);
}

TEST(ApplyKraus, SinglePhotonLoss) {
  const DensityOperator out = apply_kraus(fock_density(1, 3), loss_channel(0.6, 3), 0);
  Matrix expected = Matrix::Zero(3, 3);
  expected(0, 0) = 0.4;
  expected(1, 1) = 0.6;
  EXPECT_LT(max_abs(out.matrix() - expected), 1e-14);
}

TEST(ApplyKraus, ShapeMismatchThrows) {
  const DensityOperator r = random_density(ModeSpace({3}), 9);
  EXPECT_THROW(apply_kraus(r, loss_channel(0.5, 2), 0), std::invalid_argument);
}

TEST(ApplyKraus, ChannelsPreserveHermiticityAndTrace) {
  for (unsigned seed = 10; seed < 20; ++seed) {
    const DensityOperator r = random_density(ModeSpace({4, 3}), seed);
    const double t = 0.1 + 0.08 * (seed - 10);
    const DensityOperator out = apply_kraus(r, loss_channel(t, 3), 1);
    EXPECT_LT(out.hermiticity_error(), 1e-10);
    EXPECT_NEAR(out.trace(), r.trace(), 1e-10);
    EXPECT_GT(out.min_eigenvalue(), -1e-9);
  }
}

TEST(Project, BellStateOntoItself) {
  const DensityOperator joint = tensor_product(psi_state(-1.0).density(), fock_density(0, 3));
  const Projection p = project(joint, psi_state(-1.0), {0, 1});
  EXPECT_NEAR(p.probability, 1.0, 1e-14);
  ASSERT_FALSE(p.null());
  EXPECT_LT(max_abs(p.conditional->matrix() - fock_density(0, 3).matrix()), 1e-14);
}

TEST(Project, QubitWithVacuumOntoPsiPlus) {
  for (double theta : {0.3, 1.0, 2.5}) {
    Vector q(2);
    q << std::cos(theta / 2), std::polar(std::sin(theta / 2), 0.7);
    const DensityOperator joint =
        tensor_product(KetVector(ModeSpace({2}), q).density(), fock_density(0, 2));
    const DensityOperator full = tensor_product(joint, fock_density(0, 2));
    const Projection p = project(full, psi_state(1.0), {0, 1});
    EXPECT_NEAR(p.probability, std::pow(std::sin(theta / 2), 2) / 2, 1e-14);
  }
}

TEST(Project, OrthogonalBraIsNull) {
  const DensityOperator joint = tensor_product(psi_state(1.0).density(), fock_density(0, 2));
  const Projection p = project(joint, psi_state(-1.0), {0, 1});
  EXPECT_LT(p.probability, 1e-14);
  EXPECT_TRUE(p.null());
}

TEST(Project, BasisCompletenessMatchesPartialTrace) {
  const DensityOperator r = random_density(ModeSpace({2, 3, 2}), 21);
  const DensityOperator marginal = partial_trace(r, {0, 2});
  double total = 0.0;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      Vector v = Vector::Zero(4);
      v(2 * a + b) = 1.0;
      const double p = project(r, KetVector(ModeSpace({2, 2}), v), {0, 2}).probability;
      EXPECT_NEAR(p, marginal.matrix()(2 * a + b, 2 * a + b).real(), 1e-12);
      total += p;
    }
  }
  EXPECT_NEAR(total, 1.0, 1e-10);
}

TEST(Displacement, ZeroIsIdentity) {
  const OperatorMatrix d = displacement_operator(0.0, 5, 12);
  EXPECT_LT(max_abs(d.matrix() - Matrix::Identity(5, 5)), 1e-14);
}

TEST(Displacement, MatchesLaguerreClosedForm) {
  for (Complex xi : {Complex(0.4, 0.0), Complex(-0.9, 1.3), Complex(2.0, -1.5)}) {
    const int dim = 6;
    const Matrix d = displacement_operator(xi, dim, displacement_padding(dim, 3.0)).matrix();
    for (int m = 0; m < dim; ++m) {
      for (int n = 0; n < dim; ++n) {
        EXPECT_LT(std::abs(d(m, n) - displacement_element(m, n, xi)), 1e-9) << m << ' ' << n;
      }
    }
    EXPECT_NEAR(std::abs(d(0, 0)), std::exp(-0.5 * std::norm(xi)), 1e-12);
    EXPECT_NEAR(d(1, 1).real(), (1 - std::norm(xi)) * std::exp(-0.5 * std::norm(xi)), 1e-12);
  }
}

TEST(Displacement, InverseInPaddedSpace) {
  for (double r : {0.5, 1.5, 3.0}) {
    const Complex xi = std::polar(r, 0.9);
    const int pad = displacement_padding(4, 3.0);
    const Matrix d = displacement_operator(xi, pad, pad).matrix();
    const Matrix dm = displacement_operator(-xi, pad, pad).matrix();
    EXPECT_LT(max_abs(d * dm - Matrix::Identity(pad, pad)), 1e-7);
    EXPECT_LT(max_abs(d.adjoint() * d - Matrix::Identity(pad, pad)), 1e-8);
  }
}

TEST(FidelityPure, Examples) {
  EXPECT_NEAR(fidelity_pure(KetVector::fock(0, 2), fock_density(0, 2)), 1.0, 1e-15);
  EXPECT_NEAR(fidelity_pure(KetVector::fock(1, 2), fock_density(0, 2)), 0.0, 1e-15);
  Vector q(2);
  q << 0.6, Complex(0.0, 0.8);
  const DensityOperator mixed(ModeSpace({2}), Matrix::Identity(2, 2) / 2.0);
  EXPECT_NEAR(fidelity_pure(KetVector(ModeSpace({2}), q), mixed), 0.5, 1e-15);
  EXPECT_THROW(fidelity_pure(KetVector::fock(0, 3), mixed), std::invalid_argument);
}

TEST(DensityOperator, Diagnostics) {
  const DensityOperator r = random_density(ModeSpace({3, 2}), 30);
  EXPECT_LT(r.hermiticity_error(), 1e-14);
  EXPECT_GT(r.min_eigenvalue(), 0.0);
  EXPECT_NEAR(r.trace(), 1.0, 1e-12);
  EXPECT_NEAR(psi_state(1.0).density().purity(), 1.0, 1e-14);
  const DensityOperator half(r.space(), r.matrix() * 0.5);
  EXPECT_NEAR(half.renormalized().trace(), 1.0, 1e-14);
  EXPECT_THROW(DensityOperator(ModeSpace({2}), Matrix::Zero(3, 3)), std::invalid_argument);
}
