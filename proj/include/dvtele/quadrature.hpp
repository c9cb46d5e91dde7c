// Quadrature rules shared by the protocol and characteristic-function code.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace dvtele {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

/// n-point Gauss-Legendre rule on [-1, 1].
QuadratureRule gauss_legendre(int n);

/// Gauss-Legendre rule mapped to [a, b].
QuadratureRule gauss_legendre(int n, double a, double b);

/// Raised when a doubled-node convergence check fails.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double coarse, double fine)
      : std::runtime_error(what), coarse_(coarse), fine_(fine) {}
  double coarse() const { return coarse_; }
  double fine() const { return fine_; }

 private:
  double coarse_;
  double fine_;
};

/// A point on the Bloch sphere with its weight under the uniform measure
/// sin(theta) / (4 pi). Weights sum to one.
struct BlochNode {
  double theta;
  double phi;
  double weight;
};

/// Gauss-Legendre in cos(theta) times an equispaced trapezoid in phi.
std::vector<BlochNode> bloch_grid(int n_theta, int n_phi);

/// Node of a polar rule over a disc: d^2 xi = r dr dphi, weight included.
struct DiscNode {
  double radius;
  double angle;
  double weight;
};

/// Gauss-Legendre in r on [0, radius] and Gauss-Legendre in angle on
/// [0, 2 pi]. The weights integrate d^2 xi (Lebesgue measure on the plane).
std::vector<DiscNode> disc_grid(double radius, int n_radial, int n_angular);

}  // namespace dvtele
