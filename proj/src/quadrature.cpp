#include "dvtele/quadrature.hpp"

#include <cmath>
#include <numbers>

namespace dvtele {

QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("Gauss-Legendre order must be >= 1");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  // Newton iteration on P_n from the Chebyshev-like initial guess; roots are
  // symmetric so only half are computed.
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double pn = n == 0 ? 1.0 : p1;
      const double pn_1 = n == 1 ? 1.0 : p0;
      dp = n * (x * pn - pn_1) / (x * x - 1.0);
      const double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged root.
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - (n == 1 ? 1.0 : p0)) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

QuadratureRule gauss_legendre(int n, double a, double b) {
  QuadratureRule rule = gauss_legendre(n);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (b + a);
  for (std::size_t i = 0; i < rule.size(); ++i) {
    rule.nodes[i] = mid + half * rule.nodes[i];
    rule.weights[i] *= half;
  }
  return rule;
}

std::vector<BlochNode> bloch_grid(int n_theta, int n_phi) {
  if (n_phi < 1) throw std::invalid_argument("bloch_grid needs at least one phi node");
  const QuadratureRule cos_rule = gauss_legendre(n_theta);
  std::vector<BlochNode> grid;
  grid.reserve(static_cast<std::size_t>(n_theta) * n_phi);
  for (std::size_t i = 0; i < cos_rule.size(); ++i) {
    const double theta = std::acos(cos_rule.nodes[i]);
    for (int j = 0; j < n_phi; ++j) {
      const double phi = 2.0 * std::numbers::pi * j / n_phi;
      grid.push_back({theta, phi, 0.5 * cos_rule.weights[i] / n_phi});
    }
  }
  return grid;
}

std::vector<DiscNode> disc_grid(double radius, int n_radial, int n_angular) {
  const QuadratureRule radial = gauss_legendre(n_radial, 0.0, radius);
  const QuadratureRule angular = gauss_legendre(n_angular, 0.0, 2.0 * std::numbers::pi);
  std::vector<DiscNode> grid;
  grid.reserve(radial.size() * angular.size());
  for (std::size_t i = 0; i < radial.size(); ++i) {
    for (std::size_t j = 0; j < angular.size(); ++j) {
      grid.push_back({radial.nodes[i], angular.nodes[j],
                      radial.weights[i] * radial.nodes[i] * angular.weights[j]});
    }
  }
  return grid;
}

}  // namespace dvtele
