#include "mgcp/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "mgcp/errors.hpp"

namespace mgcp {

QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw ValidationError("quadrature order must be positive");
  QuadratureRule rule{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (int k = 0; k < (n + 1) / 2; ++k) {
    // Tricomi's initial guess for the k-th root.
    double x = std::cos(std::numbers::pi * (k + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    {
      // Final derivative at the converged root.
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[k] = -x;
    rule.nodes[n - 1 - k] = x;
    rule.weights[k] = w;
    rule.weights[n - 1 - k] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

QuadratureRule composite_gauss_legendre(double a, double b, int panels, int order) {
  if (panels < 1) throw ValidationError("number of panels must be positive");
  if (!(b >= a)) throw ValidationError("quadrature interval is reversed");
  const QuadratureRule base = gauss_legendre(order);
  QuadratureRule rule{Eigen::VectorXd(panels * order),
                      Eigen::VectorXd(panels * order)};
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    for (int k = 0; k < order; ++k) {
      rule.nodes[p * order + k] = mid + 0.5 * h * base.nodes[k];
      rule.weights[p * order + k] = 0.5 * h * base.weights[k];
    }
  }
  return rule;
}

}  // namespace mgcp
