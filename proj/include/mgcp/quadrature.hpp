#pragma once

#include <Eigen/Core>

namespace mgcp {

struct QuadratureRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

// n-point Gauss-Legendre rule on [-1, 1] (Newton iteration on P_n).
QuadratureRule gauss_legendre(int n);

// `panels` equal panels over [a, b], each with an `order`-point rule.
QuadratureRule composite_gauss_legendre(double a, double b, int panels,
                                        int order = 10);

}  // namespace mgcp
