#ifndef CHAIN_QUADRATURE_HPP
#define CHAIN_QUADRATURE_HPP

#include <Eigen/Core>

namespace chain {

/// Nodes and weights of a (composite) quadrature rule on an interval.
struct QuadratureRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;

  Eigen::Index size() const { return nodes.size(); }
};

/// n-point Gauss-Legendre rule on [-1, 1] (Newton iteration on P_n).
QuadratureRule gauss_legendre(int n);

/// `panels` equal panels on [a, b], each carrying an `order`-point Gauss-Legendre rule.
QuadratureRule composite_gauss_legendre(double a, double b, int panels, int order = 16);

/// Simpson-type weights for the integral over [0, k h] from samples at 0, h, ..., k h.
/// Even k: composite Simpson. Odd k >= 3: Simpson then a 3/8 tail. k = 1: trapezoid.
/// Writes k + 1 weights into `w` (w must have room).
void simpson_weights(Eigen::Index k, double h, Eigen::Ref<Eigen::VectorXd> w);

}  // namespace chain

#endif
