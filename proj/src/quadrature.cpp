#include "chain/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "chain/error.hpp"

namespace chain {

namespace {

QuadratureRule compute_gauss_legendre(int n) {
  QuadratureRule rule{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

}  // namespace

QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "Gauss-Legendre order must be positive");
  static std::mutex mutex;
  static std::map<int, QuadratureRule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gauss_legendre(n)).first;
  return it->second;
}

QuadratureRule composite_gauss_legendre(double a, double b, int panels, int order) {
  if (panels < 1) throw Error(ErrorKind::InvalidArgument, "panel count must be positive");
  const QuadratureRule base = gauss_legendre(order);
  QuadratureRule rule{Eigen::VectorXd(panels * order), Eigen::VectorXd(panels * order)};
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    rule.nodes.segment(p * order, order) = (mid + 0.5 * h * base.nodes.array()).matrix();
    rule.weights.segment(p * order, order) = 0.5 * h * base.weights;
  }
  return rule;
}

void simpson_weights(Eigen::Index k, double h, Eigen::Ref<Eigen::VectorXd> w) {
  w.head(k + 1).setZero();
  if (k == 0) return;
  if (k == 1) {
    w[0] = w[1] = 0.5 * h;
    return;
  }
  const Eigen::Index even = (k % 2 == 0) ? k : k - 3;
  for (Eigen::Index j = 0; j + 2 <= even; j += 2) {
    w[j] += h / 3.0;
    w[j + 1] += 4.0 * h / 3.0;
    w[j + 2] += h / 3.0;
  }
  if (even != k) {
    const double c = 3.0 * h / 8.0;
    w[even] += c;
    w[even + 1] += 3.0 * c;
    w[even + 2] += 3.0 * c;
    w[even + 3] += c;
  }
}

}  // namespace chain
