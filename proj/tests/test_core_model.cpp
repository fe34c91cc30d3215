#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "chain/core_model.hpp"
#include "chain/quadrature.hpp"

using namespace chain;

TEST_CASE("params validation") {
  CHECK_NOTHROW(ChainParams(1, 0, 0, 0));
  CHECK_THROWS_AS(ChainParams(0, 0, 0, 0), Error);
  CHECK_THROWS_AS(ChainParams(1, -1, 0, 0), Error);
  CHECK_THROWS_AS(ChainParams(1, 0, -0.1, 0), Error);
  CHECK_THROWS_AS(ChainParams(1, 0, 0, -0.1), Error);
  CHECK_THROWS_AS(ChainParams(1, NAN, 0, 0), Error);
  try {
    ChainParams(-1, 0, 0, 0);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidArgument);
  }
  const ChainParams p(1.5, 2.0, 0.3, 0.1);
  CHECK(p.band_lo() == 2.0);
  CHECK(p.band_hi() == doctest::Approx(std::sqrt(4.0 + 9.0)));
}

TEST_CASE("weighted norm and bracket") {
  CHECK(bracket(0) == 1.0);
  CHECK(bracket(3) == doctest::Approx(std::sqrt(10.0)));
  HalfLineState y(4);
  y.u[2] = 1.0;
  y.v[3] = 2.0;
  // <2>^{-2} + 4 <3>^{-2}
  CHECK(weighted_norm(y, -1.0) == doctest::Approx(std::sqrt(1.0 / 5.0 + 4.0 / 10.0)));
  CHECK(weighted_norm(y, 0.0) == doctest::Approx(std::sqrt(5.0)));
  CHECK(y.support_end() == 3);
  CHECK(HalfLineState(5).support_end() == -1);
  CHECK(y.resized(10).sites() == 11);
  CHECK(y.resized(2).support_end() == 2);
}

TEST_CASE("delta state and pairing") {
  const HalfLineState d = delta_state(6, 4, Component::Velocity);
  CHECK(d.length() == 6);
  CHECK(d.v[4] == 1.0);
  CHECK(d.u.sum() == 0.0);
  HalfLineState a(6);
  a.v.setLinSpaced(0, 6);
  CHECK(pairing(a, d) == 4.0);
  CHECK_THROWS_AS(HalfLineState(Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(4)), Error);
}

TEST_CASE("odd extension") {
  HalfLineState y(3);
  y.u << 9, 1, 2, 3;
  y.v << 9, -1, 0, 5;
  const WholeLineState w = odd_extension(y);
  CHECK(w.half_width == 3);
  CHECK(w.u_at(0) == 0.0);
  CHECK(w.v_at(0) == 0.0);
  for (Index x = 1; x <= 3; ++x) {
    CHECK(w.u_at(x) == y.u[x]);
    CHECK(w.u_at(-x) == -y.u[x]);
    CHECK(w.v_at(-x) == -y.v[x]);
  }
  CHECK(weighted_norm(w, 0.0) == doctest::Approx(std::sqrt(2.0 * (1 + 4 + 9 + 1 + 25))));
}

TEST_CASE("hamiltonian") {
  const ChainParams p(2.0, 0.5, 1.0, 0.3);
  HalfLineState y(2);
  y.u << 1, 0, 0;
  // 1/2 (kappa + m^2) u0^2 + 1/2 nu^2 (u1 - u0)^2
  CHECK(hamiltonian(p, y) == doctest::Approx(0.5 * (1.0 + 0.25) + 0.5 * 4.0));
  y.u.setZero();
  y.v << 0, 2, 0;
  CHECK(hamiltonian(p, y) == doctest::Approx(2.0));
  // constant shift costs only mass and spring energy
  y.v.setZero();
  y.u.setConstant(1.0);
  CHECK(hamiltonian(p, y) == doctest::Approx(0.5 * 1.0 + 0.5 * 0.25 * 3));
}

TEST_CASE("classification") {
  auto cls = [](double nu, double m, double k, double g) { return classify_conditions(ChainParams(nu, m, k, g)); };
  // m > 0, generic
  CHECK(cls(1, 0.5, 1, 0.2).tag == SpectralTag::ConditionC);
  CHECK(*cls(1, 0.5, 1, 0.2).beta == 3);
  // m = 0, kappa > 0
  CHECK(cls(1, 0, 1, 0).tag == SpectralTag::ConditionC);
  // m = 0, kappa = 0: zero mode at the origin
  auto z = cls(1, 0, 0, 0.5);
  CHECK(z.tag == SpectralTag::Degenerate);
  CHECK(*z.reason == DegenerateReason::ZeroModeAtOrigin);
  // edge resonance at kappa = 2 nu^2 without friction
  auto c0 = cls(1, 0.5, 2, 0);
  CHECK(c0.tag == SpectralTag::ConditionC0);
  CHECK(*c0.beta == 1);
  // kappa > 2 nu^2 without friction: eigenvalue above the band
  auto e = cls(1, 0, 3, 0);
  CHECK(e.tag == SpectralTag::Degenerate);
  CHECK(*e.reason == DegenerateReason::DiscreteEigenvalueAboveBand);
  CHECK(std::abs(*e.frequency) == doctest::Approx(3.0 / std::sqrt(2.0)));
  auto r = cls(1, 0, 1.28, 0.6);
  CHECK(r.tag == SpectralTag::Degenerate);
  CHECK(*r.reason == DegenerateReason::EmbeddedResonance);
  CHECK(std::abs(*r.frequency) == doctest::Approx(1.6));
  CHECK(!r.decaying());
  CHECK(std::string(to_string(SpectralTag::ConditionC0)) == "C0");
}

TEST_CASE("gauss-legendre integrates polynomials exactly") {
  const QuadratureRule g = gauss_legendre(16);
  CHECK(g.size() == 16);
  for (int k = 0; k <= 31; ++k) {
    double s = 0;
    for (Index i = 0; i < g.size(); ++i) s += g.weights[i] * std::pow(g.nodes[i], k);
    const double exact = k % 2 ? 0.0 : 2.0 / (k + 1);
    CHECK(s == doctest::Approx(exact).epsilon(1e-13));
  }
  const QuadratureRule c = composite_gauss_legendre(0.0, M_PI, 8);
  CHECK(c.size() == 128);
  CHECK(c.weights.dot(c.nodes.array().sin().matrix()) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("simpson weights") {
  Eigen::VectorXd w(20);
  for (Index k : {1, 2, 3, 4, 7, 10, 19}) {
    const double h = 0.1;
    simpson_weights(k, h, w);
    // exact for cubics when k >= 2
    double s0 = 0, s3 = 0;
    for (Index j = 0; j <= k; ++j) {
      s0 += w[j];
      s3 += w[j] * std::pow(j * h, 3);
    }
    CHECK(s0 == doctest::Approx(k * h));
    if (k >= 2) CHECK(s3 == doctest::Approx(std::pow(k * h, 4) / 4));
  }
}
