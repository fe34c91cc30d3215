// Acceptance run: one pass/fail line per criterion.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "chain/core_model.hpp"
#include "chain/kernels.hpp"
#include "chain/solver.hpp"
#include "chain/spectral.hpp"
#include "chain/verify.hpp"

using namespace chain;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "FAILED(" << what << ") ";
    }
  }
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// ---- 1: energy identity --------------------------------------------------------------
void energy_identity(Outcome& o) {
  IntegrationOptions run;
  run.T = 200.0;
  run.dt = 0.01;
  run.L = 1024;
  HalfLineState y0(run.L);
  // smooth bump centred at x = 20, plus a boundary displacement
  for (Index x = 0; x <= 60; ++x) y0.u[x] = std::exp(-double((x - 20) * (x - 20)) / 50.0);
  y0.u[0] = 0.5;

  const Trajectory cons = integrate_full(ChainParams(1.0, 0.5, 1.0, 0.0), y0, run);
  double drift = 0.0;
  for (Index k = 0; k < cons.records(); ++k) drift = std::max(drift, std::abs(cons.H[k] - cons.H[0]) / cons.H[0]);

  const Trajectory diss = integrate_full(ChainParams(1.0, 0.5, 1.0, 0.5), y0, run);
  double balance = 0.0;
  bool monotone = true;
  for (Index k = 0; k < diss.records(); ++k) {
    balance = std::max(balance, std::abs(diss.H[k] + diss.dissipation[k] - diss.H[0]) / diss.H[0]);
    if (k > 0 && diss.H[k] > diss.H[k - 1] + 1e-12 * diss.H[0]) monotone = false;
  }
  o.require(drift < 1e-8, "gamma=0 drift");
  o.require(balance < 1e-6, "gamma=0.5 balance");
  o.require(monotone, "H non-increasing");
  o.detail << "gamma=0 max|dH|/H0=" << sci(drift) << " (<1e-8); gamma=0.5 max balance=" << sci(balance)
           << " (<1e-6)";
}

// ---- 2: main dispersive bound --------------------------------------------------------
void main_bound(Outcome& o) {
  IntegrationOptions run;
  run.T = 400.0;
  run.dt = 0.01;
  run.L = 2048;
  run.record_stride = 10;
  run.alphas = {-2.0};
  const HalfLineState y0 = delta_state(run.L, 5);
  for (auto [kappa, expected, tol] : {std::tuple{1.0, -1.5, 0.2}, std::tuple{2.0, -0.5, 0.15}}) {
    const ChainParams p(1.0, 0.0, kappa, 0.0);
    FitOptions fo;
    fo.t_min = 50.0;
    fo.t_max = 400.0;
    fo.block_width = dispersive_period(p);
    fo.min_decades = std::log10(8.0);
    const DecayFit f = verify_main_bound(p, y0, 2.0, run, fo);
    o.require(std::abs(f.slope - expected) <= tol, "kappa=" + sci(kappa));
    o.detail << "kappa=" << kappa << " slope=" << sci(f.slope) << "+-" << sci(f.slope_ci) << " (" << expected
             << "+-" << tol << "); ";
  }
}

// ---- 3: free-flow bound and whole-line contrast --------------------------------------
void free_bound(Outcome& o) {
  const ChainParams p(1.0, 0.0, 1.0, 0.0);
  FitOptions fo;
  fo.t_min = 50.0;
  fo.t_max = 400.0;
  fo.block_width = dispersive_period(p);
  fo.min_decades = std::log10(8.0);
  const DecayFit f = verify_free_bound(p, delta_state(8, 5), 2.0, 0.25, fo);
  o.require(std::abs(f.slope + 1.5) <= 0.2, "Dirichlet slope");

  WholeLineState w(0);
  w.u_at(0) = 1.0;
  const DecayFit c = verify_whole_line_contrast(p, w, 2.0, 0.25, fo);
  o.require(std::abs(c.slope + 0.5) <= 0.15, "whole-line contrast slope");
  o.detail << "Dirichlet slope=" << sci(f.slope) << "+-" << sci(f.slope_ci) << " (-1.5+-0.2); whole-line delta_0 slope="
           << sci(c.slope) << "+-" << sci(c.slope_ci) << " (-0.5+-0.15)";
}

// ---- 4: discrete eigenvalue ----------------------------------------------------------
void discrete_eigenvalue(Outcome& o) {
  const ChainParams p(1.0, 0.0, 3.0, 0.0);
  const RealSpectrumReport r = find_real_spectrum(p);
  o.require(r.discrete_eigenvalues.size() == 2, "one pair");
  const double w0 = r.discrete_eigenvalues.back();
  const double err = std::abs(w0 - 3.0 / std::sqrt(2.0));
  const double d = std::abs(d_tilde(w0, p));
  const WitnessReport wit = degenerate_witness(p);
  o.require(err < 1e-10, "omega0");
  o.require(d < 1e-12, "|D(omega0)|");
  o.require(wit.residual < 1e-10, "witness residual");
  o.require(std::abs(wit.exp_itheta + 0.5) < 1e-12, "e^{i theta} = -1/2");
  o.require(wit.norm_ratio > 0.99 && wit.norm_variation < 1e-8, "non-decaying norm");
  o.detail << "|omega0-3/sqrt2|=" << sci(err) << " |D(omega0)|=" << sci(d) << " residual=" << sci(wit.residual)
           << " norm ratio(t~100 periods)=" << sci(wit.norm_ratio);
}

// ---- 5: embedded resonance -----------------------------------------------------------
void embedded_resonance(Outcome& o) {
  const ChainParams p(1.0, 0.0, 1.28, 0.6);
  const RealSpectrumReport r = find_real_spectrum(p);
  o.require(r.embedded_resonances.size() == 2, "one pair");
  double err = 1.0;
  if (r.embedded_resonances.size() == 2)
    err = std::max(std::abs(r.embedded_resonances[0] + 1.6), std::abs(r.embedded_resonances[1] - 1.6));
  const WitnessReport wit = degenerate_witness(p);
  o.require(err < 1e-10, "omega*");
  o.require(wit.residual < 1e-8, "witness residual");
  o.detail << "|omega*-1.6|=" << sci(err) << " traveling witness residual=" << sci(wit.residual);
}

// ---- 6: kernel oracle equivalence ----------------------------------------------------
void kernel_oracle(Outcome& o) {
  const TimeGrid grid{0.01, 10000};
  double worst = 0.0;
  for (const ChainParams& p : {ChainParams(1, 0, 1, 0), ChainParams(1, 0.5, 1, 0.2), ChainParams(1, 1, 0.5, 0.5),
                               ChainParams(1, 0, 2, 0), ChainParams(1, 1, 0, 0)}) {
    const BoundaryKernelTable a = BoundaryKernelTable::build(p, grid, 0, KernelRoute::Frequency);
    const BoundaryKernelTable b = BoundaryKernelTable::build(p, grid, 0, KernelRoute::Volterra);
    worst = std::max({worst, (a.N - b.N).cwiseAbs().maxCoeff(), (a.Ndot - b.Ndot).cwiseAbs().maxCoeff(),
                      (a.Nddot - b.Nddot).cwiseAbs().maxCoeff()});
  }
  o.require(worst < 1e-6, "routes agree");

  FitOptions fo;
  fo.t_min = 50.0;
  fo.t_max = 500.0;
  fo.block_width = dispersive_period(ChainParams(1, 0, 0, 1));
  const ZeroModeLimit z = verify_zero_mode_limit(ChainParams(1, 0, 0, 1), 500.0, 0.02, fo);
  o.require(z.final_gap < 1e-3, "N(500) -> 1/2");
  o.require(std::abs(z.tail.slope + 1.5) <= 0.2, "tail slope");
  o.detail << "max route gap (5 sets, N/N'/N'')=" << sci(worst) << " (<1e-6); |N(500)-1/2|=" << sci(z.final_gap)
           << " tail slope=" << sci(z.tail.slope) << " (-1.5+-0.2)";
}

// ---- 7: resolvent identity -----------------------------------------------------------
void resolvent_identity(Outcome& o) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const ChainParams p(0.5 + std::abs(u(rng)), std::abs(u(rng)), 1.0, 0.0);
    Complex omega(3.0 * u(rng), 2.0 * u(rng));
    Side side = Side::UpperHalfPlane;
    if (trial % 4 == 0) {  // on the band, both sides
      const double th = 0.2 + 2.7 * std::abs(u(rng));
      omega = dispersion(th, p) * (u(rng) > 0 ? 1.0 : -1.0);
      side = trial % 8 == 0 ? Side::LimitFromAbove : Side::LimitFromBelow;
    }
    const Index W = 20, R = 30;
    Eigen::VectorXcd f(2 * W + 1);
    for (Index k = 0; k < f.size(); ++k) f[k] = Complex(u(rng), u(rng));
    Eigen::VectorXcd rf = Eigen::VectorXcd::Zero(2 * R + 1);
    for (Index x = -R; x <= R; ++x)
      for (Index y = -W; y <= W; ++y) rf[x + R] += resolvent_kernel(omega, x, y, p, side) * f[y + W];
    const double nu2 = p.nu() * p.nu(), m2 = p.m() * p.m();
    double scale = 0.0;
    for (Index x = -R + 1; x < R; ++x) {
      const Complex lhs = -nu2 * (rf[x + 1 + R] - 2.0 * rf[x + R] + rf[x - 1 + R]) + (m2 - omega * omega) * rf[x + R];
      const Complex rhs = std::abs(x) <= W ? f[x + W] : Complex(0.0);
      worst = std::max(worst, std::abs(lhs - rhs));
      scale = std::max(scale, std::abs(rhs));
    }
  }
  const double r00 = std::abs(resolvent_kernel(0.0, 0, 0, ChainParams(1, 1, 0, 0)) - 1.0 / std::sqrt(5.0));
  o.require(worst < 1e-12, "identity");
  o.require(r00 < 1e-12, "R(0,0)");
  o.detail << "max|(-nu^2 Lap + m^2 - w^2) R f - f|=" << sci(worst) << " (100 trials); |R(0,0)-1/sqrt5|=" << sci(r00);
}

// ---- 8: Green-function oracle --------------------------------------------------------
void green_oracle(Outcome& o) {
  double worst = 0.0, half_zero = 0.0;
  for (const ChainParams& p : {ChainParams(1, 0, 1, 0), ChainParams(1, 0.5, 1, 0)}) {
    // whole-line chain, delta data in u and in v, RK4 with small step
    const Index W = static_cast<Index>(std::ceil(p.band_hi() * 50.0)) + 164;
    const double nu2 = p.nu() * p.nu(), m2 = p.m() * p.m();
    const double dt = 0.0025;
    auto acc = [&](const Eigen::MatrixXd& u) {
      Eigen::MatrixXd a = Eigen::MatrixXd::Zero(u.rows(), u.cols());
      for (Index i = 1; i + 1 < u.rows(); ++i) a.row(i) = nu2 * (u.row(i + 1) - 2.0 * u.row(i) + u.row(i - 1)) - m2 * u.row(i);
      return a;
    };
    Eigen::MatrixXd u = Eigen::MatrixXd::Zero(2 * W + 1, 2), v = u;
    u(W, 0) = 1.0;  // column 0: (delta, 0); column 1: (0, delta)
    v(W, 1) = 1.0;
    double t = 0.0;
    for (int mark = 5; mark <= 50; mark += 5) {
      while (t < mark - 1e-9) {
        const Eigen::MatrixXd a1 = acc(u), v2 = v + 0.5 * dt * a1, a2 = acc(u + 0.5 * dt * v), v3 = v + 0.5 * dt * a2,
                              a3 = acc(u + 0.5 * dt * v2), v4 = v + dt * a3, a4 = acc(u + dt * v3);
        u += dt / 6.0 * (v + 2.0 * v2 + 2.0 * v3 + v4);
        v += dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
        t += dt;
      }
      const GreenTable g(p, t, 100);
      for (Index x = -100; x <= 100; ++x) {
        const GreenMatrix2x2 G = g.whole(x);
        worst = std::max({worst, std::abs(G(0, 0) - u(W + x, 0)), std::abs(G(1, 0) - v(W + x, 0)),
                          std::abs(G(0, 1) - u(W + x, 1)), std::abs(G(1, 1) - v(W + x, 1))});
      }
      for (Index xp = 1; xp <= 50; ++xp) half_zero = std::max(half_zero, g.half(0, xp).cwiseAbs().maxCoeff());
    }
  }
  o.require(worst < 1e-8, "quadrature vs ODE");
  o.require(half_zero == 0.0, "g_half(0, .) = 0");
  o.detail << "sup|G_quad - G_ode| (t<=50, |x|<=100)=" << sci(worst) << " (<1e-8); max|g_half(0,x')|=" << sci(half_zero);
}

// ---- 9: decomposition u = z + q ------------------------------------------------------
void decomposition(Outcome& o) {
  const ChainParams p(1.0, 0.5, 1.0, 0.2);
  const double T = 100.0, dt = 0.01;
  const Index X = 20;
  HalfLineState y0(12);
  y0.u[0] = 0.3;
  y0.v[0] = -0.2;
  y0.u[2] = 1.0;
  y0.v[4] = 0.5;
  y0.u[7] = -0.4;

  std::vector<Index> probes;
  for (Index x = 0; x <= X; ++x) probes.push_back(x);
  IntegrationOptions full;
  full.T = T;
  full.dt = dt;
  full.probe_sites = probes;
  const Trajectory u = integrate_full(p, y0, full);

  IntegrationOptions dir = full;
  dir.dt = 0.5 * dt;  // z(1, t) on the half-step grid for the boundary equation
  const Trajectory z = integrate_dirichlet(p, y0, dir);
  const Eigen::VectorXd z1 = z.probe_u.row(1).transpose();

  const VolterraSolution vs = solve_boundary_volterra(p, z1, y0.u[0], y0.v[0], T, dt);
  const InteriorSeries q = reconstruct_q(p, vs, X);

  double worst = 0.0;
  for (Index k = 0; k <= vs.grid.n; ++k) {
    worst = std::max(worst, std::abs(u.probe_u(0, k) - vs.q0[k]));
    worst = std::max(worst, std::abs(u.probe_v(0, k) - vs.p0[k]));
    for (Index x = 1; x <= X; ++x) {
      worst = std::max(worst, std::abs(u.probe_u(x, k) - (z.probe_u(x, 2 * k) + q.q(x - 1, k))));
      worst = std::max(worst, std::abs(u.probe_v(x, k) - (z.probe_v(x, 2 * k) + q.qdot(x - 1, k))));
    }
  }
  o.require(worst < 1e-5, "pipelines agree");
  o.detail << "sup|u - (z + q)| and velocities, x<=20, t<=100: " << sci(worst) << " (<1e-5)";
}

// ---- 10: scattering residual ---------------------------------------------------------
void scattering(Outcome& o) {
  const double T = 300.0;
  for (const ChainParams& p : {ChainParams(1, 0, 1, 0), ChainParams(1, 0, 2, 0)}) {
    IntegrationOptions run;
    run.T = T;
    run.dt = 0.01;
    run.snapshot_stride = 50;
    const HalfLineState y0 = delta_state(2, 2);
    const Trajectory tr = integrate_full(p, y0, run);
    const ScatteringVectors sv =
        scattering_vectors(p, 64, static_cast<Index>(std::ceil(p.band_hi() * T)) + 100);
    FitOptions fo;
    fo.t_min = 20.0;
    fo.t_max = T;
    fo.block_width = dispersive_period(p);
    const ScatteringResidual r = verify_scattering(tr, y0, 2.0, sv, fo);
    o.require(r.fit.envelope_flat, "kappa=" + sci(p.kappa()));
    o.detail << "kappa=" << p.kappa() << " compensated slope=" << sci(r.fit.compensated_slope)
             << " (|.|<=0.15, raw slope " << sci(r.fit.slope) << "); ";
  }
}

// ---- 11: kernel bounds ---------------------------------------------------------------
void kernel_bounds(Outcome& o) {
  for (auto [p, sites] : {std::pair{ChainParams(1, 0.5, 1, 0.2), Index(64)}, std::pair{ChainParams(1, 1, 0, 0), Index(0)}}) {
    FitOptions fo;
    fo.t_min = 100.0;
    fo.t_max = 1000.0;
    fo.block_width = dispersive_period(p);
    const KernelBoundsReport rep = verify_kernel_bounds(p, 0.1, sites, fo);
    o.detail << "(" << p.describe() << ")";
    for (std::size_t i = 0; i < rep.fits.size(); ++i) {
      o.require(rep.fits[i].envelope_flat, rep.names[i]);
      o.detail << " " << rep.names[i] << ":" << sci(rep.fits[i].compensated_slope);
    }
    o.detail << "; ";
  }
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria = {
      {"1 energy identity", energy_identity},
      {"2 main dispersive bound", main_bound},
      {"3 free-flow bound", free_bound},
      {"4 discrete eigenvalue", discrete_eigenvalue},
      {"5 embedded resonance", embedded_resonance},
      {"6 kernel oracle equivalence", kernel_oracle},
      {"7 resolvent identity", resolvent_identity},
      {"8 Green-function oracle", green_oracle},
      {"9 decomposition u = z + q", decomposition},
      {"10 scattering residual", scattering},
      {"11 kernel bounds", kernel_bounds},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      run(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] criterion %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.str().c_str(),
                secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%d/%zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
