#include "chain/kernels.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <numbers>
#include <ostream>

#include "chain/quadrature.hpp"
#include "chain/solver.hpp"
#include "chain/spectral.hpp"

namespace chain {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr Complex kI{0.0, 1.0};

Index next_pow2(Index n) {
  Index k = 1;
  while (k < n) k <<= 1;
  return k;
}

// sin(phi t) / phi with a Taylor guard near phi = 0
double sinc_t(double phi, double t) {
  const double a = phi * t;
  if (phi < 1e-6) return t * (1.0 - a * a / 6.0);
  return std::sin(a) / phi;
}

void write_header(std::ostream& os, const ChainParams& p, const TimeGrid& grid) {
  os.precision(15);  // header stays readable (dt = 0.1, not 0.10000000000000001)
  os << "# param nu=" << p.nu() << " m=" << p.m() << " kappa=" << p.kappa() << " gamma=" << p.gamma()
     << "\n# grid dt=" << grid.dt << " T=" << grid.horizon() << "\n";
  os.precision(17);
}

// Band-angle rule with enough panels for `oscillations` periods plus `extra` panels.
QuadratureRule band_rule(double oscillations, int extra) {
  return composite_gauss_legendre(0.0, kPi, static_cast<int>(std::ceil(oscillations)) + extra);
}

}  // namespace

GreenMatrix2x2 g_hat(double theta, double t, const ChainParams& p) {
  const double phi = dispersion(theta, p);
  const double c = std::cos(phi * t), s = std::sin(phi * t);
  GreenMatrix2x2 g;
  g << c, sinc_t(phi, t), -phi * s, c;
  return g;
}

GreenTable::GreenTable(const ChainParams& p, double t, Index max_site) : t_(t), max_site_(max_site) {
  if (max_site < 0) throw Error(ErrorKind::InvalidArgument, "max_site must be non-negative");
  const double b = p.band_hi();
  nodes_ = next_pow2(std::max<Index>(4096, 8 * (static_cast<Index>(std::ceil(b * std::abs(t))) + max_site)));
  const Index n = nodes_;

  Eigen::FFT<double> fft;
  std::array<Eigen::VectorXcd, 4> spectra;
  for (auto& s : spectra) s.resize(n);
  for (Index k = 0; k < n; ++k) {
    const GreenMatrix2x2 g = g_hat(2.0 * kPi * double(k) / double(n), t, p);
    spectra[0][k] = g(0, 0);
    spectra[1][k] = g(0, 1);
    spectra[2][k] = g(1, 0);
    spectra[3][k] = g(1, 1);
  }
  g_.resize(4, max_site + 1);
  Eigen::VectorXcd out(n);
  for (int e = 0; e < 4; ++e) {
    // g_hat is even in theta, so the sign of the exponent is immaterial
    fft.inv(out, spectra[e]);
    for (Index x = 0; x <= max_site; ++x) g_(e, x) = out[x].real();
  }
}

GreenMatrix2x2 GreenTable::whole(Index x) const {
  const Index a = x < 0 ? -x : x;
  if (a > max_site_) throw Error(ErrorKind::WindowTooSmall, "site outside the Green table");
  GreenMatrix2x2 g;
  g << g_(0, a), g_(1, a), g_(2, a), g_(3, a);
  return g;
}

GreenMatrix2x2 g_whole(Index x, double t, const ChainParams& p) {
  return GreenTable(p, t, x < 0 ? -x : x).whole(x);
}

GreenMatrix2x2 g_half(Index x, Index xp, double t, const ChainParams& p) {
  if (xp < 1) throw Error(ErrorKind::InvalidArgument, "g_half needs x' >= 1");
  if (x < 0) throw Error(ErrorKind::InvalidArgument, "g_half needs x >= 0");
  return GreenTable(p, t, x + xp).half(x, xp);
}

HalfLineState free_flow(const HalfLineState& y0, double t, const ChainParams& p) {
  const Index L = y0.length();
  const Index s = std::max<Index>(y0.support_end(), 0);
  const GreenTable table(p, t, L + s);
  HalfLineState out(L);
  for (Index xp = 1; xp <= s; ++xp) {
    const Eigen::Vector2d y(y0.u[xp], y0.v[xp]);
    if (y.isZero(0.0)) continue;
    for (Index x = 1; x <= L; ++x) {
      const Eigen::Vector2d z = table.half(x, xp) * y;
      out.u[x] += z[0];
      out.v[x] += z[1];
    }
  }
  return out;
}

HalfLineState adjoint_free_flow(const HalfLineState& psi, double t, const ChainParams& p) {
  const Index L = psi.length();
  const Index s = std::max<Index>(psi.support_end(), 0);
  const GreenTable table(p, t, L + s);
  HalfLineState out(L);
  for (Index x = 1; x <= s; ++x) {
    const Eigen::Vector2d ps(psi.u[x], psi.v[x]);
    if (ps.isZero(0.0)) continue;
    for (Index y = 1; y <= L; ++y) {
      const Eigen::Vector2d z = table.half(x, y).transpose() * ps;
      out.u[y] += z[0];
      out.v[y] += z[1];
    }
  }
  return out;
}

WholeLineState whole_line_flow(const WholeLineState& y0, double t, const ChainParams& p) {
  const Index W = y0.half_width;
  const GreenTable table(p, t, 2 * W);
  WholeLineState out(W);
  for (Index xp = -W; xp <= W; ++xp) {
    const Eigen::Vector2d y(y0.u_at(xp), y0.v_at(xp));
    if (y.isZero(0.0)) continue;
    for (Index x = -W; x <= W; ++x) {
      const Eigen::Vector2d z = table.whole(x - xp) * y;
      out.u_at(x) += z[0];
      out.v_at(x) += z[1];
    }
  }
  return out;
}

TimeGrid TimeGrid::covering(double dt, double horizon) {
  if (!(dt > 0.0) || !(horizon >= 0.0)) throw Error(ErrorKind::InvalidArgument, "bad time grid");
  return TimeGrid{dt, static_cast<Index>(std::llround(horizon / dt))};
}

Eigen::MatrixXd kernel_K_block(Index max_site, const TimeGrid& grid, const ChainParams& p) {
  if (max_site < 1) throw Error(ErrorKind::InvalidArgument, "kernel_K needs x >= 1");
  const double nu2 = p.nu() * p.nu();
  const double T = grid.horizon();
  const QuadratureRule rule =
      band_rule((p.band_hi() - p.m()) * T / (2.0 * kPi) + 0.5 * double(max_site), 16);
  const Index nn = rule.size();

  Eigen::MatrixXd A(max_site, nn);
  Eigen::VectorXd phi(nn);
  for (Index n = 0; n < nn; ++n) {
    const double th = rule.nodes[n];
    phi[n] = dispersion(th, p);
    const double c = 2.0 * nu2 / kPi * rule.weights[n] * std::sin(th) / phi[n];
    for (Index x = 1; x <= max_site; ++x) A(x - 1, n) = c * std::sin(double(x) * th);
  }

  const Index nt = grid.n + 1;
  Eigen::MatrixXd K(max_site, nt);
  constexpr Index kChunk = 512;
  Eigen::MatrixXd B(nn, kChunk);
  for (Index k0 = 0; k0 < nt; k0 += kChunk) {
    const Index cols = std::min(kChunk, nt - k0);
    for (Index n = 0; n < nn; ++n) {
      const Complex rot = std::polar(1.0, phi[n] * grid.dt);
      Complex e = std::polar(1.0, phi[n] * grid.at(k0));
      for (Index c = 0; c < cols; ++c) {
        B(n, c) = e.imag();
        e *= rot;
      }
    }
    K.middleCols(k0, cols).noalias() = A * B.leftCols(cols);
  }
  return K;
}

Eigen::VectorXd kernel_K(Index x, const TimeGrid& grid, const ChainParams& p) {
  if (x < 1) throw Error(ErrorKind::InvalidArgument, "kernel_K needs x >= 1");
  if (x == 1) return kernel_K_block(1, grid, p).row(0).transpose();
  return kernel_K_block(x, grid, p).row(x - 1).transpose();
}

namespace {

// Columns N, Ndot, Nddot from the band jump plus residues at the poles in C_-.
Eigen::MatrixXd n_frequency(const ChainParams& p, const TimeGrid& grid) {
  if (classify_conditions(p).tag == SpectralTag::Degenerate)
    throw Error(ErrorKind::DegenerateSpectrum, "N(t) has real singularities for " + p.describe());
  const double nu2 = p.nu() * p.nu();
  const double T = grid.horizon();
  const QuadratureRule rule = band_rule((p.band_hi() - p.m()) * T / (2.0 * kPi), 64);
  const Index nn = rule.size(), nt = grid.n + 1;

  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(nt, 3);
  for (Index n = 0; n < nn; ++n) {
    const double th = rule.nodes[n];
    const double phi = dispersion(th, p);
    const Complex jump =
        1.0 / d_tilde_on_band(th, p, Side::LimitFromAbove) - 1.0 / d_tilde_on_band(th, p, Side::LimitFromBelow);
    const Complex c0 = rule.weights[n] * nu2 * std::sin(th) / phi * jump / kPi;
    const Complex c1 = -kI * phi * c0;
    const Complex c2 = -kI * phi * c1;
    const Complex rot = std::polar(1.0, -phi * grid.dt);
    Complex e = 1.0;
    for (Index k = 0; k < nt; ++k) {
      if (k % 256 == 0) e = std::polar(1.0, -phi * grid.at(k));
      out(k, 0) += (c0 * e).real();
      out(k, 1) += (c1 * e).real();
      out(k, 2) += (c2 * e).real();
      e *= rot;
    }
  }
  if (p.gamma() > 0.0) {
    for (const Complex s : lower_half_plane_poles(p)) {
      const Complex r0 = -kI / d_tilde_derivative(s, p);
      for (Index k = 0; k < nt; ++k) {
        const Complex e = std::exp(-kI * s * grid.at(k));
        out(k, 0) += (r0 * e).real();
        out(k, 1) += (r0 * (-kI * s) * e).real();
        out(k, 2) += (r0 * (-s * s) * e).real();
      }
    }
  }
  return out;
}

Eigen::MatrixXd n_volterra(const ChainParams& p, const TimeGrid& grid) {
  const VolterraSolution vs = solve_boundary_volterra(p, Eigen::VectorXd(), 0.0, 1.0, grid.horizon(), grid.dt);
  Eigen::MatrixXd out(grid.n + 1, 3);
  out.col(0) = vs.q0;
  out.col(1) = vs.p0;
  out.col(2) = vs.a0;
  return out;
}

}  // namespace

Eigen::VectorXd kernel_N(const ChainParams& p, const TimeGrid& grid, int k, KernelRoute route) {
  if (k < 0 || k > 2) throw Error(ErrorKind::InvalidArgument, "derivative order must be 0, 1 or 2");
  const Eigen::MatrixXd all = route == KernelRoute::Frequency ? n_frequency(p, grid) : n_volterra(p, grid);
  return all.col(k);
}

BoundaryKernelTable BoundaryKernelTable::build(const ChainParams& p, const TimeGrid& grid, Index k_sites,
                                               KernelRoute route) {
  const Eigen::MatrixXd n = route == KernelRoute::Frequency ? n_frequency(p, grid) : n_volterra(p, grid);
  BoundaryKernelTable t{p, grid, n.col(0), n.col(1), n.col(2), Eigen::MatrixXd()};
  if (k_sites > 0) t.K = kernel_K_block(k_sites, grid, p);
  return t;
}

void BoundaryKernelTable::write_N(std::ostream& os) const {
  write_header(os, params, grid);
  os << "t,N,Ndot,Nddot\n";
  for (Index k = 0; k <= grid.n; ++k)
    os << grid.at(k) << ',' << N[k] << ',' << Ndot[k] << ',' << Nddot[k] << '\n';
}

void BoundaryKernelTable::write_K(std::ostream& os) const {
  write_header(os, params, grid);
  os << "x,t,K\n";
  for (Index x = 1; x <= K.rows(); ++x)
    for (Index k = 0; k <= grid.n; ++k) os << x << ',' << grid.at(k) << ',' << K(x - 1, k) << '\n';
}

Eigen::Matrix2d solving_matrix_S(const BoundaryKernelTable& table, Index j) {
  const double g = table.params.gamma();
  Eigen::Matrix2d s;
  s << table.Ndot[j] + g * table.N[j], table.N[j], table.Nddot[j] + g * table.Ndot[j], table.Ndot[j];
  return s;
}

Eigen::Matrix2d solving_matrix_S(const ChainParams& p, double t) {
  const TimeGrid grid{t > 0.0 ? t : 1.0, t > 0.0 ? 1 : 0};
  const BoundaryKernelTable table = BoundaryKernelTable::build(p, grid, 0);
  return solving_matrix_S(table, grid.n);
}

double ScatteringVectors::value(int j, int c, Index x, Index y) const {
  if (x < 0 || x > x_window) throw Error(ErrorKind::WindowTooSmall, "x outside the scattering table");
  const Index a = y < 0 ? -y : y;
  if (a > y_window) return 0.0;  // callers check support via omega_apply
  const double v = K[j][c](x, a);
  return y < 0 ? -v : v;
}

ScatteringVectors scattering_vectors(const ChainParams& p, Index x_window, Index y_window) {
  if (classify_conditions(p).tag == SpectralTag::Degenerate)
    throw Error(ErrorKind::DegenerateSpectrum, "scattering vectors need decay of N for " + p.describe());
  if (x_window < 0 || y_window < 1) throw Error(ErrorKind::InvalidArgument, "bad scattering windows");

  const QuadratureRule rule = band_rule(0.5 * double(std::max(x_window, y_window)), 64);
  const Index nn = rule.size();

  // sine matrix: sin(y theta_n), y = 0..Y
  Eigen::MatrixXd sines(nn, y_window + 1);
  for (Index n = 0; n < nn; ++n)
    for (Index y = 0; y <= y_window; ++y) sines(n, y) = std::sin(double(y) * rule.nodes[n]);

  ScatteringVectors sv{p, x_window, y_window, {}};
  for (int j = 0; j < 2; ++j) {
    std::array<Eigen::MatrixXd, 2> A{Eigen::MatrixXd(x_window + 1, nn), Eigen::MatrixXd(x_window + 1, nn)};
    for (Index n = 0; n < nn; ++n) {
      const double th = rule.nodes[n];
      const double phi = dispersion(th, p);
      const Complex inv_d = 1.0 / d_tilde_on_band(th, p, Side::LimitFromAbove);
      const Complex l = j == 0 ? inv_d : -kI * phi * inv_d;
      // sine transform of G^j
      const double s0 = std::sin(th) * l.real();
      const double s1 = -std::sin(th) * l.imag() / phi;
      const double w = 2.0 / kPi * rule.weights[n];
      for (Index x = 0; x <= x_window; ++x) {
        const double cx = std::cos(double(x) * th), sx = std::sin(double(x) * th);
        A[0](x, n) = w * (cx * s0 + phi * sx * s1);
        A[1](x, n) = w * (-sx / phi * s0 + cx * s1);
      }
    }
    for (int c = 0; c < 2; ++c) sv.K[j][c] = A[c] * sines;
  }
  // exact oddness at y = 0
  for (auto& kj : sv.K)
    for (auto& kc : kj) kc.col(0).setZero();
  return sv;
}

HalfLineState omega_apply(const HalfLineState& y, const ScatteringVectors& sv) {
  if (y.support_end() > sv.y_window)
    throw Error(ErrorKind::WindowTooSmall, "state support exceeds the scattering y-window");
  const double nu2 = sv.params.nu() * sv.params.nu();
  const Index X = std::min(y.length(), sv.x_window);
  const Index S = std::max<Index>(y.support_end(), 0);
  HalfLineState out = y.resized(X);
  if (S == 0) {
    // only y(0), which pairs with the zero column
    return out;
  }
  const Eigen::VectorXd yu = y.u.segment(1, S), yv = y.v.segment(1, S);
  for (int j = 0; j < 2; ++j) {
    Eigen::VectorXd corr = sv.K[j][0].block(0, 1, X + 1, S) * yu + sv.K[j][1].block(0, 1, X + 1, S) * yv;
    (j == 0 ? out.u : out.v) += nu2 * corr;
  }
  return out;
}

}  // namespace chain
