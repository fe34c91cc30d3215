#ifndef CHAIN_KERNELS_HPP
#define CHAIN_KERNELS_HPP

#include <Eigen/Core>

#include <array>
#include <iosfwd>
#include <vector>

#include "chain/core_model.hpp"

namespace chain {

using GreenMatrix2x2 = Eigen::Matrix2d;

/// Fourier-space propagator: [[cos phi t, sin(phi t)/phi], [-phi sin phi t, cos phi t]].
GreenMatrix2x2 g_hat(double theta, double t, const ChainParams& p);

/// Whole-line Green matrices G_t(x) for |x| <= max_site at a fixed time, from one FFT
/// of g_hat over the torus. Node count: next power of two >= max(4096, 8 (ceil(b t) + max_site)).
class GreenTable {
 public:
  GreenTable(const ChainParams& p, double t, Index max_site);

  double time() const { return t_; }
  Index max_site() const { return max_site_; }
  Index nodes() const { return nodes_; }

  /// G_t(x); even in x.
  GreenMatrix2x2 whole(Index x) const;
  /// Dirichlet (image-charge) kernel G_t(x - x') - G_t(x + x').
  GreenMatrix2x2 half(Index x, Index xp) const { return whole(x - xp) - whole(x + xp); }

 private:
  double t_;
  Index max_site_;
  Index nodes_;
  // entry ij at column x (0..max_site)
  Eigen::Matrix<double, 4, Eigen::Dynamic> g_;
};

GreenMatrix2x2 g_whole(Index x, double t, const ChainParams& p);
GreenMatrix2x2 g_half(Index x, Index xp, double t, const ChainParams& p);

/// Dirichlet flow U_0(t): same truncation length as y0; y0(0) is ignored.
HalfLineState free_flow(const HalfLineState& y0, double t, const ChainParams& p);
/// Adjoint flow (U_0'(t) psi)^j(y) = sum_i sum_x G^{ij}_{t,+}(x, y) psi^i(x).
HalfLineState adjoint_free_flow(const HalfLineState& psi, double t, const ChainParams& p);
/// Whole-line flow W(t) of the free chain on -W..W (no boundary).
WholeLineState whole_line_flow(const WholeLineState& y0, double t, const ChainParams& p);

/// Uniform grid t_k = k dt, k = 0..n.
struct TimeGrid {
  double dt = 0.01;
  Index n = 0;

  double horizon() const { return dt * double(n); }
  double at(Index k) const { return dt * double(k); }
  static TimeGrid covering(double dt, double horizon);
};

/// K(x, t) = (2 nu^2 / pi) int_0^pi sin(x theta) sin(theta) sin(phi t) / phi d theta, x >= 1.
Eigen::VectorXd kernel_K(Index x, const TimeGrid& grid, const ChainParams& p);
/// Rows x = 1..max_site, columns t_k.
Eigen::MatrixXd kernel_K_block(Index max_site, const TimeGrid& grid, const ChainParams& p);

enum class KernelRoute { Frequency, Volterra };

/// N^{(k)}(t_j), k in {0, 1, 2}.
/// Frequency route: band-jump integral in the band angle plus residues at the poles in C_-.
/// Volterra route: boundary equation with (q0, p0) = (0, 1) and no forcing.
/// Throws DegenerateSpectrum when classify_conditions is Degenerate (frequency route only).
Eigen::VectorXd kernel_N(const ChainParams& p, const TimeGrid& grid, int k,
                         KernelRoute route = KernelRoute::Frequency);

/// Sampled boundary kernels. N, Ndot, Nddot on the grid; K rows for x = 1..K.rows().
struct BoundaryKernelTable {
  ChainParams params;
  TimeGrid grid;
  Eigen::VectorXd N, Ndot, Nddot;
  Eigen::MatrixXd K;

  static BoundaryKernelTable build(const ChainParams& p, const TimeGrid& grid, Index k_sites,
                                   KernelRoute route = KernelRoute::Frequency);

  void write_N(std::ostream& os) const;  // t,N,Ndot,Nddot
  void write_K(std::ostream& os) const;  // x,t,K
};

/// S(t) = [[Ndot + gamma N, N], [Nddot + gamma Ndot, Ndot]] at grid index j.
Eigen::Matrix2d solving_matrix_S(const BoundaryKernelTable& table, Index j);
Eigen::Matrix2d solving_matrix_S(const ChainParams& p, double t);

/// G^j(y) and K^j(x, y) on 0 <= x <= X, 0 <= y <= Y (odd in y; y = 0 row is zero).
/// Computed from the sine-transform form of the time integrals.
struct ScatteringVectors {
  ChainParams params;
  Index x_window = 0;
  Index y_window = 0;
  /// K[j][c](x, y): component c of K^j(x, y). Row x = 0 holds G^j.
  std::array<std::array<Eigen::MatrixXd, 2>, 2> K;

  double G(int j, int c, Index y) const { return value(j, c, 0, y); }
  /// Antisymmetric continuation to y < 0.
  double value(int j, int c, Index x, Index y) const;
};

ScatteringVectors scattering_vectors(const ChainParams& p, Index x_window, Index y_window);

/// Omega Y on sites 0..min(L, X). Throws WindowTooSmall if Y has support beyond y_window.
HalfLineState omega_apply(const HalfLineState& y, const ScatteringVectors& sv);

}  // namespace chain

#endif
