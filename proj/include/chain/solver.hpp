#ifndef CHAIN_SOLVER_HPP
#define CHAIN_SOLVER_HPP

#include <Eigen/Core>

#include <iosfwd>
#include <vector>

#include "chain/core_model.hpp"
#include "chain/kernels.hpp"

namespace chain {

struct IntegrationOptions {
  double T = 10.0;
  double dt = 0.01;
  Index L = 0;                       ///< 0: smallest length allowed by the window rule
  std::vector<double> alphas;        ///< exponents of the recorded norms ||Y(t)||_{alpha,+}
  Index record_stride = 1;           ///< observables every n-th step
  Index snapshot_stride = 0;         ///< 0: no snapshots
  std::vector<Index> probe_sites;    ///< u, v recorded at these sites every record step
  bool enforce_window = true;        ///< require L >= ceil(b T) + support + 64
};

/// Minimal admissible truncation length for a run of length T.
Index window_length(const ChainParams& p, double T, Index support);

struct Trajectory {
  ChainParams params;
  double dt = 0.0;
  Index length = 0;
  std::vector<double> alphas;
  std::vector<double> t, H, dissipation, u0, v0;
  std::vector<std::vector<double>> norms;  ///< norms[a][k]
  std::vector<Index> probe_sites;
  Eigen::MatrixXd probe_u, probe_v;        ///< rows: probes, columns: record index
  std::vector<double> snapshot_times;
  std::vector<HalfLineState> snapshots;
  HalfLineState final_state;

  Index records() const { return static_cast<Index>(t.size()); }

  void write_csv(std::ostream& os) const;              ///< t,H,dissipation,u0,v0,norm_alpha_<a>...
  void write_snapshot(std::ostream& os, Index k) const;  ///< x,u,v
};

/// Full problem with the boundary spring and friction at x = 0.
Trajectory integrate_full(const ChainParams& p, const HalfLineState& y0, const IntegrationOptions& opt);
/// Dirichlet problem z(0, t) = 0 (y0(0) is ignored).
Trajectory integrate_dirichlet(const ChainParams& p, const HalfLineState& y0, const IntegrationOptions& opt);

struct VolterraSolution {
  ChainParams params;
  TimeGrid grid;
  Eigen::VectorXd q0, p0;  ///< boundary position and velocity on the step grid
  Eigen::VectorXd a0;      ///< boundary acceleration from the equation's right-hand side
  Eigen::VectorXd forcing; ///< nu^2 z(1, t) on the half-step grid (empty = none)
};

/// Boundary integro-differential equation
///   q'' = -(kappa + nu^2 + m^2) q - gamma q' + nu^2 int_0^t K(1, t - s) q(s) ds + nu^2 z(1, t),
/// RK4 with step dt; history and memory on the half-step grid (Simpson).
/// `z1` holds z(1, t) at t = k dt / 2, k = 0..2n (or is empty for no forcing).
VolterraSolution solve_boundary_volterra(const ChainParams& p, const Eigen::VectorXd& z1, double q0, double p0,
                                         double T, double dt);

/// Interior q(x, t), q'(x, t) for x = 1..max_site on the solution's step grid.
struct InteriorSeries {
  Eigen::MatrixXd q, qdot;  ///< rows x - 1, columns time index
};

InteriorSeries reconstruct_q(const ChainParams& p, const VolterraSolution& vs, Index max_site);

}  // namespace chain

#endif
