#include "chain/solver.hpp"

#include <cmath>
#include <ostream>

#include "chain/quadrature.hpp"

namespace chain {

Index window_length(const ChainParams& p, double T, Index support) {
  return static_cast<Index>(std::ceil(p.band_hi() * T)) + std::max<Index>(support, 0) + 64;
}

namespace {

enum class Boundary { Full, Dirichlet };

struct Rhs {
  double nu2, m2, kappa, gamma;
  Boundary boundary;

  // a = u'' for the truncated chain with u(L+1) := u(L)
  void operator()(const Eigen::VectorXd& u, const Eigen::VectorXd& v, Eigen::VectorXd& a) const {
    const Index L = u.size() - 1;
    const double* up = u.data();
    double* ap = a.data();
    if (L == 0) {
      ap[0] = boundary == Boundary::Full ? -(m2 + kappa) * up[0] - gamma * v[0] : 0.0;
      return;
    }
    if (boundary == Boundary::Full)
      ap[0] = nu2 * (up[1] - up[0]) - (m2 + kappa) * up[0] - gamma * v[0];
    else
      ap[0] = 0.0;
    for (Index x = 1; x < L; ++x) ap[x] = nu2 * (up[x + 1] - 2.0 * up[x] + up[x - 1]) - m2 * up[x];
    ap[L] = nu2 * (up[L - 1] - up[L]) - m2 * up[L];
  }
};

Trajectory integrate(const ChainParams& p, const HalfLineState& y0_in, const IntegrationOptions& opt,
                     Boundary boundary) {
  if (!(opt.dt > 0.0) || !(opt.T >= 0.0)) throw Error(ErrorKind::InvalidArgument, "dt and T must be positive");
  if (opt.dt > 0.5 / p.band_hi() * (1.0 + 1e-12))
    throw Error(ErrorKind::InvalidArgument, "dt exceeds the stability margin 0.5 / band_hi");
  if (opt.record_stride < 1) throw Error(ErrorKind::InvalidArgument, "record_stride must be >= 1");
  const Index support = y0_in.support_end();
  const Index minimal = window_length(p, opt.T, support);
  const Index L = opt.L > 0 ? opt.L : minimal;
  if (opt.enforce_window && L < minimal)
    throw Error(ErrorKind::InvalidArgument, "L below the reflection-free window ceil(b T) + support + 64");
  for (Index s : opt.probe_sites)
    if (s < 0 || s > L) throw Error(ErrorKind::InvalidArgument, "probe site outside 0..L");

  HalfLineState y = y0_in.resized(L);
  if (boundary == Boundary::Dirichlet) y.u[0] = y.v[0] = 0.0;

  const Rhs rhs{p.nu() * p.nu(), p.m() * p.m(), p.kappa(), p.gamma(), boundary};
  const double dt = opt.dt;
  const Index steps = static_cast<Index>(std::llround(opt.T / dt));

  Trajectory tr{p};
  tr.dt = dt;
  tr.length = L;
  tr.alphas = opt.alphas;
  tr.norms.assign(opt.alphas.size(), {});
  tr.probe_sites = opt.probe_sites;
  const Index n_records = steps / opt.record_stride + 1;
  tr.probe_u.resize(opt.probe_sites.size(), n_records);
  tr.probe_v.resize(opt.probe_sites.size(), n_records);

  // boundary velocity history for the dissipation integral
  std::vector<double> f(steps + 1);
  std::vector<double> even_sum(steps + 1, 0.0);  // Simpson over [0, k dt] for even k
  const double gamma = boundary == Boundary::Full ? p.gamma() : 0.0;
  auto dissipation_at = [&](Index k) {
    if (k == 0) return 0.0;
    if (k == 1) return 0.5 * dt * (f[0] + f[1]);
    if (k % 2 == 0) return even_sum[k];
    return even_sum[k - 3] + 3.0 * dt / 8.0 * (f[k - 3] + 3.0 * f[k - 2] + 3.0 * f[k - 1] + f[k]);
  };

  const double initial_norm = std::sqrt(y.u.squaredNorm() + y.v.squaredNorm());
  Index rec = 0;
  auto record = [&](Index k) {
    const double t = double(k) * dt;
    tr.t.push_back(t);
    tr.H.push_back(hamiltonian(p, y));
    tr.dissipation.push_back(gamma * dissipation_at(k));
    tr.u0.push_back(y.u[0]);
    tr.v0.push_back(y.v[0]);
    for (std::size_t a = 0; a < opt.alphas.size(); ++a) tr.norms[a].push_back(weighted_norm(y, opt.alphas[a]));
    for (std::size_t s = 0; s < opt.probe_sites.size(); ++s) {
      tr.probe_u(s, rec) = y.u[opt.probe_sites[s]];
      tr.probe_v(s, rec) = y.v[opt.probe_sites[s]];
    }
    ++rec;
    if (opt.snapshot_stride > 0 && k % opt.snapshot_stride == 0) {
      tr.snapshot_times.push_back(t);
      tr.snapshots.push_back(y);
    }
    const double norm = std::sqrt(y.u.squaredNorm() + y.v.squaredNorm());
    if (!std::isfinite(norm) || (initial_norm > 0.0 && norm > 1e6 * initial_norm))
      throw Error(ErrorKind::UnstableStep, "state norm grew beyond 1e6 x initial");
  };

  f[0] = y.v[0] * y.v[0];
  record(0);

  const Index n = L + 1;
  Eigen::VectorXd a1(n), a2(n), a3(n), a4(n), ut(n), vt(n), v2(n), v3(n), v4(n);
  for (Index k = 1; k <= steps; ++k) {
    rhs(y.u, y.v, a1);
    ut = y.u + 0.5 * dt * y.v;
    v2 = y.v + 0.5 * dt * a1;
    rhs(ut, v2, a2);
    ut = y.u + 0.5 * dt * v2;
    v3 = y.v + 0.5 * dt * a2;
    rhs(ut, v3, a3);
    ut = y.u + dt * v3;
    v4 = y.v + dt * a3;
    rhs(ut, v4, a4);
    y.u += dt / 6.0 * (y.v + 2.0 * v2 + 2.0 * v3 + v4);
    y.v += dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);

    f[k] = y.v[0] * y.v[0];
    if (k % 2 == 0) even_sum[k] = even_sum[k - 2] + dt / 3.0 * (f[k - 2] + 4.0 * f[k - 1] + f[k]);
    if (k % opt.record_stride == 0) record(k);
  }
  tr.final_state = y;
  return tr;
}

}  // namespace

Trajectory integrate_full(const ChainParams& p, const HalfLineState& y0, const IntegrationOptions& opt) {
  return integrate(p, y0, opt, Boundary::Full);
}

Trajectory integrate_dirichlet(const ChainParams& p, const HalfLineState& y0, const IntegrationOptions& opt) {
  return integrate(p, y0, opt, Boundary::Dirichlet);
}

void Trajectory::write_csv(std::ostream& os) const {
  os << "t,H,dissipation,u0,v0";
  for (double a : alphas) os << ",norm_alpha_" << a;
  os << '\n';
  os.precision(17);
  for (std::size_t k = 0; k < t.size(); ++k) {
    os << t[k] << ',' << H[k] << ',' << dissipation[k] << ',' << u0[k] << ',' << v0[k];
    for (const auto& col : norms) os << ',' << col[k];
    os << '\n';
  }
}

void Trajectory::write_snapshot(std::ostream& os, Index k) const {
  const HalfLineState& s = snapshots.at(k);
  os.precision(17);
  os << "# t=" << snapshot_times.at(k) << "\nx,u,v\n";
  for (Index x = 0; x < s.sites(); ++x) os << x << ',' << s.u[x] << ',' << s.v[x] << '\n';
}

VolterraSolution solve_boundary_volterra(const ChainParams& p, const Eigen::VectorXd& z1, double q0, double p0,
                                         double T, double dt) {
  if (!(dt > 0.0) || !(T > 0.0)) throw Error(ErrorKind::InvalidArgument, "dt and T must be positive");
  const Index n = static_cast<Index>(std::llround(T / dt));
  const double h = dt, eta = 0.5 * dt;
  if (z1.size() != 0 && z1.size() < 2 * n + 1)
    throw Error(ErrorKind::InvalidArgument, "forcing must be sampled on the half-step grid 0..2n");

  const double nu2 = p.nu() * p.nu();
  const double stiff = p.kappa() + nu2 + p.m() * p.m();
  const double gamma = p.gamma();
  const Eigen::VectorXd K1 = kernel_K(1, TimeGrid{eta, 2 * n}, p);

  Eigen::VectorXd qh = Eigen::VectorXd::Zero(2 * n + 1);
  Eigen::VectorXd w(2 * n + 1);
  qh[0] = q0;

  auto memory = [&](Index k) {
    if (k == 0) return 0.0;
    simpson_weights(k, eta, w);
    double acc = 0.0;
    for (Index j = 0; j < k; ++j) acc += w[j] * K1[k - j] * qh[j];  // K(1, 0) = 0
    return acc;
  };
  auto forcing = [&](Index k) { return z1.size() ? z1[k] : 0.0; };
  auto accel = [&](double mem, Index k, double q, double v) {
    return -stiff * q - gamma * v + nu2 * (mem + forcing(k));
  };

  VolterraSolution vs{p, TimeGrid{h, n}, Eigen::VectorXd(n + 1), Eigen::VectorXd(n + 1), Eigen::VectorXd(n + 1),
                      z1.size() ? Eigen::VectorXd(nu2 * z1.head(2 * n + 1)) : Eigen::VectorXd()};
  double q = q0, v = p0;
  for (Index s = 0; s < n; ++s) {
    const Index k = 2 * s;
    const double a1 = accel(memory(k), k, q, v);
    vs.q0[s] = q;
    vs.p0[s] = v;
    vs.a0[s] = a1;

    const double mid = memory(k + 1);
    const double q2 = q + 0.5 * h * v, v2 = v + 0.5 * h * a1;
    const double a2 = accel(mid, k + 1, q2, v2);
    const double q3 = q + 0.5 * h * v2, v3 = v + 0.5 * h * a2;
    const double a3 = accel(mid, k + 1, q3, v3);
    qh[k + 1] = q3;  // provisional midpoint for the end-of-step memory
    const double q4 = q + h * v3, v4 = v + h * a3;
    const double a4 = accel(memory(k + 2), k + 2, q4, v4);

    const double qn = q + h / 6.0 * (v + 2.0 * v2 + 2.0 * v3 + v4);
    const double vn = v + h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
    qh[k + 1] = 0.5 * (q + qn) + h / 8.0 * (v - vn);  // cubic Hermite midpoint
    qh[k + 2] = qn;
    q = qn;
    v = vn;
  }
  vs.q0[n] = q;
  vs.p0[n] = v;
  vs.a0[n] = accel(memory(2 * n), 2 * n, q, v);
  return vs;
}

InteriorSeries reconstruct_q(const ChainParams& p, const VolterraSolution& vs, Index max_site) {
  const Index n = vs.grid.n;
  const double h = vs.grid.dt;
  InteriorSeries out{Eigen::MatrixXd::Zero(max_site, n + 1), Eigen::MatrixXd::Zero(max_site, n + 1)};
  if (max_site < 1) return out;
  const Eigen::MatrixXd K = kernel_K_block(max_site, vs.grid, p);
  Eigen::VectorXd w(n + 1);
  for (Index k = 1; k <= n; ++k) {
    simpson_weights(k, h, w);
    for (Index j = 0; j < k; ++j) {  // K(x, 0) = 0 drops j = k
      out.q.col(k) += (w[j] * vs.q0[j]) * K.col(k - j);
      out.qdot.col(k) += (w[j] * vs.p0[j]) * K.col(k - j);
    }
    out.qdot.col(k) += vs.q0[0] * K.col(k);
  }
  return out;
}

}  // namespace chain
