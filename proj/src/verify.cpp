#include "chain/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <json.hpp>

#include "chain/spectral.hpp"

namespace chain {

namespace {

constexpr double kPi = std::numbers::pi;

struct LineFit {
  double slope, intercept;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = double(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

}  // namespace

double dispersive_period(const ChainParams& p) {
  return 2.0 * kPi / (p.m() > 0.0 ? p.m() : p.band_hi());
}

DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& value, double expected,
                   const FitOptions& opt) {
  if (t.size() != value.size()) throw Error(ErrorKind::InvalidArgument, "t and value differ in length");
  const double t_lo = opt.t_min;
  const double t_hi = opt.t_max > 0.0 ? opt.t_max : (t.empty() ? 0.0 : t.back());

  std::vector<double> wt, wv;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_lo || t[i] > t_hi) continue;
    if (!(value[i] >= 0.0) || (opt.block_width <= 0.0 && value[i] == 0.0))
      throw Error(ErrorKind::NonPositiveValue, "decay series has non-positive values");
    wt.push_back(t[i]);
    wv.push_back(value[i]);
  }
  if (Index(wt.size()) < opt.min_samples)
    throw Error(ErrorKind::InsufficientData, "fewer samples than required inside the fit window");
  if (!(wt.front() > 0.0) || std::log10(wt.back() / wt.front()) < opt.min_decades - 1e-9)
    throw Error(ErrorKind::InsufficientData, "fit window spans too few decades");

  DecayFit fit;
  fit.t_min = t_lo;
  fit.t_max = t_hi;
  fit.samples = Index(wt.size());
  fit.expected = expected;

  if (opt.block_width > 0.0) {
    // one maximum per complete block [t_lo + k w, t_lo + (k + 1) w)
    std::size_t i = 0;
    for (double start = wt.front(); start + opt.block_width <= wt.back() + 1e-12; start += opt.block_width) {
      double best = -1.0, at = start;
      while (i < wt.size() && wt[i] < start + opt.block_width) {
        if (wv[i] > best) {
          best = wv[i];
          at = wt[i];
        }
        ++i;
      }
      if (best > 0.0) {
        fit.t.push_back(at);
        fit.value.push_back(best);
      } else if (best == 0.0) {
        throw Error(ErrorKind::NonPositiveValue, "block maximum vanishes");
      }
    }
  } else {
    fit.t = wt;
    fit.value = wv;
  }
  if (fit.t.size() < 3) throw Error(ErrorKind::InsufficientData, "fewer than three fit points");

  std::vector<double> x(fit.t.size()), y(fit.t.size()), yc(fit.t.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    x[k] = std::log(fit.t[k]);
    y[k] = std::log(fit.value[k]);
    yc[k] = y[k] - expected * std::log(bracket(fit.t[k]));
  }
  const LineFit line = least_squares(x, y);
  fit.slope = line.slope;
  fit.intercept = line.intercept;
  fit.compensated_slope = least_squares(x, yc).slope;
  fit.envelope_flat = std::abs(fit.compensated_slope) <= opt.flat_tol;

  // residual bootstrap
  std::vector<double> resid(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) resid[k] = y[k] - (line.intercept + line.slope * x[k]);
  std::mt19937_64 rng(opt.seed);
  std::uniform_int_distribution<std::size_t> pick(0, x.size() - 1);
  std::vector<double> slopes(std::max(opt.bootstrap, 1));
  std::vector<double> yb(x.size());
  for (auto& s : slopes) {
    for (std::size_t k = 0; k < x.size(); ++k) yb[k] = line.intercept + line.slope * x[k] + resid[pick(rng)];
    s = least_squares(x, yb).slope;
  }
  std::sort(slopes.begin(), slopes.end());
  auto quantile = [&](double q) {
    const double pos = q * double(slopes.size() - 1);
    const std::size_t lo = std::size_t(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, slopes.size() - 1);
    return slopes[lo] + (pos - double(lo)) * (slopes[hi] - slopes[lo]);
  };
  fit.slope_ci = 0.5 * (quantile(0.975) - quantile(0.025));
  return fit;
}

std::string to_json(const std::vector<CheckReport>& reports) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const auto& r : reports) {
    nlohmann::ordered_json j;
    j["check_id"] = r.check_id;
    if (r.params)
      j["params"] = {{"nu", r.params->nu()}, {"m", r.params->m()}, {"kappa", r.params->kappa()},
                     {"gamma", r.params->gamma()}};
    else
      j["params"] = nullptr;
    j["window"] = {r.t_min, r.t_max};
    j["slope"] = r.slope;
    j["ci"] = r.ci;
    j["expected"] = r.expected;
    j["pass"] = r.pass;
    if (!r.detail.empty()) j["detail"] = r.detail;
    doc.push_back(j);
  }
  return doc.dump(2);
}

CheckReport report_from_fit(const std::string& id, const ChainParams& p, const DecayFit& fit, bool pass) {
  return CheckReport{id, p, fit.t_min, fit.t_max, fit.slope, fit.slope_ci, fit.expected, pass, {}};
}

double expected_exponent(const ChainParams& p) {
  const SpectralClass c = classify_conditions(p);
  if (!c.decaying()) throw Error(ErrorKind::DegenerateSpectrum, "no decay exponent for " + p.describe());
  return -0.5 * double(*c.beta);
}

DecayFit verify_main_bound(const Trajectory& tr, double alpha, const FitOptions& opt) {
  const auto it = std::find(tr.alphas.begin(), tr.alphas.end(), -alpha);
  if (it == tr.alphas.end()) throw Error(ErrorKind::InvalidArgument, "trajectory did not record the -alpha norm");
  const auto& norms = tr.norms[std::size_t(it - tr.alphas.begin())];
  const SpectralClass c = classify_conditions(tr.params);
  const double expected = c.decaying() ? -0.5 * double(*c.beta) : 0.0;
  return fit_decay(tr.t, norms, expected, opt);
}

DecayFit verify_main_bound(const ChainParams& p, const HalfLineState& y0, double alpha, const IntegrationOptions& run,
                           const FitOptions& opt) {
  IntegrationOptions o = run;
  if (std::find(o.alphas.begin(), o.alphas.end(), -alpha) == o.alphas.end()) o.alphas.push_back(-alpha);
  return verify_main_bound(integrate_full(p, y0, o), alpha, opt);
}

DecayFit verify_free_bound(const ChainParams& p, const HalfLineState& y0, double alpha, double dt_sample,
                           const FitOptions& opt) {
  const double t_end = opt.t_max;
  const Index L = window_length(p, t_end, y0.support_end());
  const HalfLineState y = y0.resized(L);
  std::vector<double> ts, vs;
  for (double t = opt.t_min; t <= t_end + 1e-9; t += dt_sample) {
    ts.push_back(t);
    vs.push_back(weighted_norm(free_flow(y, t, p), -alpha));
  }
  return fit_decay(ts, vs, -1.5, opt);
}

DecayFit verify_whole_line_contrast(const ChainParams& p, const WholeLineState& y0, double alpha, double dt_sample,
                                    const FitOptions& opt) {
  const double t_end = opt.t_max;
  Index support = 0;
  for (Index x = -y0.half_width; x <= y0.half_width; ++x)
    if (y0.u_at(x) != 0.0 || y0.v_at(x) != 0.0) support = std::max(support, x < 0 ? -x : x);
  const Index W = window_length(p, t_end, support);
  WholeLineState y(W);
  for (Index x = -support; x <= support; ++x) {
    y.u_at(x) = y0.u_at(x);
    y.v_at(x) = y0.v_at(x);
  }
  std::vector<double> ts, vs;
  for (double t = opt.t_min; t <= t_end + 1e-9; t += dt_sample) {
    ts.push_back(t);
    vs.push_back(weighted_norm(whole_line_flow(y, t, p), -alpha));
  }
  return fit_decay(ts, vs, -0.5, opt);
}

ScatteringResidual verify_scattering(const Trajectory& tr, const HalfLineState& y0, double alpha,
                                     const ScatteringVectors& sv, const FitOptions& opt) {
  const ChainParams& p = tr.params;
  const HalfLineState free0 = y0.resized(sv.y_window);
  const Index X = sv.x_window;
  ScatteringResidual out;
  for (std::size_t k = 0; k < tr.snapshots.size(); ++k) {
    const double t = tr.snapshot_times[k];
    if (t < opt.t_min || (opt.t_max > 0.0 && t > opt.t_max)) continue;
    const HalfLineState omega_free = omega_apply(free_flow(free0, t, p), sv);
    HalfLineState r = tr.snapshots[k].resized(X);
    r.u -= omega_free.u;
    r.v -= omega_free.v;
    out.t.push_back(t);
    out.residual.push_back(weighted_norm(r, -alpha));
  }
  out.fit = fit_decay(out.t, out.residual, expected_exponent(p), opt);
  return out;
}

WitnessReport degenerate_witness(const ChainParams& p, Index sites, double alpha) {
  const SpectralClass c = classify_conditions(p);
  if (c.decaying()) throw Error(ErrorKind::NotDegenerate, "parameters satisfy C or C0: " + p.describe());

  WitnessReport rep{*c.reason};
  double omega = 0.0;
  Complex z = 1.0;
  switch (*c.reason) {
    case DegenerateReason::ZeroModeAtOrigin:
      break;
    case DegenerateReason::DiscreteEigenvalueAboveBand: {
      const RealSpectrumReport rs = find_real_spectrum(p);
      omega = rs.discrete_eigenvalues.back();
      z = theta_of_omega(omega, p).exp_itheta;
      break;
    }
    case DegenerateReason::EmbeddedResonance:
    case DegenerateReason::EdgeResonanceAtMass: {
      omega = *c.frequency;
      // theta_+ = lim theta(omega + i eps), Richardson over eps, eps / 2, eps / 4
      auto th = [&](double eps) { return theta_of_omega(Complex(omega, eps), p).theta.real(); };
      const double t1 = th(1e-4), t2 = th(5e-5), t3 = th(2.5e-5);
      const double theta_plus = (8.0 * t3 - 6.0 * t2 + t1) / 3.0;
      z = std::polar(1.0, theta_plus);
      break;
    }
  }
  rep.frequency = omega;
  rep.exp_itheta = z;

  const double nu2 = p.nu() * p.nu(), m2 = p.m() * p.m();
  const bool zero_mode = omega == 0.0;
  // mode M(x, t) = z^x e^{i omega t}; the real witness is Im M (Re M for the zero mode)
  auto part = [&](Complex w) { return zero_mode ? w.real() : w.imag(); };
  std::vector<Complex> zx(sites + 1);
  zx[0] = 1.0;
  for (Index x = 1; x <= sites; ++x) zx[x] = zx[x - 1] * z;

  const double period = zero_mode ? 1.0 : 2.0 * kPi / omega;
  double residual = 0.0;
  for (int s = 0; s <= 40; ++s) {
    const double t = period * s / 40.0 + 0.1234;
    const Complex e = std::polar(1.0, omega * t);
    auto u = [&](Index x) { return part(zx[x] * e); };
    auto ud = [&](Index x) { return part(Complex(0.0, omega) * zx[x] * e); };
    auto udd = [&](Index x) { return part(-omega * omega * zx[x] * e); };
    residual = std::max(residual, std::abs(udd(0) - (nu2 * (u(1) - u(0)) - m2 * u(0) - p.kappa() * u(0) -
                                                     p.gamma() * ud(0))));
    for (Index x = 1; x < sites; ++x)
      residual = std::max(residual, std::abs(udd(x) - (nu2 * (u(x + 1) - 2.0 * u(x) + u(x - 1)) - m2 * u(x))));
  }
  rep.residual = residual;

  auto norms = [&](double t, bool complex_mode) {
    BasicHalfLineState<Complex> y(sites);
    const Complex e = std::polar(1.0, omega * t);
    for (Index x = 0; x <= sites; ++x) {
      const Complex m = zx[x] * e, md = Complex(0.0, omega) * m;
      y.u[x] = complex_mode ? m : Complex(part(m));
      y.v[x] = complex_mode ? md : Complex(part(md));
    }
    return weighted_norm(y, -alpha);
  };
  double lo = 1e300, hi = 0.0, first = 0.0, last = 0.0;
  for (int s = 0; s <= 64; ++s) {
    const double frac = s / 64.0;
    const double v = norms(period * frac, true);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    first = std::max(first, norms(period * frac, false));
    last = std::max(last, norms(period * (100.0 + frac), false));
  }
  rep.norm_variation = (hi - lo) / hi;
  rep.norm_ratio = last / first;
  return rep;
}

ZeroModeLimit verify_zero_mode_limit(const ChainParams& p, double T, double dt, const FitOptions& opt) {
  ZeroModeLimit out;
  out.limit = 1.0 / (p.gamma() + p.nu());
  const TimeGrid grid = TimeGrid::covering(dt, T);
  const Eigen::VectorXd N = kernel_N(p, grid, 0, KernelRoute::Volterra);
  out.final_gap = std::abs(N[grid.n] - out.limit);
  std::vector<double> ts(grid.n + 1), gap(grid.n + 1);
  for (Index k = 0; k <= grid.n; ++k) {
    ts[k] = grid.at(k);
    gap[k] = std::abs(N[k] - out.limit);
  }
  out.tail = fit_decay(ts, gap, -1.5, opt);
  return out;
}

KernelBoundsReport verify_kernel_bounds(const ChainParams& p, double dt, Index k_sites, const FitOptions& opt) {
  const TimeGrid grid = TimeGrid::covering(dt, opt.t_max);
  const BoundaryKernelTable table = BoundaryKernelTable::build(p, grid, k_sites);
  const double e = expected_exponent(p);

  KernelBoundsReport rep;
  std::vector<double> ts(grid.n + 1);
  for (Index k = 0; k <= grid.n; ++k) ts[k] = grid.at(k);
  auto add = [&](const std::string& name, const Eigen::VectorXd& v, double expected) {
    std::vector<double> vals(v.data(), v.data() + v.size());
    rep.names.push_back(name);
    rep.fits.push_back(fit_decay(ts, vals, expected, opt));
  };
  add("N", table.N.cwiseAbs(), e);
  add("Ndot", table.Ndot.cwiseAbs(), e);
  add("Nddot", table.Nddot.cwiseAbs(), e);
  if (k_sites > 0) {
    add("K1", table.K.row(0).transpose().cwiseAbs(), -1.5);
    Eigen::VectorXd weighted = Eigen::VectorXd::Zero(grid.n + 1);
    for (Index x = 1; x <= k_sites; ++x) {
      const double w = std::pow(1.0 + double(x) * double(x), -2.0);
      weighted += w * table.K.row(x - 1).transpose().cwiseAbs2();
    }
    add("K_weighted_sum", weighted, -3.0);
  }
  return rep;
}

}  // namespace chain
