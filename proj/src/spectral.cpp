#include "chain/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

namespace chain {

namespace {

constexpr Complex kI{0.0, 1.0};

double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// One-sided boundary value of e^{i theta} for real omega inside the closed band.
// Above: sign(sin theta) = sign(omega); below is the complex conjugate.
Complex band_limit(double omega, const ChainParams& p, double side_sign) {
  const double nu2 = p.nu() * p.nu();
  const double c = 1.0 - (omega * omega - p.m() * p.m()) / (2.0 * nu2);
  const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
  if (s == 0.0) throw Error(ErrorKind::EdgePoint, "omega is a spectral edge");
  return {c, side_sign * sign_of(omega) * s};
}

}  // namespace

BranchValue theta_of_omega(Complex omega, const ChainParams& p, Side side) {
  const double nu2 = p.nu() * p.nu();
  const double m2 = p.m() * p.m();
  const double lo = p.band_lo(), hi = p.band_hi();
  const double re = omega.real(), im = omega.imag();
  const double scale = 1.0 + std::abs(omega);

  const bool near_real = std::abs(im) <= kNearBandTol * scale;
  const bool in_band = std::abs(re) >= lo && std::abs(re) <= hi;
  if (near_real && in_band) {
    double side_sign = 0.0;
    Side resolved = side;
    switch (side) {
      case Side::LimitFromAbove: side_sign = 1.0; break;
      case Side::LimitFromBelow: side_sign = -1.0; break;
      case Side::UpperHalfPlane:
        side_sign = sign_of(im);
        resolved = im > 0.0 ? Side::LimitFromAbove : Side::LimitFromBelow;
        break;
    }
    if (re == 0.0 && p.m() == 0.0 && im == 0.0)
      throw Error(ErrorKind::EdgePoint, "omega is a spectral edge");
    if (side_sign == 0.0)
      throw Error(ErrorKind::InvalidArgument, "real omega inside the band needs a limit side");
    const Complex z = band_limit(re, p, side_sign);
    return {Complex(std::atan2(z.imag(), z.real()), 0.0), z, resolved};
  }

  // z + 1/z = 2c; take the root of larger modulus and invert it, so |z| < 1.
  const Complex c = 1.0 - (omega * omega - m2) / (2.0 * nu2);
  const Complex r = std::sqrt(c * c - 1.0);
  const Complex w1 = c + r, w2 = c - r;
  const Complex z = 1.0 / (std::abs(w1) >= std::abs(w2) ? w1 : w2);
  return {-kI * std::log(z), z, Side::UpperHalfPlane};
}

Complex d_tilde(Complex omega, const ChainParams& p, Side side) {
  const double nu2 = p.nu() * p.nu();
  Complex z;
  // e^{i theta} is continuous up to the edges: 1 at +-m, -1 at +-b
  if (omega.imag() == 0.0 && std::abs(omega.real()) == p.band_lo() && p.m() > 0.0)
    z = 1.0;
  else if (omega.imag() == 0.0 && std::abs(omega.real()) == p.band_hi())
    z = -1.0;
  else if (omega == Complex(0.0) && p.m() == 0.0)
    z = 1.0;
  else
    z = theta_of_omega(omega, p, side).exp_itheta;
  return -omega * omega + p.kappa() + nu2 + p.m() * p.m() - kI * omega * p.gamma() - nu2 * z;
}

Complex d_tilde_derivative(Complex omega, const ChainParams& p) {
  const Complex z = theta_of_omega(omega, p).exp_itheta;
  const Complex z2 = z * z;
  return -2.0 * omega - kI * p.gamma() + 2.0 * omega * z2 / (z2 - 1.0);
}

Complex n_tilde(Complex omega, const ChainParams& p, Side side) {
  const Complex d = d_tilde(omega, p, side);
  if (std::abs(d) < 1e-13) throw Error(ErrorKind::PoleHit, "D(omega) vanishes");
  return 1.0 / d;
}

Complex d_tilde_on_band(double theta, const ChainParams& p, Side side) {
  const double nu2 = p.nu() * p.nu();
  const double s = side == Side::LimitFromBelow ? 1.0 : -1.0;
  const Complex e = std::polar(1.0, s * theta);
  return p.kappa() - kI * p.gamma() * dispersion(theta, p) - nu2 * (1.0 - e);
}

namespace {

// Bracketed secant (Illinois) with bisection safeguard on a sign-changing real function.
double bracketed_root(const std::function<double(double)>& f, double a, double b) {
  double fa = f(a), fb = f(b);
  int side = 0;
  for (int iter = 0; iter < 400; ++iter) {
    double c = (a * fb - b * fa) / (fb - fa);
    if (!(c > std::min(a, b) && c < std::max(a, b))) c = 0.5 * (a + b);
    const double fc = f(c);
    if (fc == 0.0) return c;
    if ((fc > 0.0) == (fb > 0.0)) {
      b = c;
      fb = fc;
      if (side == -1) fa *= 0.5;
      side = -1;
    } else {
      a = c;
      fa = fc;
      if (side == 1) fb *= 0.5;
      side = 1;
    }
    if (std::abs(b - a) <= 1e-15 * std::abs(b)) break;
    if (iter % 8 == 7) {  // guarantee progress
      const double mid = 0.5 * (a + b);
      const double fm = f(mid);
      if ((fm > 0.0) == (fa > 0.0)) {
        a = mid;
        fa = fm;
      } else {
        b = mid;
        fb = fm;
      }
    }
  }
  return std::abs(fa) < std::abs(fb) ? a : b;
}

}  // namespace

RealSpectrumReport find_real_spectrum(const ChainParams& p) {
  RealSpectrumReport report;
  const double nu2 = p.nu() * p.nu();
  const double m = p.m(), kappa = p.kappa(), gamma = p.gamma();
  const double hi = p.band_hi();

  // (a) Above the band D is real when gamma = 0 and decreases from kappa - 2 nu^2 to -infinity.
  if (gamma == 0.0 && kappa > 2.0 * nu2 * (1.0 + kResonanceRelTol)) {
    const auto f = [&](double w) {
      // e^{i theta} = -s, cosh b = (w^2 - m^2) / (2 nu^2) - 1, s = e^{-b}
      const double ch = (w * w - m * m) / (2.0 * nu2) - 1.0;
      const double s = ch <= 1.0 ? 1.0 : 1.0 / (ch + std::sqrt(ch * ch - 1.0));
      return -w * w + kappa + nu2 + m * m + nu2 * s;
    };
    double upper = 2.0 * hi;
    while (f(upper) > 0.0) upper *= 2.0;
    const double omega0 = bracketed_root(f, hi, upper);
    report.discrete_eigenvalues = {-omega0, omega0};
  }

  // (b) Embedded zeros of the lower boundary value: P = omega^2 - m^2 solves
  // P^2 + 4 P (gamma^2 - nu^2) + 4 m^2 gamma^2 = 0 with kappa = P / 2.
  if (gamma > 0.0 && gamma < p.nu()) {
    const double a = nu2 - gamma * gamma;
    const double disc = a * a - m * m * gamma * gamma;
    if (disc >= 0.0) {
      std::vector<double> roots;
      if (m == 0.0) {
        roots.push_back(4.0 * a);
      } else {
        roots.push_back(2.0 * a + 2.0 * std::sqrt(disc));
        roots.push_back(2.0 * a - 2.0 * std::sqrt(disc));
      }
      for (double P : roots) {
        if (!(P > 0.0 && P < 4.0 * nu2)) continue;
        if (std::abs(kappa - 0.5 * P) > kResonanceRelTol * std::max(1.0, kappa)) continue;
        const double w = std::sqrt(m * m + P);
        if (std::abs(d_tilde(w, p, Side::LimitFromBelow)) < kEdgeZeroTol &&
            std::find(report.embedded_resonances.begin(), report.embedded_resonances.end(), w) ==
                report.embedded_resonances.end()) {
          report.embedded_resonances.push_back(-w);
          report.embedded_resonances.push_back(w);
        }
      }
      std::sort(report.embedded_resonances.begin(), report.embedded_resonances.end());
    }
  }

  // (c) Closed-form edge values: D(+-m) = kappa -+ i gamma m, D(+-b) = kappa - 2 nu^2 -+ i gamma b.
  if (std::abs(Complex(kappa, -gamma * m)) < kEdgeZeroTol) {
    if (m == 0.0) {
      report.edge_zeros.push_back(0.0);
    } else {
      report.edge_zeros.push_back(-m);
      report.edge_zeros.push_back(m);
    }
  }
  if (std::abs(Complex(kappa - 2.0 * nu2, -gamma * hi)) < kEdgeZeroTol) {
    report.edge_zeros.push_back(-hi);
    report.edge_zeros.push_back(hi);
  }
  std::sort(report.edge_zeros.begin(), report.edge_zeros.end());
  return report;
}

EdgeExpansion edge_expansion(const ChainParams& p, double edge) {
  const double nu = p.nu(), nu2 = nu * nu;
  const double m = p.m(), kappa = p.kappa(), gamma = p.gamma();
  const double hi = p.band_hi();
  const double tol = 1e-12 * std::max(1.0, hi);
  const double sigma = edge < 0.0 ? -1.0 : 1.0;

  EdgeExpansion e{p};
  e.edge = edge;
  if (m == 0.0 && std::abs(edge) <= tol) {
    e.kind = EdgeExpansion::Kind::Origin;
    if (kappa != 0.0) {
      e.leading_power = 0;
      e.jump_exponent = 1;
      e.coefficients = {1.0 / kappa, kI * (gamma + nu) / (kappa * kappa)};
    } else {
      const double g = gamma + nu;
      e.leading_power = -1;
      e.jump_exponent = -1;
      e.coefficients = {kI / g, -1.0 / (2.0 * g * g)};
    }
    return e;
  }
  if (m > 0.0 && std::abs(std::abs(edge) - m) <= tol) {
    e.kind = EdgeExpansion::Kind::Lower;
    if (kappa == 0.0 && gamma == 0.0) {
      e.leading_power = -1;
      e.jump_exponent = -1;
      e.coefficients = {kI / nu, -1.0 / (2.0 * nu2)};
    } else {
      const Complex c3 = 1.0 / Complex(kappa, -sigma * m * gamma);
      e.coefficients = {c3, kI * nu * c3 * c3};
    }
    return e;
  }
  if (std::abs(std::abs(edge) - hi) <= tol) {
    e.kind = EdgeExpansion::Kind::Upper;
    if (gamma == 0.0 && std::abs(kappa - 2.0 * nu2) <= kResonanceRelTol * std::max(1.0, kappa)) {
      e.leading_power = -1;
      e.jump_exponent = -1;
      e.coefficients = {kI / nu, 1.0 / (2.0 * nu2)};
    } else {
      const Complex c1 = 1.0 / Complex(kappa - 2.0 * nu2, -sigma * gamma * hi);
      e.coefficients = {c1, kI * nu * c1 * c1};
    }
    return e;
  }
  throw Error(ErrorKind::InvalidArgument, "requested edge is not a band endpoint");
}

Complex EdgeExpansion::variable(Complex omega, Side side) const {
  if (kind == Kind::Origin) return omega;
  const double m2 = params.m() * params.m();
  const double hi = params.band_hi();
  const Complex w = kind == Kind::Lower ? std::sqrt(omega * omega - m2) : std::sqrt(hi * hi - omega * omega);
  // pick the sign for which e^{i theta} ~ +-1 + (i / nu) w
  const Complex z = theta_of_omega(omega, params, side).exp_itheta;
  const Complex base = kind == Kind::Lower ? Complex(1.0) : Complex(-1.0);
  const Complex plus = base + kI * w / params.nu();
  const Complex minus = base - kI * w / params.nu();
  return std::abs(plus - z) <= std::abs(minus - z) ? w : -w;
}

Complex EdgeExpansion::evaluate(Complex omega, Side side) const {
  const Complex w = variable(omega, side);
  if (leading_power == 0) return coefficients[0] + coefficients[1] * w;
  return coefficients[0] / w + coefficients[1];
}

Complex resolvent_kernel(Complex omega, Index x, Index y, const ChainParams& p, Side side) {
  const Complex z = theta_of_omega(omega, p, side).exp_itheta;
  const Complex sin_theta = (z - 1.0 / z) / (2.0 * kI);
  const Index n = x > y ? x - y : y - x;
  Complex zn = 1.0;
  Complex base = z;
  for (Index k = n; k > 0; k >>= 1) {
    if (k & 1) zn *= base;
    base *= base;
  }
  return kI * zn / (2.0 * p.nu() * p.nu() * sin_theta);
}

ResolventEdgeApplication resolvent_edge_apply(const Eigen::VectorXcd& f, Complex omega,
                                              const ChainParams& p, Index half_width, Side side) {
  if (f.size() % 2 == 0) throw Error(ErrorKind::InvalidArgument, "f must have odd length 2W+1");
  const Index wf = (f.size() - 1) / 2;
  const double nu = p.nu(), nu2 = nu * nu;

  // nearest edge to Re(omega)
  std::vector<double> edges = {p.band_hi(), -p.band_hi()};
  if (p.m() == 0.0) {
    edges.push_back(0.0);
  } else {
    edges.push_back(p.m());
    edges.push_back(-p.m());
  }
  const double edge = *std::min_element(edges.begin(), edges.end(), [&](double a, double b) {
    return std::abs(omega.real() - a) < std::abs(omega.real() - b);
  });
  const bool upper = std::abs(std::abs(edge) - p.band_hi()) < 1e-12 * p.band_hi();

  ResolventEdgeApplication out;
  out.edge = edge;
  out.half_width = half_width;
  const Index n = 2 * half_width + 1;
  out.direct = Eigen::VectorXcd::Zero(n);
  out.singular = Eigen::VectorXcd::Zero(n);
  out.convolution = Eigen::VectorXcd::Zero(n);

  // local variable: reuse the edge-expansion branch selection
  EdgeExpansion probe{p};
  probe.edge = edge;
  probe.kind = upper ? EdgeExpansion::Kind::Upper
                     : (p.m() == 0.0 ? EdgeExpansion::Kind::Origin : EdgeExpansion::Kind::Lower);
  const Complex w = probe.variable(omega, side);

  Complex fhat = 0.0;  // f^(0) or f^(pi)
  for (Index y = -wf; y <= wf; ++y) {
    const double parity = (upper && (y % 2 != 0)) ? -1.0 : 1.0;
    fhat += parity * f[y + wf];
  }
  out.singular_coefficient = kI * fhat / (2.0 * nu * w);

  for (Index x = -half_width; x <= half_width; ++x) {
    Complex direct = 0.0, conv = 0.0;
    for (Index y = -wf; y <= wf; ++y) {
      const Complex fy = f[y + wf];
      if (fy == Complex(0.0)) continue;
      direct += resolvent_kernel(omega, x, y, p, side) * fy;
      const Index d = x > y ? x - y : y - x;
      if (upper) {
        conv += ((d % 2 == 0) ? 1.0 : -1.0) * double(d) * fy / (2.0 * nu2);
      } else {
        conv -= double(d) * fy / (2.0 * nu2);
      }
    }
    out.direct[x + half_width] = direct;
    out.convolution[x + half_width] = conv;
    const double parity = (upper && (x % 2 != 0)) ? -1.0 : 1.0;
    out.singular[x + half_width] = parity * out.singular_coefficient;
  }
  return out;
}

namespace {

// Accumulated change of arg D along the segment a -> b, refined until each sub-step turns < 0.3 rad.
double arg_change(const ChainParams& p, Complex a, Complex b, Complex fa, Complex fb, int depth) {
  const double d = std::arg(fb / fa);
  if (std::abs(d) < 0.3 || depth > 48) return d;
  const Complex mid = 0.5 * (a + b);
  const Complex fm = d_tilde(mid, p);
  return arg_change(p, a, mid, fa, fm, depth + 1) + arg_change(p, mid, b, fm, fb, depth + 1);
}

double contour_arg(const ChainParams& p, const Rect& r) {
  const std::array<Complex, 4> corners = {Complex(r.re_lo, r.im_lo), Complex(r.re_hi, r.im_lo),
                                          Complex(r.re_hi, r.im_hi), Complex(r.re_lo, r.im_hi)};
  double total = 0.0;
  constexpr int kSamples = 64;
  for (int side = 0; side < 4; ++side) {
    const Complex a = corners[side], b = corners[(side + 1) % 4];
    Complex prev = a;
    Complex fprev = d_tilde(a, p);
    for (int k = 1; k <= kSamples; ++k) {
      const Complex cur = a + (b - a) * (double(k) / kSamples);
      const Complex fcur = d_tilde(cur, p);
      total += arg_change(p, prev, cur, fprev, fcur, 0);
      prev = cur;
      fprev = fcur;
    }
  }
  return total;
}

Complex newton(const ChainParams& p, Complex w) {
  for (int iter = 0; iter < 60; ++iter) {
    const Complex step = d_tilde(w, p) / d_tilde_derivative(w, p);
    w -= step;
    if (std::abs(step) < 1e-15 * (1.0 + std::abs(w))) break;
  }
  return w;
}

bool inside(const Rect& r, Complex w, double pad) {
  return w.real() >= r.re_lo - pad && w.real() <= r.re_hi + pad && w.imag() >= r.im_lo - pad &&
         w.imag() <= r.im_hi + pad;
}

void locate(const ChainParams& p, const Rect& r, int count, double resolution, std::vector<Complex>& out,
            int depth) {
  if (count <= 0) return;
  const double width = r.re_hi - r.re_lo, height = r.im_hi - r.im_lo;
  const double size = std::max(width, height);
  if (count == 1 && size < resolution) {
    const Complex w = newton(p, Complex(0.5 * (r.re_lo + r.re_hi), 0.5 * (r.im_lo + r.im_hi)));
    if (inside(r, w, 0.25 * size) && std::abs(d_tilde(w, p)) < 1e-10) {
      out.push_back(w);
      return;
    }
  }
  if (size < 1e-12 || depth > 80) {
    for (int k = 0; k < count; ++k) out.push_back(Complex(0.5 * (r.re_lo + r.re_hi), 0.5 * (r.im_lo + r.im_hi)));
    return;
  }
  // split the longer side; nudge the cut off-centre if a zero sits on it
  for (double frac : {0.5, 0.4871, 0.5239, 0.4577}) {
    Rect a = r, b = r;
    if (width >= height) {
      a.re_hi = b.re_lo = r.re_lo + frac * width;
    } else {
      a.im_hi = b.im_lo = r.im_lo + frac * height;
    }
    const int ca = count_zeros(p, a);
    const int cb = count_zeros(p, b);
    if (ca + cb == count && ca >= 0 && cb >= 0) {
      locate(p, a, ca, resolution, out, depth + 1);
      locate(p, b, cb, resolution, out, depth + 1);
      return;
    }
  }
  throw Error(ErrorKind::InvalidArgument, "argument-principle subdivision failed to separate zeros");
}

}  // namespace

int count_zeros(const ChainParams& p, const Rect& r) {
  return static_cast<int>(std::lround(contour_arg(p, r) / (2.0 * std::numbers::pi)));
}

std::vector<Complex> lower_half_plane_poles(const ChainParams& p) {
  std::vector<Complex> poles;
  if (p.gamma() == 0.0) return poles;
  const double radius = 10.0 * p.band_hi() + 2.0 * p.gamma();
  const double delta = 1e-7 * p.band_hi();
  // slightly asymmetric so no cut lands on Re omega = 0, where overdamped poles sit
  const Rect region{-radius, 1.0173 * radius, -radius, -delta};
  const int count = count_zeros(p, region);
  locate(p, region, count, 1e-2 * p.band_hi(), poles, 0);
  std::sort(poles.begin(), poles.end(), [](Complex a, Complex b) { return a.real() < b.real(); });
  return poles;
}

}  // namespace chain
