#include "chain/core_model.hpp"

#include <sstream>

namespace chain {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::EdgePoint: return "EdgePoint";
    case ErrorKind::PoleHit: return "PoleHit";
    case ErrorKind::DegenerateSpectrum: return "DegenerateSpectrum";
    case ErrorKind::WindowTooSmall: return "WindowTooSmall";
    case ErrorKind::UnstableStep: return "UnstableStep";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::NonPositiveValue: return "NonPositiveValue";
    case ErrorKind::NotDegenerate: return "NotDegenerate";
    case ErrorKind::Config: return "ConfigError";
  }
  return "Error";
}

ChainParams::ChainParams(double nu, double m, double kappa, double gamma)
    : nu_(nu), m_(m), kappa_(kappa), gamma_(gamma) {
  if (!(std::isfinite(nu) && nu > 0.0))
    throw Error(ErrorKind::InvalidArgument, "nu must be a positive finite number");
  if (!(std::isfinite(m) && m >= 0.0))
    throw Error(ErrorKind::InvalidArgument, "m must be non-negative");
  if (!(std::isfinite(kappa) && kappa >= 0.0))
    throw Error(ErrorKind::InvalidArgument, "kappa must be non-negative");
  if (!(std::isfinite(gamma) && gamma >= 0.0))
    throw Error(ErrorKind::InvalidArgument, "gamma must be non-negative");
}

std::string ChainParams::describe() const {
  std::ostringstream os;
  os.precision(15);
  os << "nu=" << nu_ << " m=" << m_ << " kappa=" << kappa_ << " gamma=" << gamma_;
  return os.str();
}

HalfLineState delta_state(Index length, Index site, Component component) {
  if (site < 0 || site > length) throw Error(ErrorKind::InvalidArgument, "delta site outside 0..L");
  HalfLineState y(length);
  (component == Component::Position ? y.u : y.v)[site] = 1.0;
  return y;
}

double weighted_norm(const WholeLineState& y, double alpha) {
  double acc = 0.0;
  for (Index x = -y.half_width; x <= y.half_width; ++x) {
    const double w = std::pow(1.0 + double(x) * double(x), alpha);
    acc += w * (y.u_at(x) * y.u_at(x) + y.v_at(x) * y.v_at(x));
  }
  return std::sqrt(acc);
}

double pairing(const HalfLineState& a, const HalfLineState& b) {
  const Index n = std::min(a.sites(), b.sites());
  return a.u.head(n).dot(b.u.head(n)) + a.v.head(n).dot(b.v.head(n));
}

double hamiltonian(const ChainParams& p, const HalfLineState& y) {
  const double nu2 = p.nu() * p.nu();
  const double m2 = p.m() * p.m();
  const Index n = y.sites();
  double h = y.v.squaredNorm() + m2 * y.u.squaredNorm();
  // bond x = L vanishes under u(L+1) = u(L)
  if (n > 1) h += nu2 * (y.u.tail(n - 1) - y.u.head(n - 1)).squaredNorm();
  h += p.kappa() * y.u[0] * y.u[0];
  return 0.5 * h;
}

WholeLineState odd_extension(const HalfLineState& y) {
  WholeLineState w(y.length());
  for (Index x = 1; x <= y.length(); ++x) {
    w.u_at(x) = y.u[x];
    w.v_at(x) = y.v[x];
    w.u_at(-x) = -y.u[x];
    w.v_at(-x) = -y.v[x];
  }
  return w;
}

const char* to_string(SpectralTag tag) {
  switch (tag) {
    case SpectralTag::ConditionC: return "C";
    case SpectralTag::ConditionC0: return "C0";
    case SpectralTag::Degenerate: return "Degenerate";
  }
  return "?";
}

const char* to_string(DegenerateReason reason) {
  switch (reason) {
    case DegenerateReason::ZeroModeAtOrigin: return "ZeroModeAtOrigin";
    case DegenerateReason::DiscreteEigenvalueAboveBand: return "DiscreteEigenvalueAboveBand";
    case DegenerateReason::EmbeddedResonance: return "EmbeddedResonance";
    case DegenerateReason::EdgeResonanceAtMass: return "EdgeResonanceAtMass";
  }
  return "?";
}

namespace {

bool close_rel(double a, double b) {
  return std::abs(a - b) <= kResonanceRelTol * std::max({1.0, std::abs(a), std::abs(b)});
}

SpectralClass degenerate(DegenerateReason reason, std::optional<double> omega = std::nullopt) {
  return SpectralClass{SpectralTag::Degenerate, std::nullopt, reason, omega};
}

}  // namespace

SpectralClass classify_conditions(const ChainParams& p) {
  const double nu2 = p.nu() * p.nu();
  const double m = p.m(), kappa = p.kappa(), gamma = p.gamma();

  if (m == 0.0 && kappa == 0.0) return degenerate(DegenerateReason::ZeroModeAtOrigin, 0.0);

  if (gamma == 0.0) {
    if (kappa > 0.0 && kappa < 2.0 * nu2 && !close_rel(kappa, 2.0 * nu2))
      return SpectralClass{SpectralTag::ConditionC, 3, std::nullopt, std::nullopt};
    if (close_rel(kappa, 2.0 * nu2) || kappa == 0.0)  // kappa == 0 here implies m != 0
      return SpectralClass{SpectralTag::ConditionC0, 1, std::nullopt, std::nullopt};
    // kappa > 2 nu^2: e^{i theta} = -s with s = nu^2 / (kappa - nu^2)
    const double s = nu2 / (kappa - nu2);
    const double omega0 = std::sqrt(m * m + nu2 * (s + 1.0 / s + 2.0));
    return degenerate(DegenerateReason::DiscreteEigenvalueAboveBand, omega0);
  }

  // gamma > 0: resonant kappa values where D(omega - i0) vanishes inside the band
  const double a = nu2 - gamma * gamma;
  if (m == 0.0) {
    if (gamma < p.nu() && close_rel(kappa, 2.0 * a))
      return degenerate(DegenerateReason::EmbeddedResonance, 2.0 * std::sqrt(a));
  } else {
    const double gamma_max = 0.5 * (p.band_hi() - m);
    if (gamma <= gamma_max * (1.0 + kResonanceRelTol)) {
      const double disc = std::sqrt(std::max(0.0, a * a - m * m * gamma * gamma));
      for (double k : {a + disc, a - disc}) {
        if (k > 0.0 && close_rel(kappa, k))
          return degenerate(DegenerateReason::EmbeddedResonance, std::sqrt(m * m + 2.0 * k));
      }
    }
  }
  return SpectralClass{SpectralTag::ConditionC, 3, std::nullopt, std::nullopt};
}

}  // namespace chain
