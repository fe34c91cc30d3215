#ifndef CHAIN_SPECTRAL_HPP
#define CHAIN_SPECTRAL_HPP

#include <Eigen/Core>

#include <array>
#include <vector>

#include "chain/core_model.hpp"

namespace chain {

/// Which value of the multivalued quantities is requested.
/// UpperHalfPlane is the analytic branch Im theta > 0 (valid on all of C minus the band);
/// on the real band it resolves to the limit from the side of Im(omega).
enum class Side { UpperHalfPlane, LimitFromAbove, LimitFromBelow };

/// Solution theta(omega) of nu^2 (2 - 2 cos theta) = omega^2 - m^2.
struct BranchValue {
  Complex theta;
  Complex exp_itheta;
  Side side;
};

/// Real omega closer than this (relative) to the band is evaluated by the one-sided limit formula.
inline constexpr double kNearBandTol = 1e-9;

/// Dispersion relation phi(theta) = sqrt(nu^2 (2 - 2 cos theta) + m^2).
inline double dispersion(double theta, const ChainParams& p) {
  const double s = 2.0 * p.nu() * std::sin(0.5 * theta);
  return std::sqrt(s * s + p.m() * p.m());
}

BranchValue theta_of_omega(Complex omega, const ChainParams& p, Side side = Side::UpperHalfPlane);

/// Boundary symbol D(omega) = -omega^2 + kappa + nu^2 + m^2 - i omega gamma - nu^2 e^{i theta(omega)}.
Complex d_tilde(Complex omega, const ChainParams& p, Side side = Side::UpperHalfPlane);

/// d/d omega of D on the analytic branch (omega off the band).
Complex d_tilde_derivative(Complex omega, const ChainParams& p);

/// N(omega) = 1 / D(omega). Throws PoleHit when |D| < 1e-13.
Complex n_tilde(Complex omega, const ChainParams& p, Side side = Side::UpperHalfPlane);

/// Boundary values of D at omega = phi(theta) >= 0 on the band, written in the band angle:
/// D(phi +- i0) = kappa - i gamma phi - nu^2 (1 - e^{-+ i theta}).
Complex d_tilde_on_band(double theta, const ChainParams& p, Side side);

struct RealSpectrumReport {
  std::vector<double> discrete_eigenvalues;  ///< +-omega_0 with |omega_0| > band_hi, D(omega_0) = 0
  std::vector<double> embedded_resonances;   ///< +-omega_* inside the band with D(omega_* - i0) = 0
  std::vector<double> edge_zeros;            ///< band edges where D vanishes

  bool empty() const {
    return discrete_eigenvalues.empty() && embedded_resonances.empty() && edge_zeros.empty();
  }
};

/// Absolute tolerance for declaring D = 0 at a band edge.
inline constexpr double kEdgeZeroTol = 1e-10;

RealSpectrumReport find_real_spectrum(const ChainParams& p);

/// Leading Puiseux behaviour of N near a spectral edge omega_0:
///   N(omega) ~ c0 w^lead + c1 w^(lead + 1),
/// with w = sqrt(omega^2 - m^2) at +-m, w = sqrt(m^2 + 4 nu^2 - omega^2) at the upper edges,
/// and w = omega at the origin when m = 0.
struct EdgeExpansion {
  enum class Kind { Lower, Upper, Origin };

  ChainParams params;
  double edge = 0.0;
  Kind kind = Kind::Lower;
  int jump_exponent = 1;  ///< +1 regular edge, -1 singular (inverse square root) edge
  int leading_power = 0;  ///< 0 or -1
  std::array<Complex, 2> coefficients{};

  /// Local variable w with the branch matching the requested value of e^{i theta}.
  Complex variable(Complex omega, Side side = Side::UpperHalfPlane) const;
  Complex evaluate(Complex omega, Side side = Side::UpperHalfPlane) const;
};

EdgeExpansion edge_expansion(const ChainParams& p, double edge);

/// Whole-line resolvent kernel R_omega(x, y) = i e^{i theta |x - y|} / (2 nu^2 sin theta).
Complex resolvent_kernel(Complex omega, Index x, Index y, const ChainParams& p,
                         Side side = Side::UpperHalfPlane);

/// Result of applying the resolvent near a spectral edge, on sites -W..W (index x + W).
struct ResolventEdgeApplication {
  double edge = 0.0;
  Index half_width = 0;
  Complex singular_coefficient;   ///< i f^(0) / (2 nu w) or i f^(pi) / (2 nu w)
  Eigen::VectorXcd direct;        ///< R_omega f from the exact kernel
  Eigen::VectorXcd singular;      ///< the w^{-1} term
  Eigen::VectorXcd convolution;   ///< the |x - y| (or (-1)^{|x-y|} |x - y|) term
  Eigen::VectorXcd expansion() const { return singular + convolution; }
};

/// `f` lives on sites -Wf..Wf with Wf = (f.size() - 1) / 2; output on -W..W.
ResolventEdgeApplication resolvent_edge_apply(const Eigen::VectorXcd& f, Complex omega,
                                              const ChainParams& p, Index half_width,
                                              Side side = Side::UpperHalfPlane);

/// Axis-aligned rectangle in the complex plane.
struct Rect {
  double re_lo, re_hi, im_lo, im_hi;
};

/// Number of zeros of D (counted with multiplicity) inside `r`, by the argument principle.
int count_zeros(const ChainParams& p, const Rect& r);

/// Zeros of D in the open lower half-plane (poles of N), located by argument-principle
/// bisection and Newton refinement. Empty for gamma = 0.
std::vector<Complex> lower_half_plane_poles(const ChainParams& p);

}  // namespace chain

#endif
