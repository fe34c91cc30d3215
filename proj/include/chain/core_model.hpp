#ifndef CHAIN_CORE_MODEL_HPP
#define CHAIN_CORE_MODEL_HPP

#include <Eigen/Core>

#include <cmath>
#include <complex>
#include <optional>
#include <string>

#include "chain/error.hpp"

namespace chain {

using Index = Eigen::Index;
using Complex = std::complex<double>;

/// Coefficients of the half-line chain: coupling nu, mass m, boundary spring kappa,
/// boundary friction gamma. Validated on construction and immutable afterwards.
class ChainParams {
 public:
  ChainParams(double nu, double m, double kappa, double gamma);

  double nu() const { return nu_; }
  double m() const { return m_; }
  double kappa() const { return kappa_; }
  double gamma() const { return gamma_; }

  /// Lower band edge m.
  double band_lo() const { return m_; }
  /// Upper band edge sqrt(m^2 + 4 nu^2).
  double band_hi() const { return std::sqrt(m_ * m_ + 4.0 * nu_ * nu_); }

  std::string describe() const;

 private:
  double nu_, m_, kappa_, gamma_;
};

/// Japanese-bracket weight <x> = sqrt(1 + x^2).
inline double bracket(double x) { return std::sqrt(1.0 + x * x); }

enum class Component { Position, Velocity };

/// Phase point (u, v) on sites x = 0..L of the truncated half-line.
template <typename Scalar = double>
struct BasicHalfLineState {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Vector u;
  Vector v;

  BasicHalfLineState() = default;
  explicit BasicHalfLineState(Index length) : u(Vector::Zero(length + 1)), v(Vector::Zero(length + 1)) {}
  BasicHalfLineState(Vector u_, Vector v_) : u(std::move(u_)), v(std::move(v_)) {
    if (u.size() != v.size() || u.size() == 0)
      throw Error(ErrorKind::InvalidArgument, "u and v must be non-empty and of equal length");
  }

  /// Truncation length L (last site index).
  Index length() const { return u.size() - 1; }
  Index sites() const { return u.size(); }

  /// Copy zero-padded (or truncated) to length L.
  BasicHalfLineState resized(Index length) const {
    BasicHalfLineState out(length);
    const Index n = std::min(sites(), out.sites());
    out.u.head(n) = u.head(n);
    out.v.head(n) = v.head(n);
    return out;
  }

  /// Largest site carrying a nonzero entry, or -1 for the zero state.
  Index support_end() const {
    for (Index x = length(); x >= 0; --x)
      if (u[x] != Scalar(0) || v[x] != Scalar(0)) return x;
    return -1;
  }
};

using HalfLineState = BasicHalfLineState<double>;

/// State with a single unit entry at `site` in the chosen component.
HalfLineState delta_state(Index length, Index site, Component component = Component::Position);

/// Whole-line state stored on x = -W..W; entry x lives at index x + W.
struct WholeLineState {
  Eigen::VectorXd u;
  Eigen::VectorXd v;
  Index half_width = 0;

  WholeLineState() = default;
  explicit WholeLineState(Index w)
      : u(Eigen::VectorXd::Zero(2 * w + 1)), v(Eigen::VectorXd::Zero(2 * w + 1)), half_width(w) {}

  double& u_at(Index x) { return u[x + half_width]; }
  double& v_at(Index x) { return v[x + half_width]; }
  double u_at(Index x) const { return u[x + half_width]; }
  double v_at(Index x) const { return v[x + half_width]; }
};

/// ||Y||_{alpha,+} = (sum_x <x>^{2 alpha} (|u|^2 + |v|^2))^{1/2}.
template <typename Scalar>
double weighted_norm(const BasicHalfLineState<Scalar>& y, double alpha) {
  double acc = 0.0;
  for (Index x = 0; x < y.sites(); ++x) {
    const double w = std::pow(1.0 + double(x) * double(x), alpha);
    acc += w * (std::norm(y.u[x]) + std::norm(y.v[x]));
  }
  return std::sqrt(acc);
}

/// Whole-line analogue sum over x in -W..W.
double weighted_norm(const WholeLineState& y, double alpha);

/// Pairing <A, B>_+ = sum_{x >= 0} (A.u B.u + A.v B.v) over the common sites.
double pairing(const HalfLineState& a, const HalfLineState& b);

/// Energy functional with the free far-end convention u(L+1) := u(L).
double hamiltonian(const ChainParams& p, const HalfLineState& y);

/// Reflection Y_odd(x) = Y(x) (x > 0), Y_odd(0) = 0, Y_odd(-x) = -Y(x).
WholeLineState odd_extension(const HalfLineState& y);

enum class SpectralTag { ConditionC, ConditionC0, Degenerate };

enum class DegenerateReason {
  ZeroModeAtOrigin,
  DiscreteEigenvalueAboveBand,
  EmbeddedResonance,
  EdgeResonanceAtMass,
};

struct SpectralClass {
  SpectralTag tag;
  std::optional<int> beta;
  std::optional<DegenerateReason> reason;
  /// Offending frequency for EmbeddedResonance / DiscreteEigenvalueAboveBand.
  std::optional<double> frequency;

  bool decaying() const { return tag != SpectralTag::Degenerate; }
};

const char* to_string(SpectralTag tag);
const char* to_string(DegenerateReason reason);

/// Relative tolerance used when comparing kappa against the excluded resonant values.
inline constexpr double kResonanceRelTol = 1e-12;

SpectralClass classify_conditions(const ChainParams& p);

}  // namespace chain

#endif
