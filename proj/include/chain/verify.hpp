#ifndef CHAIN_VERIFY_HPP
#define CHAIN_VERIFY_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "chain/core_model.hpp"
#include "chain/kernels.hpp"
#include "chain/solver.hpp"

namespace chain {

struct FitOptions {
  double t_min = 0.0;
  double t_max = 0.0;        ///< 0: up to the last sample
  double block_width = 0.0;  ///< block-maximum window (0: raw samples)
  int bootstrap = 200;
  std::uint64_t seed = 12345;
  double flat_tol = 0.15;
  double min_decades = 1.0;  ///< required log10(t_max / t_min)
  Index min_samples = 30;
};

/// Dispersive period used for block maxima: 2 pi / m, or 2 pi / band_hi when m = 0.
double dispersive_period(const ChainParams& p);

struct DecayFit {
  std::vector<double> t, value;  ///< fitted (block-maximum) series
  double t_min = 0.0, t_max = 0.0;
  Index samples = 0;            ///< raw samples inside the window
  double slope = 0.0;
  double slope_ci = 0.0;        ///< bootstrap 95% half-width
  double intercept = 0.0;
  double expected = 0.0;
  double compensated_slope = 0.0;  ///< slope of log(value t^{-expected})
  bool envelope_flat = false;
};

/// Log-log least squares with residual bootstrap. Throws InsufficientData / NonPositiveValue.
DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& value, double expected,
                   const FitOptions& opt = {});

/// One verification outcome, exported as {check_id, params, window, slope, ci, expected, pass}.
struct CheckReport {
  std::string check_id;
  std::optional<ChainParams> params;
  double t_min = 0.0, t_max = 0.0;
  double slope = 0.0, ci = 0.0, expected = 0.0;
  bool pass = false;
  std::string detail;
};

std::string to_json(const std::vector<CheckReport>& reports);
CheckReport report_from_fit(const std::string& id, const ChainParams& p, const DecayFit& fit, bool pass);

/// Expected exponent -beta/2 (throws DegenerateSpectrum for degenerate points).
double expected_exponent(const ChainParams& p);

/// Fits ||Y(t)||_{-alpha,+} from a trajectory that recorded that norm.
DecayFit verify_main_bound(const Trajectory& tr, double alpha, const FitOptions& opt);
/// Runs integrate_full (norm recorded every `stride` steps) and fits.
DecayFit verify_main_bound(const ChainParams& p, const HalfLineState& y0, double alpha, const IntegrationOptions& run,
                           const FitOptions& opt);

/// ||U_0(t) y0||_{-alpha,+} at t = t_min, t_min + dt_sample, ..., fitted against -3/2.
DecayFit verify_free_bound(const ChainParams& p, const HalfLineState& y0, double alpha, double dt_sample,
                           const FitOptions& opt);
/// Whole-line flow of (not odd-extended) data, fitted against -1/2.
DecayFit verify_whole_line_contrast(const ChainParams& p, const WholeLineState& y0, double alpha, double dt_sample,
                                    const FitOptions& opt);

/// ||U(t)y0 - Omega U_0(t)y0||_{-alpha,+} restricted to x <= sv.x_window, from trajectory snapshots.
struct ScatteringResidual {
  std::vector<double> t, residual;
  DecayFit fit;  ///< compensated by <t>^{beta/2}: expected = -beta/2
};

ScatteringResidual verify_scattering(const Trajectory& tr, const HalfLineState& y0, double alpha,
                                     const ScatteringVectors& sv, const FitOptions& opt);

struct WitnessReport {
  DegenerateReason reason;
  double frequency = 0.0;
  Complex exp_itheta;           ///< spatial factor of the mode (1 for the zero mode)
  double residual = 0.0;        ///< max |equation residual| over sites and sample times
  double norm_variation = 0.0;  ///< relative variation of the complex mode's -alpha norm over a period
  double norm_ratio = 0.0;      ///< real witness: max norm over the last period / first period
};

/// Witness modes; throws NotDegenerate for C / C0 parameters.
WitnessReport degenerate_witness(const ChainParams& p, Index sites = 200, double alpha = 2.0);

/// kappa = m = 0: N(t) -> 1/(gamma + nu). Volterra route, fit of |N - 1/(gamma + nu)| against -3/2.
struct ZeroModeLimit {
  double limit = 0.0;
  double final_gap = 0.0;  ///< |N(T) - limit|
  DecayFit tail;
};

ZeroModeLimit verify_zero_mode_limit(const ChainParams& p, double T, double dt, const FitOptions& opt);

/// Compensated envelopes for N, N', N'' (<t>^{beta/2}), K(1, t) ((1+t)^{3/2}) and
/// sum_x <x>^{-4} |K(x, t)|^2 ((1+t)^3).
struct KernelBoundsReport {
  std::vector<std::string> names;
  std::vector<DecayFit> fits;
};

KernelBoundsReport verify_kernel_bounds(const ChainParams& p, double dt, Index k_sites, const FitOptions& opt);

}  // namespace chain

#endif
