#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "coopnoma/errors.hpp"
#include "coopnoma/quadrature.hpp"
#include "coopnoma/random.hpp"
#include "coopnoma/system_model.hpp"

namespace coopnoma {

// ---------------------------------------------------------------------------
// Per-realization secrecy quantities
// ---------------------------------------------------------------------------

/// Legitimate bottleneck of the DF path: min(snr_f1, snr_rf2).
inline double legitimate_snr(const SinrSet& s) { return std::min(s.snr_f1, s.snr_rf2); }

/// Eavesdropper keeps the better of its two observations.
inline double eavesdropper_snr(const SinrSet& s) { return std::max(s.snr_e1, s.snr_re2); }

/// [C_s - C_e]^+ with C = 1/2 log2(1 + snr), in bits/s/Hz.
double secrecy_rate_df(const SinrSet& s);

/// True iff the legitimate bottleneck SNR is strictly below the
/// eavesdropper's best SNR.
bool intercept_event(const SinrSet& s);

// ---------------------------------------------------------------------------
// Intercept probability
// ---------------------------------------------------------------------------

enum class EstimateMethod { monte_carlo, analytical };

struct InterceptEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::int64_t n_trials = 0;
  EstimateMethod method = EstimateMethod::monte_carlo;
};

struct McOptions {
  std::int64_t n_trials = 1'000'000;
  std::uint64_t seed = 1;
  int workers = 0;  ///< 0 = all hardware threads
};

using ChannelSampler = std::function<ChannelRealization(const SystemParams&, Rng&)>;

/// Fraction of intercept events over independent channel draws. Trials run
/// in fixed blocks with per-block streams, so the estimate depends only on
/// the seed. `sampler` replaces the gamma fading draw (used with discrete
/// surrogate channels in tests).
InterceptEstimate intercept_probability_mc(const SystemParams& params,
                                           const PowerAllocation& alloc,
                                           const PowerSplit& split, const McOptions& opts,
                                           const ChannelSampler& sampler = {});

// ---------------------------------------------------------------------------
// Analytical route: P_int = int_0^inf F_X(y) f_Y(y) dy
// ---------------------------------------------------------------------------

/// How F of the relay hop to the far user enters F_X.
enum class RelayCdfForm {
  /// Pr(near user decodes, relay SNR < x) = Psi1 - Psi2, Psi2 by quadrature.
  decode_conditioned,
  /// Psi2 through the printed closed form with Ei. Its reciprocal
  /// factorials 1/(s-m)! vanish for every s < m, so it collapses to
  /// Psi2 = 0. Kept for comparison only.
  printed_closed_form,
  /// Plain marginal CDF of the relay SNR (no decoding condition).
  unconditioned,
};

/// How F of the relay hop to the eavesdropper enters F_Y.
enum class EveRelayCdfForm {
  /// Exact CDF of the product-of-gammas SNR, by quadrature.
  exact,
  /// 1 - Phi1 y clamped to [0, 1], as printed.
  printed_linear,
};

struct AnalyticalOptions {
  QuadratureConfig quadrature{};
  RelayCdfForm relay = RelayCdfForm::decode_conditioned;
  EveRelayCdfForm eve_relay = EveRelayCdfForm::exact;
};

/// Everything the analytical integrand depends on, for one model point.
struct AnalyticalModel {
  SystemParams params;
  PowerAllocation alloc;
  PowerSplit split;
  AnalyticalOptions opts;
};

/// Intermediate factors at one abscissa (diagnostics).
struct IntegrandTerms {
  double theta = 0.0;  ///< decoding threshold on |h_SUN|^2
  double psi1 = 0.0;
  double psi2 = 0.0;
  double phi1 = 0.0;
  double phi2 = 0.0;
};

IntegrandTerms integrand_terms(double y, const AnalyticalModel& model);

double cdf_far_direct(double x, const AnalyticalModel& model);  ///< F of snr_f1
double cdf_far_relay(double x, const AnalyticalModel& model);   ///< F2 per opts.relay
double cdf_eve_direct(double y, const AnalyticalModel& model);  ///< F of snr_e1
double pdf_eve_direct(double y, const AnalyticalModel& model);
double cdf_eve_relay(double y, const AnalyticalModel& model);   ///< per opts.eve_relay
double pdf_eve_relay(double y, const AnalyticalModel& model);

double cdf_x(double x, const AnalyticalModel& model);
double cdf_y(double y, const AnalyticalModel& model);
/// d/dy [F_SE(y) F_UNE(y)] by the product rule.
double pdf_y(double y, const AnalyticalModel& model);

// Convenience overloads with default options.
double cdf_x(double x, const SystemParams& params, const PowerAllocation& alloc,
             const PowerSplit& split);
double pdf_y(double y, const SystemParams& params, const PowerAllocation& alloc,
             const PowerSplit& split);

/// Raised when the outer integral fails; carries the factor values at the
/// abscissa with the largest remaining error.
class AnalysisFailure : public NumericalError {
public:
  AnalysisFailure(const std::string& what, double abscissa, IntegrandTerms terms, double fx,
                  double fy)
      : NumericalError(what), abscissa_(abscissa), terms_(terms), fx_(fx), fy_(fy) {}
  double abscissa() const { return abscissa_; }
  const IntegrandTerms& terms() const { return terms_; }
  double cdf_x_value() const { return fx_; }
  double pdf_y_value() const { return fy_; }

private:
  double abscissa_;
  IntegrandTerms terms_;
  double fx_;
  double fy_;
};

/// Quadrature of F_X f_Y over (0, alpha_F/alpha_N) plus the tail
/// 1 - F_Y(alpha_F/alpha_N). Requires an integer fading shape.
InterceptEstimate intercept_probability_analytical(const SystemParams& params,
                                                   const PowerAllocation& alloc,
                                                   const PowerSplit& split,
                                                   const AnalyticalOptions& opts = {});

// ---------------------------------------------------------------------------
// Discrepancy report: each analytical factor against its own MC marginal
// ---------------------------------------------------------------------------

struct FactorCheck {
  std::string factor;       ///< "F1", "F2", "f_Y", "independence"
  double distance = 0.0;    ///< Kolmogorov distance (or probability gap)
  double tolerance = 0.0;
  bool agrees = true;
};

struct DiscrepancyReport {
  double analytical = 0.0;
  double monte_carlo = 0.0;
  double mc_std_error = 0.0;
  std::vector<FactorCheck> checks;
  std::optional<std::string> first_divergent;
};

/// Draws `mc.n_trials` realizations and compares the analytical F1, F2 and
/// the CDF recovered by integrating f_Y with the empirical CDFs of snr_f1,
/// snr_rf2 and Y. The final check compares the joint MC estimate with the
/// value implied by the empirical marginals treated as independent.
DiscrepancyReport diagnose_discrepancy(const SystemParams& params, const PowerAllocation& alloc,
                                       const PowerSplit& split, const AnalyticalOptions& opts,
                                       const McOptions& mc, double ks_tolerance = 0.01);

std::string format_report(const DiscrepancyReport& report);

}  // namespace coopnoma
