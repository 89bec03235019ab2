#pragma once

#include <cmath>

#include "coopnoma/random.hpp"

namespace coopnoma {

/// Linear-scale value of a quantity given in dB.
template <typename Scalar>
Scalar db_to_linear(Scalar db) {
  using std::pow;
  return pow(Scalar(10), db / Scalar(10));
}

template <typename Scalar>
Scalar linear_to_db(Scalar linear) {
  using std::log10;
  return Scalar(10) * log10(linear);
}

/// Static physics of the two-phase link. Everything is linear scale.
/// The mean gains are E|h|^2 of the respective links; m = 1 is Rayleigh.
struct SystemParams {
  double p_tx = 10.0;
  double n0 = 1.0;
  double eta = 0.7;
  double m_shape = 1.0;
  double omega_su_n = db_to_linear(5.0);
  double omega_su_f = db_to_linear(5.0);
  double omega_se = db_to_linear(5.0);
  double omega_un_e = db_to_linear(5.0);
  double omega_un_uf = db_to_linear(5.0);

  double tx_snr() const { return p_tx / n0; }
  void validate() const;
};

/// NOMA power split between the near and far user's symbols.
struct PowerAllocation {
  double alpha_n = 0.2;
  double alpha_f = 0.8;

  /// alpha_n = 1 - alpha_f.
  static PowerAllocation from_far(double alpha_f) { return {1.0 - alpha_f, alpha_f}; }
  double sinr_ceiling() const { return alpha_f / alpha_n; }
  void validate() const;
};

/// Energy-harvesting fraction rho of each receiver in each phase. The
/// near user's second-phase factor has no effect on any link and is
/// therefore not represented.
struct PowerSplit {
  double rho_n1 = 0.3;
  double rho_f1 = 0.3;
  double rho_e1 = 0.3;
  double rho_f2 = 0.3;
  double rho_e2 = 0.3;

  static PowerSplit uniform(double rho) { return {rho, rho, rho, rho, rho}; }
  void validate() const;
};

/// Instantaneous power gains |h|^2 of the five links.
struct ChannelRealization {
  double g_su_n = 0.0;
  double g_su_f = 0.0;
  double g_se = 0.0;
  double g_un_e = 0.0;
  double g_un_uf = 0.0;
};

struct SinrSet {
  double snr_nf1 = 0.0;  ///< far symbol at the near user, first phase
  double snr_n2 = 0.0;   ///< near symbol at the near user after SIC
  double snr_f1 = 0.0;   ///< far user, first phase
  double snr_e1 = 0.0;   ///< eavesdropper, first phase
  double snr_rf2 = 0.0;  ///< relay hop to the far user, second phase
  double snr_re2 = 0.0;  ///< relay hop to the eavesdropper, second phase
};

// Expression-friendly link formulas: `Gain` may be a scalar or an Eigen
// array expression.

/// SINR of the far user's symbol on a first-phase link: the near user's
/// symbol is treated as interference.
template <typename Gain>
auto superposed_sinr(const Gain& gain, double rho, double alpha_f, double alpha_n,
                     double tx_snr) {
  return alpha_f * ((1.0 - rho) * tx_snr) * gain / (alpha_n * ((1.0 - rho) * tx_snr) * gain + 1.0);
}

/// SNR of the near user's own symbol after cancelling the far symbol.
template <typename Gain>
auto post_sic_snr(const Gain& gain, double rho, double alpha_n, double tx_snr) {
  return (alpha_n * (1.0 - rho) * tx_snr) * gain;
}

/// Second-phase SNR when the near user forwards with all the energy it
/// harvested in the first phase.
template <typename Gain, typename HopGain>
auto relayed_snr(const Gain& gain_su_n, const HopGain& gain_hop, double rho_n1, double rho_hop,
                 double eta, double tx_snr) {
  return ((1.0 - rho_hop) * rho_n1 * eta * tx_snr) * gain_su_n * gain_hop;
}

/// One independent draw of all five gains, each gamma(shape m, mean omega).
ChannelRealization sample_channels(const SystemParams& params, Rng& rng);

SinrSet compute_sinrs(const SystemParams& params, const PowerAllocation& alloc,
                      const PowerSplit& split, const ChannelRealization& ch);

}  // namespace coopnoma
