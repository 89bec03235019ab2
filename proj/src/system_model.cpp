#include "coopnoma/system_model.hpp"

#include <string>

#include "coopnoma/errors.hpp"

namespace coopnoma {

namespace {

void require_positive(double v, const char* name) {
  require(std::isfinite(v) && v > 0.0, std::string(name) + ": must be a finite positive number");
}

void require_open_unit(double v, const char* name) {
  require(v > 0.0 && v < 1.0, std::string(name) + ": must lie strictly inside (0, 1)");
}

}  // namespace

void SystemParams::validate() const {
  require_positive(p_tx, "p_tx");
  require_positive(n0, "n0");
  require(eta > 0.0 && eta <= 1.0, "eta: must lie in (0, 1]");
  require(std::isfinite(m_shape) && m_shape >= 0.5, "m_shape: must be >= 0.5");
  require_positive(omega_su_n, "omega_su_n");
  require_positive(omega_su_f, "omega_su_f");
  require_positive(omega_se, "omega_se");
  require_positive(omega_un_e, "omega_un_e");
  require_positive(omega_un_uf, "omega_un_uf");
}

void PowerAllocation::validate() const {
  require(alpha_n > 0.0 && alpha_n < 0.5, "alpha_n: must lie in (0, 0.5)");
  require(alpha_f > 0.5 && alpha_f < 1.0, "alpha_f: must lie in (0.5, 1)");
  require(std::abs(alpha_n + alpha_f - 1.0) <= 1e-12, "alpha_n + alpha_f: must equal 1");
}

void PowerSplit::validate() const {
  require_open_unit(rho_n1, "rho_n1");
  require_open_unit(rho_f1, "rho_f1");
  require_open_unit(rho_e1, "rho_e1");
  require_open_unit(rho_f2, "rho_f2");
  require_open_unit(rho_e2, "rho_e2");
}

ChannelRealization sample_channels(const SystemParams& params, Rng& rng) {
  const double m = params.m_shape;
  auto draw = [&](double omega) {
    std::gamma_distribution<double> dist(m, omega / m);
    return dist(rng);
  };
  ChannelRealization ch;
  ch.g_su_n = draw(params.omega_su_n);
  ch.g_su_f = draw(params.omega_su_f);
  ch.g_se = draw(params.omega_se);
  ch.g_un_e = draw(params.omega_un_e);
  ch.g_un_uf = draw(params.omega_un_uf);
  return ch;
}

SinrSet compute_sinrs(const SystemParams& params, const PowerAllocation& alloc,
                      const PowerSplit& split, const ChannelRealization& ch) {
  const double snr = params.tx_snr();
  SinrSet s;
  s.snr_nf1 = superposed_sinr(ch.g_su_n, split.rho_n1, alloc.alpha_f, alloc.alpha_n, snr);
  s.snr_n2 = post_sic_snr(ch.g_su_n, split.rho_n1, alloc.alpha_n, snr);
  s.snr_f1 = superposed_sinr(ch.g_su_f, split.rho_f1, alloc.alpha_f, alloc.alpha_n, snr);
  s.snr_e1 = superposed_sinr(ch.g_se, split.rho_e1, alloc.alpha_f, alloc.alpha_n, snr);
  s.snr_rf2 = relayed_snr(ch.g_su_n, ch.g_un_uf, split.rho_n1, split.rho_f2, params.eta, snr);
  s.snr_re2 = relayed_snr(ch.g_su_n, ch.g_un_e, split.rho_n1, split.rho_e2, params.eta, snr);
  return s;
}

}  // namespace coopnoma
