#include "coopnoma/optimizer.hpp"

#include <cmath>

#include "coopnoma/errors.hpp"

namespace coopnoma {

namespace {

void require_far_share(double alpha_f) {
  require(alpha_f > 0.5 && alpha_f < 1.0, "alpha_f: must lie in (0.5, 1)");
}

}  // namespace

void ObjectiveConfig::validate() const {
  require(alpha_min >= 0.5 && alpha_min < alpha_max && alpha_max <= 1.0,
          "objective: need 0.5 <= alpha_min < alpha_max <= 1");
  require(grid_step > 0.0 && grid_step < alpha_max - alpha_min,
          "objective.grid_step: must be positive and smaller than the search range");
  require(qos_min_rate_near >= 0.0, "objective.qos_min_rate_near: must be nonnegative");
}

int ObjectiveConfig::grid_size() const {
  // Largest k with alpha_min + k step < alpha_max, robust to rounding.
  const double span = (alpha_max - alpha_min) / grid_step;
  auto k = static_cast<int>(std::ceil(span - 1e-9)) - 1;
  while (k > 0 && grid_point(k) >= alpha_max) --k;
  return k;
}

double far_rate_objective(double alpha_f, const ChannelRealization& ch, const SystemParams& params,
                          const PowerSplit& split) {
  require_far_share(alpha_f);
  const double sinr = superposed_sinr(ch.g_su_f, split.rho_f1, alpha_f, 1.0 - alpha_f,
                                      params.tx_snr());
  return std::log2(1.0 + sinr);
}

double near_rate(double alpha_f, const ChannelRealization& ch, const SystemParams& params,
                 const PowerSplit& split) {
  require_far_share(alpha_f);
  return 0.5 * std::log2(1.0 + post_sic_snr(ch.g_su_n, split.rho_n1, 1.0 - alpha_f,
                                            params.tx_snr()));
}

OptResult oracle_search(const ChannelRealization& ch, const SystemParams& params,
                        const PowerSplit& split, const ObjectiveConfig& cfg) {
  cfg.validate();
  OptResult best;
  const int n = cfg.grid_size();
  for (int k = 1; k <= n; ++k) {
    const double a = cfg.grid_point(k);
    if (near_rate(a, ch, params, split) < cfg.qos_min_rate_near) continue;
    const double v = far_rate_objective(a, ch, params, split);
    if (!best.feasible || v > best.objective_value) best = {a, v, true};
  }
  if (!best.feasible) {
    best.alpha_f_star = cfg.grid_point(1);
    best.objective_value = far_rate_objective(best.alpha_f_star, ch, params, split);
  }
  return best;
}

double random_allocation(Rng& rng) {
  std::uniform_real_distribution<double> dist(0.5, 1.0);
  double a = dist(rng);
  while (a <= 0.5) a = dist(rng);
  return a;
}

}  // namespace coopnoma
