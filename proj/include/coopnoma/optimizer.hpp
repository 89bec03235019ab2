#pragma once

#include "coopnoma/random.hpp"
#include "coopnoma/system_model.hpp"

namespace coopnoma {

/// Search range, resolution and near-user QoS floor for the per-realization
/// power-allocation problem. Grid points are alpha_min + k * grid_step,
/// k >= 1, strictly below alpha_max.
struct ObjectiveConfig {
  double alpha_min = 0.5;
  double alpha_max = 1.0;
  double grid_step = 1e-3;
  double qos_min_rate_near = 0.5;  ///< bits/s/Hz; 0 disables the floor

  void validate() const;
  int grid_size() const;
  double grid_point(int k) const { return alpha_min + k * grid_step; }
};

struct OptResult {
  double alpha_f_star = 0.0;
  double objective_value = 0.0;
  bool feasible = false;
};

/// log2(1 + snr_f1) at the given far-user share (alpha_N = 1 - alpha_F).
double far_rate_objective(double alpha_f, const ChannelRealization& ch, const SystemParams& params,
                          const PowerSplit& split);

/// 1/2 log2(1 + snr_n2): the near user's own-symbol rate.
double near_rate(double alpha_f, const ChannelRealization& ch, const SystemParams& params,
                 const PowerSplit& split);

/// Exhaustive grid scan. Returns the feasible point with the largest
/// objective, ties to the smaller alpha_F. With no feasible point the
/// result is flagged infeasible at the first grid point.
OptResult oracle_search(const ChannelRealization& ch, const SystemParams& params,
                        const PowerSplit& split, const ObjectiveConfig& cfg = {});

/// Uniform draw strictly inside (0.5, 1).
double random_allocation(Rng& rng);

}  // namespace coopnoma
