#pragma once

#include <cstdint>
#include <vector>

#include "coopnoma/mlp.hpp"
#include "coopnoma/optimizer.hpp"
#include "coopnoma/system_model.hpp"

namespace coopnoma {

struct TrainConfig {
  int epochs = 100;
  int batch_size = 64;
  double learning_rate = 0.01;
  double decay_rate = 0.9;  ///< learning rate multiplier applied after every epoch
  double validation_fraction = 0.1;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Number of features per sample: one per link.
inline constexpr int kFeatureCount = 5;

/// Per-feature standardization.
struct FeatureStats {
  Vector<double> mean = Vector<double>::Zero(kFeatureCount);
  Vector<double> scale = Vector<double>::Ones(kFeatureCount);
};

/// Raw features of one realization: the log of each link's received SNR on
/// its information branch, g * (1 - rho) * P / N0, with the relay hops
/// scaled by their own split factor.
Vector<double> raw_features(const ChannelRealization& ch, const SystemParams& params,
                            const PowerSplit& split);

struct Dataset {
  Matrix<double> features;  ///< kFeatureCount x n, one sample per column (standardized)
  Vector<double> labels;    ///< oracle alpha_F*, inside (0.5, 1)
  FeatureStats stats;
  std::vector<ChannelRealization> channels;  ///< realization behind each column
  std::int64_t drawn = 0;                    ///< realizations sampled
  std::int64_t excluded_infeasible = 0;      ///< dropped because the QoS floor was unreachable

  Eigen::Index size() const { return labels.size(); }
};

/// Samples n realizations, labels each with oracle_search and standardizes
/// the features. Infeasible realizations are excluded and counted. When
/// `stats` is given the features are standardized with it instead of the
/// dataset's own moments.
Dataset generate_dataset(const SystemParams& params, const PowerSplit& split,
                         const ObjectiveConfig& cfg, std::int64_t n, std::uint64_t seed,
                         int workers = 0, const FeatureStats* stats = nullptr);

/// Builds a dataset from already labelled realizations.
Dataset assemble_dataset(std::vector<ChannelRealization> channels, const Vector<double>& labels,
                         const SystemParams& params, const PowerSplit& split,
                         const FeatureStats* stats = nullptr);

/// Feature matrix (standardized with `stats`) for arbitrary realizations.
Matrix<double> feature_matrix(const std::vector<ChannelRealization>& channels,
                              const SystemParams& params, const PowerSplit& split,
                              const FeatureStats& stats);

struct TrainResult {
  Mlp<double> net;
  std::vector<double> loss_history;        ///< mean training MSE per epoch
  std::vector<double> validation_history;  ///< held-out MSE after each epoch
  double train_mse = 0.0;
  double validation_mse = 0.0;
};

/// Mini-batch gradient descent. Each epoch visits the fitting portion in a
/// fresh seeded permutation; the trailing validation_fraction of the
/// dataset is held out for reporting only.
TrainResult train(Mlp<double> net, const Dataset& data, const TrainConfig& cfg);

}  // namespace coopnoma
