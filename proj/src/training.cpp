#include "coopnoma/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "coopnoma/errors.hpp"
#include "coopnoma/random.hpp"

namespace coopnoma {

namespace {

constexpr double kFeatureFloor = 1e-12;

Matrix<double> standardize(Matrix<double> raw, const FeatureStats& stats) {
  raw.colwise() -= stats.mean;
  raw.array().colwise() /= stats.scale.array();
  return raw;
}

}  // namespace

void TrainConfig::validate() const {
  require(epochs > 0, "train.epochs: must be positive");
  require(batch_size > 0, "train.batch_size: must be positive");
  require(learning_rate >= 0.0 && std::isfinite(learning_rate),
          "train.learning_rate: must be a finite nonnegative number");
  require(decay_rate > 0.0 && decay_rate <= 1.0, "train.decay_rate: must lie in (0, 1]");
  require(validation_fraction >= 0.0 && validation_fraction < 1.0,
          "train.validation_fraction: must lie in [0, 1)");
}

Vector<double> raw_features(const ChannelRealization& ch, const SystemParams& params,
                            const PowerSplit& split) {
  const double snr = params.tx_snr();
  Vector<double> f(kFeatureCount);
  f << ch.g_su_n * (1.0 - split.rho_n1), ch.g_su_f * (1.0 - split.rho_f1),
      ch.g_se * (1.0 - split.rho_e1), ch.g_un_e * (1.0 - split.rho_e2),
      ch.g_un_uf * (1.0 - split.rho_f2);
  return (f * snr).array().max(kFeatureFloor).log().matrix();
}

Matrix<double> feature_matrix(const std::vector<ChannelRealization>& channels,
                              const SystemParams& params, const PowerSplit& split,
                              const FeatureStats& stats) {
  Matrix<double> raw(kFeatureCount, static_cast<Eigen::Index>(channels.size()));
  for (std::size_t i = 0; i < channels.size(); ++i)
    raw.col(static_cast<Eigen::Index>(i)) = raw_features(channels[i], params, split);
  return standardize(std::move(raw), stats);
}

Dataset generate_dataset(const SystemParams& params, const PowerSplit& split,
                         const ObjectiveConfig& cfg, std::int64_t n, std::uint64_t seed,
                         int workers, const FeatureStats* stats) {
  params.validate();
  split.validate();
  cfg.validate();
  require(n >= 1, "dataset: at least one sample is required");

  struct Labelled {
    ChannelRealization ch;
    OptResult opt;
  };
  std::vector<Labelled> all(static_cast<std::size_t>(n));
  parallel_blocks(block_count(n), workers, [&](std::int64_t b) {
    Rng rng = make_stream(seed, static_cast<std::uint64_t>(b));
    const std::int64_t end = std::min(n, (b + 1) * kBlockSize);
    for (std::int64_t i = b * kBlockSize; i < end; ++i) {
      auto& s = all[static_cast<std::size_t>(i)];
      s.ch = sample_channels(params, rng);
      s.opt = oracle_search(s.ch, params, split, cfg);
    }
  });

  std::vector<ChannelRealization> kept;
  std::vector<double> labels;
  for (const auto& s : all) {
    if (!s.opt.feasible) continue;
    kept.push_back(s.ch);
    labels.push_back(s.opt.alpha_f_star);
  }
  require(!kept.empty(), "dataset: every sampled realization was infeasible");
  Dataset d = assemble_dataset(
      std::move(kept),
      Eigen::Map<const Vector<double>>(labels.data(), static_cast<Eigen::Index>(labels.size())),
      params, split, stats);
  d.drawn = n;
  d.excluded_infeasible = n - d.size();
  return d;
}

Dataset assemble_dataset(std::vector<ChannelRealization> channels, const Vector<double>& labels,
                         const SystemParams& params, const PowerSplit& split,
                         const FeatureStats* stats) {
  require(static_cast<Eigen::Index>(channels.size()) == labels.size(),
          "dataset: realizations and labels disagree");
  require(!channels.empty(), "dataset: no samples");
  const auto kept = static_cast<Eigen::Index>(channels.size());
  Dataset d;
  d.labels = labels;
  Matrix<double> raw(kFeatureCount, kept);
  for (Eigen::Index col = 0; col < kept; ++col)
    raw.col(col) = raw_features(channels[static_cast<std::size_t>(col)], params, split);
  d.channels = std::move(channels);
  d.drawn = kept;

  if (stats) {
    d.stats = *stats;
  } else {
    d.stats.mean = raw.rowwise().mean();
    const Matrix<double> centered = raw.colwise() - d.stats.mean;
    d.stats.scale = (centered.rowwise().squaredNorm() / static_cast<double>(kept)).cwiseSqrt();
    for (Eigen::Index i = 0; i < d.stats.scale.size(); ++i)
      if (!(d.stats.scale(i) > 0.0)) d.stats.scale(i) = 1.0;
  }
  d.features = standardize(std::move(raw), d.stats);
  return d;
}

TrainResult train(Mlp<double> net, const Dataset& data, const TrainConfig& cfg) {
  cfg.validate();
  require(data.features.cols() == data.labels.size(), "train: features and labels disagree");
  require(data.features.rows() == net.input_dim(),
          "train: feature dimension does not match the network input");
  require(data.features.allFinite() && data.labels.allFinite(),
          "train: dataset contains non-finite entries");
  const Eigen::Index total = data.size();
  const auto held_out = static_cast<Eigen::Index>(std::floor(cfg.validation_fraction * total));
  const Eigen::Index fit = total - held_out;
  require(fit >= cfg.batch_size, "train: batch_size exceeds the training-set size");

  const auto fit_x = data.features.leftCols(fit);
  const auto fit_y = data.labels.head(fit);
  const auto val_x = data.features.rightCols(held_out);
  const auto val_y = data.labels.tail(held_out);

  std::mt19937_64 rng(cfg.seed);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(fit));
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  TrainResult result;
  double lr = cfg.learning_rate;
  Matrix<double> batch_x(fit_x.rows(), cfg.batch_size);
  Vector<double> batch_y(cfg.batch_size);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    for (Eigen::Index start = 0; start < fit; start += cfg.batch_size) {
      const Eigen::Index len = std::min<Eigen::Index>(cfg.batch_size, fit - start);
      batch_x.resize(fit_x.rows(), len);
      batch_y.resize(len);
      for (Eigen::Index j = 0; j < len; ++j) {
        const auto src = order[static_cast<std::size_t>(start + j)];
        batch_x.col(j) = fit_x.col(src);
        batch_y(j) = fit_y(src);
      }
      Gradients<double> g;
      try {
        g = backward(net, batch_x, batch_y);
      } catch (const NumericalError& e) {
        std::ostringstream os;
        os << "training diverged in epoch " << epoch << ": " << e.what();
        throw NumericalError(os.str());
      }
      if (!std::isfinite(g.loss)) {
        std::ostringstream os;
        os << "training diverged in epoch " << epoch << ": non-finite loss";
        throw NumericalError(os.str());
      }
      loss_sum += g.loss * static_cast<double>(len);
      auto& layers = net.layers();
      for (std::size_t i = 0; i < layers.size(); ++i) {
        layers[i].weight -= lr * g.layers[i].weight;
        layers[i].bias -= lr * g.layers[i].bias;
      }
    }
    const double epoch_loss = loss_sum / static_cast<double>(fit);
    const bool params_finite = std::all_of(net.layers().begin(), net.layers().end(), [](const auto& l) {
      return l.weight.allFinite() && l.bias.allFinite();
    });
    if (!params_finite) {
      std::ostringstream os;
      os << "training diverged in epoch " << epoch << ": non-finite parameters";
      throw NumericalError(os.str());
    }
    if (!std::isfinite(epoch_loss)) {
      std::ostringstream os;
      os << "training diverged in epoch " << epoch << ": non-finite loss";
      throw NumericalError(os.str());
    }
    result.loss_history.push_back(epoch_loss);
    if (held_out > 0) result.validation_history.push_back(mse_loss(forward_batch(net, val_x), val_y));
    lr *= cfg.decay_rate;
  }
  result.train_mse = mse_loss(forward_batch(net, fit_x), fit_y);
  result.validation_mse = result.validation_history.empty() ? 0.0 : result.validation_history.back();
  result.net = std::move(net);
  return result;
}

}  // namespace coopnoma
