#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <sstream>
#include <vector>

#include "coopnoma/errors.hpp"

namespace coopnoma {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

template <typename Scalar>
struct DenseLayer {
  Matrix<Scalar> weight;  ///< out x in
  Vector<Scalar> bias;    ///< out

  Eigen::Index inputs() const { return weight.cols(); }
  Eigen::Index outputs() const { return weight.rows(); }
};

/// Output range the final linear unit is squashed into with a scaled
/// logistic: lo + (hi - lo) sigmoid(z).
struct Squash {
  double lo = 0.5;
  double hi = 1.0;
};

template <typename Scalar>
Scalar relu(Scalar y) {
  return y > Scalar(0) ? y : Scalar(0);
}

template <typename Scalar>
Scalar squash(Scalar z, const Squash& s = {}) {
  return Scalar(s.lo) + Scalar(s.hi - s.lo) / (Scalar(1) + std::exp(-z));
}

/// Dense feed-forward regressor: affine + ReLU on every hidden layer,
/// affine + squash on the single output unit.
template <typename Scalar>
class Mlp {
public:
  Mlp() = default;
  explicit Mlp(std::vector<DenseLayer<Scalar>> layers, Squash range = {})
      : layers_(std::move(layers)), squash_(range) {
    require(!layers_.empty(), "mlp: at least one layer is required");
    for (std::size_t i = 0; i < layers_.size(); ++i) {
      const auto& l = layers_[i];
      require(l.bias.size() == l.outputs(), "mlp: bias length must match layer outputs");
      require(i == 0 || l.inputs() == layers_[i - 1].outputs(),
              "mlp: adjacent layer dimensions do not chain");
      require(l.weight.allFinite() && l.bias.allFinite(), "mlp: parameters must be finite");
    }
    require(layers_.back().outputs() == 1, "mlp: the output layer must have one unit");
  }

  /// Zero biases, weights ~ N(0, 2 / fan_in).
  static Mlp he_initialized(int inputs, std::span<const int> hidden, std::uint64_t seed,
                            Squash range = {}) {
    std::mt19937_64 rng(seed);
    std::vector<DenseLayer<Scalar>> layers;
    int fan_in = inputs;
    auto make = [&](int fan_out) {
      std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / fan_in));
      DenseLayer<Scalar> l;
      l.weight.resize(fan_out, fan_in);
      for (Eigen::Index r = 0; r < l.weight.rows(); ++r)
        for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = Scalar(dist(rng));
      l.bias = Vector<Scalar>::Zero(fan_out);
      layers.push_back(std::move(l));
      fan_in = fan_out;
    };
    for (int h : hidden) make(h);
    make(1);
    return Mlp(std::move(layers), range);
  }

  const std::vector<DenseLayer<Scalar>>& layers() const { return layers_; }
  std::vector<DenseLayer<Scalar>>& layers() { return layers_; }
  const Squash& range() const { return squash_; }
  Eigen::Index input_dim() const { return layers_.front().inputs(); }

  /// Multiply-adds of one forward pass; inference cost per sample.
  std::int64_t multiply_adds() const {
    std::int64_t n = 0;
    for (const auto& l : layers_) n += static_cast<std::int64_t>(l.weight.size());
    return n;
  }

  std::int64_t neuron_count() const {
    std::int64_t n = 0;
    for (const auto& l : layers_) n += l.outputs();
    return n;
  }

private:
  std::vector<DenseLayer<Scalar>> layers_;
  Squash squash_;
};

/// Batch forward pass; samples are columns of `x`.
template <typename Scalar, typename Derived>
RowVector<Scalar> forward_batch(const Mlp<Scalar>& net, const Eigen::MatrixBase<Derived>& x) {
  require(x.rows() == net.input_dim(), "forward: input dimension does not match the network");
  Matrix<Scalar> a = x;
  const auto& layers = net.layers();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    Matrix<Scalar> z = (layers[i].weight * a).colwise() + layers[i].bias;
    if (i + 1 < layers.size()) {
      a = z.cwiseMax(Scalar(0));
    } else {
      a = z;
    }
  }
  const Squash& s = net.range();
  return a.row(0).unaryExpr([&](Scalar v) { return squash(v, s); });
}

template <typename Scalar, typename Derived>
Scalar forward(const Mlp<Scalar>& net, const Eigen::MatrixBase<Derived>& x) {
  require(x.cols() == 1, "forward: expected a single column vector");
  return forward_batch(net, x)(0);
}

template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar mse_loss(const Eigen::MatrixBase<DerivedA>& pred,
                                   const Eigen::MatrixBase<DerivedB>& target) {
  require(pred.size() == target.size(), "mse_loss: prediction and target lengths differ");
  require(pred.size() > 0, "mse_loss: empty input");
  return (pred.reshaped() - target.reshaped()).squaredNorm() /
         static_cast<typename DerivedA::Scalar>(pred.size());
}

template <typename Scalar>
struct Gradients {
  std::vector<DenseLayer<Scalar>> layers;  ///< d loss / d weight, d loss / d bias
  Scalar loss = Scalar(0);
};

/// Exact MSE gradients by reverse-mode chain rule over one batch (samples
/// in columns). The ReLU subgradient at 0 is 0.
template <typename Scalar, typename DerivedX, typename DerivedY>
Gradients<Scalar> backward(const Mlp<Scalar>& net, const Eigen::MatrixBase<DerivedX>& x,
                           const Eigen::MatrixBase<DerivedY>& target) {
  require(x.cols() > 0, "backward: empty batch");
  require(x.rows() == net.input_dim(), "backward: input dimension does not match the network");
  require(target.size() == x.cols(), "backward: one target per sample is required");
  const auto& layers = net.layers();
  const std::size_t depth = layers.size();
  const auto n = static_cast<Scalar>(x.cols());

  std::vector<Matrix<Scalar>> acts;  // acts[i] = input to layer i
  std::vector<Matrix<Scalar>> pre;   // pre-activations of layer i
  acts.reserve(depth + 1);
  pre.reserve(depth);
  acts.emplace_back(x);
  for (std::size_t i = 0; i < depth; ++i) {
    pre.emplace_back((layers[i].weight * acts.back()).colwise() + layers[i].bias);
    if (i + 1 < depth) acts.emplace_back(pre.back().cwiseMax(Scalar(0)));
  }

  const Squash& s = net.range();
  const Scalar width = Scalar(s.hi - s.lo);
  const RowVector<Scalar> sig =
      pre.back().row(0).unaryExpr([](Scalar z) { return Scalar(1) / (Scalar(1) + std::exp(-z)); });
  const RowVector<Scalar> out = (Scalar(s.lo) + width * sig.array()).matrix();
  const RowVector<Scalar> err = out - target.reshaped().transpose();
  if (!out.allFinite()) {
    std::ostringstream os;
    os << "backward: non-finite network output (max |pre-activation| "
       << pre.back().cwiseAbs().maxCoeff() << ")";
    throw NumericalError(os.str());
  }

  Gradients<Scalar> g;
  g.loss = err.squaredNorm() / n;
  g.layers.resize(depth);
  // d loss / d z_out = 2 err / n * width * sig (1 - sig)
  Matrix<Scalar> delta =
      ((Scalar(2) / n) * err.array() * width * sig.array() * (Scalar(1) - sig.array())).matrix();
  for (std::size_t i = depth; i-- > 0;) {
    g.layers[i].weight = delta * acts[i].transpose();
    g.layers[i].bias = delta.rowwise().sum();
    if (i > 0) {
      Matrix<Scalar> back = layers[i].weight.transpose() * delta;
      delta = (pre[i - 1].array() > Scalar(0)).select(back.array(), Scalar(0)).matrix();
    }
  }
  return g;
}

/// Largest relative disagreement between backprop and central differences
/// over every parameter: |a - b| / max(|a|, |b|, floor).
template <typename Scalar, typename DerivedX, typename DerivedY>
Scalar gradient_check(Mlp<Scalar> net, const Eigen::MatrixBase<DerivedX>& x,
                      const Eigen::MatrixBase<DerivedY>& target, Scalar h = Scalar(1e-6),
                      Scalar floor = Scalar(1e-4)) {
  const auto g = backward(net, x, target);
  auto& layers = net.layers();
  Scalar worst = Scalar(0);
  auto probe = [&](Scalar& param, Scalar analytic) {
    const Scalar saved = param;
    param = saved + h;
    const Scalar up = mse_loss(forward_batch(net, x), target);
    param = saved - h;
    const Scalar down = mse_loss(forward_batch(net, x), target);
    param = saved;
    const Scalar numeric = (up - down) / (Scalar(2) * h);
    const Scalar scale = std::max({std::abs(numeric), std::abs(analytic), floor});
    worst = std::max(worst, std::abs(numeric - analytic) / scale);
  };
  for (std::size_t li = 0; li < layers.size(); ++li) {
    for (Eigen::Index k = 0; k < layers[li].weight.size(); ++k)
      probe(layers[li].weight.data()[k], g.layers[li].weight.data()[k]);
    for (Eigen::Index k = 0; k < layers[li].bias.size(); ++k)
      probe(layers[li].bias(k), g.layers[li].bias(k));
  }
  return worst;
}

}  // namespace coopnoma
