#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "tsadbench/errors.hpp"
#include "tsadbench/rng.hpp"

namespace tsadbench {

struct AutoencoderConfig {
  std::int64_t input_width = 100;
  std::int64_t hidden_units = 60;
  std::int64_t latent_units = 20;
  std::int64_t epochs = 30;
  std::int64_t batch_size = 64;
  double learning_rate = 1e-3;
};

// Fully connected autoencoder with mirrored layer sizes
// [w, hidden, latent, hidden, w], tanh on hidden layers and a linear output.
// Trained by plain mini-batch SGD on the mean squared reconstruction error.
class DenseAutoencoder {
 public:
  DenseAutoencoder() = default;

  static DenseAutoencoder initialize(const std::vector<std::int64_t>& layer_sizes, Rng& rng) {
    if (layer_sizes.size() < 3 || layer_sizes.size() % 2 == 0)
      throw BenchError(ErrorCode::ConfigError, "layer sizes must form an odd-length mirror");
    for (std::size_t i = 0; i < layer_sizes.size(); ++i) {
      if (layer_sizes[i] < 1) throw BenchError(ErrorCode::ConfigError, "layer sizes must be positive");
      if (layer_sizes[i] != layer_sizes[layer_sizes.size() - 1 - i])
        throw BenchError(ErrorCode::ConfigError, "encoder and decoder sizes must mirror");
    }
    DenseAutoencoder net;
    net.sizes_ = layer_sizes;
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
      const auto fan_in = layer_sizes[l];
      const auto fan_out = layer_sizes[l + 1];
      const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
      Eigen::MatrixXd w(fan_out, fan_in);
      for (Eigen::Index r = 0; r < w.rows(); ++r)
        for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = rng.uniform(-bound, bound);
      net.weights_.push_back(std::move(w));
      net.biases_.push_back(Eigen::VectorXd::Zero(fan_out));
    }
    return net;
  }

  std::int64_t input_width() const { return sizes_.front(); }
  const std::vector<std::int64_t>& layer_sizes() const { return sizes_; }
  const std::vector<double>& loss_history() const { return loss_history_; }

  // Rows of X are samples; returns the reconstruction row for row.
  Eigen::MatrixXd reconstruct(const Eigen::MatrixXd& X) const {
    if (X.cols() != sizes_.front())
      throw BenchError(ErrorCode::ShapeMismatch, "expected " + std::to_string(sizes_.front()) +
                                                     " input columns, got " + std::to_string(X.cols()));
    Eigen::MatrixXd a = X;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      Eigen::MatrixXd z = a * weights_[l].transpose();
      z.rowwise() += biases_[l].transpose();
      a = (l + 1 < weights_.size()) ? z.array().tanh().matrix() : z;
    }
    return a;
  }

  // loss = (1 / (2 N w)) sum of squared reconstruction error; `gradient` is
  // laid out to match parameters(). Kept public so the learning step and any
  // numerical check share one definition.
  double loss_and_gradient(const Eigen::MatrixXd& X, Eigen::VectorXd& gradient) const {
    if (X.cols() != sizes_.front())
      throw BenchError(ErrorCode::ShapeMismatch, "expected " + std::to_string(sizes_.front()) +
                                                     " input columns, got " + std::to_string(X.cols()));
    const auto samples = X.rows();
    std::vector<Eigen::MatrixXd> activations;
    activations.reserve(weights_.size() + 1);
    activations.push_back(X);
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      Eigen::MatrixXd z = activations.back() * weights_[l].transpose();
      z.rowwise() += biases_[l].transpose();
      activations.push_back((l + 1 < weights_.size()) ? z.array().tanh().matrix() : z);
    }

    const double denom = static_cast<double>(samples) * static_cast<double>(sizes_.front());
    const Eigen::MatrixXd diff = activations.back() - X;
    const double loss = 0.5 * diff.squaredNorm() / denom;

    gradient.resize(parameter_count());
    Eigen::MatrixXd delta = diff / denom;
    Eigen::Index offset = gradient.size();
    for (std::size_t l = weights_.size(); l-- > 0;) {
      const Eigen::MatrixXd grad_w = delta.transpose() * activations[l];
      const Eigen::VectorXd grad_b = delta.colwise().sum();
      offset -= grad_w.size() + grad_b.size();
      Eigen::Index cursor = offset;
      for (Eigen::Index r = 0; r < grad_w.rows(); ++r)
        for (Eigen::Index c = 0; c < grad_w.cols(); ++c) gradient(cursor++) = grad_w(r, c);
      for (Eigen::Index r = 0; r < grad_b.size(); ++r) gradient(cursor++) = grad_b(r);
      if (l > 0) {
        const Eigen::MatrixXd upstream = delta * weights_[l];
        // tanh'(z) = 1 - tanh(z)^2, and activations[l] already holds tanh(z)
        delta = upstream.array() * (1.0 - activations[l].array().square());
      }
    }
    return loss;
  }

  Eigen::Index parameter_count() const {
    Eigen::Index count = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l) count += weights_[l].size() + biases_[l].size();
    return count;
  }

  Eigen::VectorXd parameters() const {
    Eigen::VectorXd flat(parameter_count());
    Eigen::Index cursor = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      for (Eigen::Index r = 0; r < weights_[l].rows(); ++r)
        for (Eigen::Index c = 0; c < weights_[l].cols(); ++c) flat(cursor++) = weights_[l](r, c);
      for (Eigen::Index r = 0; r < biases_[l].size(); ++r) flat(cursor++) = biases_[l](r);
    }
    return flat;
  }

  void set_parameters(const Eigen::VectorXd& flat) {
    if (flat.size() != parameter_count())
      throw BenchError(ErrorCode::ShapeMismatch, "parameter vector has the wrong length");
    Eigen::Index cursor = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      for (Eigen::Index r = 0; r < weights_[l].rows(); ++r)
        for (Eigen::Index c = 0; c < weights_[l].cols(); ++c) weights_[l](r, c) = flat(cursor++);
      for (Eigen::Index r = 0; r < biases_[l].size(); ++r) biases_[l](r) = flat(cursor++);
    }
  }

  // Mini-batch SGD; sample order is reshuffled per epoch from `rng` so a
  // fixed seed reproduces training bit for bit.
  void fit(const Eigen::MatrixXd& X, std::int64_t epochs, std::int64_t batch_size,
           double learning_rate, Rng& rng) {
    if (epochs < 0 || batch_size < 1 || !(learning_rate > 0.0))
      throw BenchError(ErrorCode::ConfigError, "invalid training configuration");
    if (X.rows() < batch_size)
      throw BenchError(ErrorCode::SeriesTooShort, "fewer training rows than batch_size");

    std::vector<Eigen::Index> order(static_cast<std::size_t>(X.rows()));
    std::iota(order.begin(), order.end(), 0);
    loss_history_.clear();

    Eigen::VectorXd gradient;
    for (std::int64_t epoch = 0; epoch < epochs; ++epoch) {
      for (std::size_t i = order.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
        std::swap(order[i - 1], order[j]);
      }
      double epoch_loss = 0.0;
      std::int64_t batches = 0;
      for (Eigen::Index start = 0; start < X.rows(); start += batch_size) {
        const Eigen::Index count = std::min<Eigen::Index>(batch_size, X.rows() - start);
        Eigen::MatrixXd batch(count, X.cols());
        for (Eigen::Index r = 0; r < count; ++r)
          batch.row(r) = X.row(order[static_cast<std::size_t>(start + r)]);
        const double loss = loss_and_gradient(batch, gradient);
        if (!std::isfinite(loss))
          throw BenchError(ErrorCode::NonFiniteLoss, "training loss diverged");
        set_parameters(parameters() - learning_rate * gradient);
        epoch_loss += loss;
        ++batches;
      }
      loss_history_.push_back(epoch_loss / static_cast<double>(batches));
    }
  }

 private:
  std::vector<std::int64_t> sizes_;
  std::vector<Eigen::MatrixXd> weights_;
  std::vector<Eigen::VectorXd> biases_;
  std::vector<double> loss_history_;
};

}  // namespace tsadbench
