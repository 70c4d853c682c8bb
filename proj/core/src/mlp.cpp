#include "loader_rl/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace loader_rl {

Mlp::Mlp(std::vector<int> layer_sizes) : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2)
    throw std::invalid_argument("Mlp: need at least input and output sizes");
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    if (sizes_[l] <= 0 || sizes_[l + 1] <= 0)
      throw std::invalid_argument("Mlp: layer sizes must be positive");
    total += static_cast<std::size_t>(sizes_[l + 1]) *
             static_cast<std::size_t>(sizes_[l] + 1);
  }
  params_.assign(total, 0.0);
}

std::size_t Mlp::weight_offset(int layer) const {
  std::size_t off = 0;
  for (int l = 0; l < layer; ++l) {
    off += static_cast<std::size_t>(sizes_[l + 1]) *
           static_cast<std::size_t>(sizes_[l] + 1);
  }
  return off;
}

void Mlp::init_orthogonal(Rng& rng, double hidden_gain, double output_gain) {
  for (int l = 0; l < num_layers(); ++l) {
    const int rows = sizes_[l + 1];
    const int cols = sizes_[l];
    const int n = std::max(rows, cols);
    const int k = std::min(rows, cols);
    Eigen::MatrixXd a(n, k);
    for (int j = 0; j < k; ++j)
      for (int i = 0; i < n; ++i) a(i, j) = rng.normal();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, k);
    // sign fix so the result is uniformly distributed
    Eigen::MatrixXd r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    for (int j = 0; j < k; ++j) {
      if (r(j, j) < 0.0) q.col(j) *= -1.0;
    }
    Eigen::MatrixXd w = rows >= cols ? q : Eigen::MatrixXd(q.transpose());
    const double gain = l + 1 == num_layers() ? output_gain : hidden_gain;
    const std::size_t off = weight_offset(l);
    Eigen::Map<Eigen::MatrixXd>(params_.data() + off, rows, cols) = gain * w;
    std::fill_n(params_.data() + off + static_cast<std::size_t>(rows) * cols,
                rows, 0.0);
  }
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& input, Cache* cache) const {
  if (input.rows() != input_size())
    throw std::invalid_argument("Mlp::forward: input size mismatch");
  if (cache) {
    cache->activations.clear();
    cache->activations.push_back(input);
  }
  Eigen::MatrixXd h = input;
  for (int l = 0; l < num_layers(); ++l) {
    const int rows = sizes_[l + 1];
    const int cols = sizes_[l];
    const std::size_t off = weight_offset(l);
    Eigen::Map<const Eigen::MatrixXd> w(params_.data() + off, rows, cols);
    Eigen::Map<const Eigen::VectorXd> b(
        params_.data() + off + static_cast<std::size_t>(rows) * cols, rows);
    Eigen::MatrixXd z = w * h;
    z.colwise() += b;
    if (l + 1 < num_layers()) {
      h = z.array().tanh().matrix();
      if (cache) cache->activations.push_back(h);
    } else {
      h = std::move(z);
    }
  }
  return h;
}

void Mlp::backward(const Cache& cache, const Eigen::MatrixXd& grad_output,
                   std::span<double> grad) const {
  if (grad.size() != params_.size())
    throw std::invalid_argument("Mlp::backward: gradient buffer size mismatch");
  Eigen::MatrixXd delta = grad_output;  // dL/dz of the current layer
  for (int l = num_layers() - 1; l >= 0; --l) {
    const int rows = sizes_[l + 1];
    const int cols = sizes_[l];
    const std::size_t off = weight_offset(l);
    const Eigen::MatrixXd& in = cache.activations[static_cast<std::size_t>(l)];
    Eigen::Map<Eigen::MatrixXd> gw(grad.data() + off, rows, cols);
    Eigen::Map<Eigen::VectorXd> gb(
        grad.data() + off + static_cast<std::size_t>(rows) * cols, rows);
    gw.noalias() += delta * in.transpose();
    gb += delta.rowwise().sum();
    if (l > 0) {
      Eigen::Map<const Eigen::MatrixXd> w(params_.data() + off, rows, cols);
      Eigen::MatrixXd upstream = w.transpose() * delta;
      delta = (upstream.array() * (1.0 - in.array().square())).matrix();
    }
  }
}

void ObsNormalizer::update(std::span<const double> sample) {
  if (sample.size() != mean.size())
    throw std::invalid_argument("ObsNormalizer::update: size mismatch");
  // batch of one merged into the running moments
  const double total = count + 1.0;
  for (std::size_t i = 0; i < mean.size(); ++i) {
    const double delta = sample[i] - mean[i];
    const double m2 = var[i] * count + delta * delta * count / total;
    mean[i] += delta / total;
    var[i] = m2 / total;
  }
  count = total;
}

std::vector<double> ObsNormalizer::normalize(
    std::span<const double> sample) const {
  if (sample.size() != mean.size())
    throw std::invalid_argument("ObsNormalizer::normalize: size mismatch");
  std::vector<double> out(sample.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::clamp((sample[i] - mean[i]) / std::sqrt(var[i] + kEpsilon),
                        -kClip, kClip);
  }
  return out;
}

}  // namespace loader_rl
