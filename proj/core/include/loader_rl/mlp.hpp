#ifndef LOADER_RL_MLP_HPP_
#define LOADER_RL_MLP_HPP_

#include <Eigen/Dense>

#include <span>
#include <vector>

#include "loader_rl/rng.hpp"

namespace loader_rl {

// Fully connected network with tanh hidden layers and a linear output.
// Parameters live in one flat buffer, layer by layer: W (out x in,
// column-major) followed by b (out). Inputs are batched column-wise.
class Mlp {
 public:
  struct Cache {
    std::vector<Eigen::MatrixXd> activations;  // input, then each hidden layer
  };

  Mlp() = default;
  explicit Mlp(std::vector<int> layer_sizes);

  // Orthogonal weights scaled by `hidden_gain` (hidden layers) and
  // `output_gain` (last layer); zero biases.
  void init_orthogonal(Rng& rng, double hidden_gain, double output_gain);

  Eigen::MatrixXd forward(const Eigen::MatrixXd& input,
                          Cache* cache = nullptr) const;

  // Accumulates dLoss/dParams into `grad` given dLoss/dOutput.
  void backward(const Cache& cache, const Eigen::MatrixXd& grad_output,
                std::span<double> grad) const;

  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  int num_layers() const { return static_cast<int>(sizes_.size()) - 1; }
  const std::vector<int>& layer_sizes() const { return sizes_; }

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

  friend bool operator==(const Mlp&, const Mlp&) = default;

 private:
  std::size_t weight_offset(int layer) const;

  std::vector<int> sizes_;
  std::vector<double> params_;
};

// Running mean/variance of observations (parallel-merge update).
struct ObsNormalizer {
  static constexpr double kEpsilon = 1e-8;
  static constexpr double kClip = 10.0;

  std::vector<double> mean;
  std::vector<double> var;
  double count = 1e-4;

  ObsNormalizer() = default;
  explicit ObsNormalizer(int size)
      : mean(static_cast<std::size_t>(size), 0.0),
        var(static_cast<std::size_t>(size), 1.0) {}

  void update(std::span<const double> sample);
  std::vector<double> normalize(std::span<const double> sample) const;

  friend bool operator==(const ObsNormalizer&, const ObsNormalizer&) = default;
};

}  // namespace loader_rl

#endif  // LOADER_RL_MLP_HPP_
