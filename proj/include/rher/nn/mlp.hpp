#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "rher/rng.hpp"

namespace rher::nn {

enum class OutputActivation {
  Identity,    // critic head
  TanhScaled,  // actor head, output in (-scale, scale)
};

// Per-layer activations cached by a forward pass, consumed by backward().
struct ForwardCache {
  Eigen::MatrixXd input;                // in_dim x batch
  std::vector<Eigen::MatrixXd> post;    // post-activation per layer
};

// Gradients congruent to the network parameters (mean-loss convention:
// the caller folds the 1/batch factor into the output gradient).
struct Gradients {
  std::vector<Eigen::MatrixXd> dw;
  std::vector<Eigen::VectorXd> db;

  bool all_finite() const;
};

// Named view over one parameter array, for checkpointing and inspection.
struct ParamRef {
  std::string name;
  double* data;
  int rows = 0;
  int cols = 0;  // 1 for biases

  long size() const { return static_cast<long>(rows) * cols; }
};

// Dense feed-forward network, rectifier hidden units, batch-as-columns.
class MlpNetwork {
 public:
  MlpNetwork() = default;

  // layer_sizes = {in, hidden..., out}. Weights He-uniform, final layer
  // uniform(-3e-3, 3e-3), biases zero.
  static MlpNetwork make(const std::vector<int>& layer_sizes,
                         OutputActivation out_act, double out_scale, Rng& rng);

  int input_dim() const { return layer_sizes_.front(); }
  int output_dim() const { return layer_sizes_.back(); }
  int layer_count() const { return static_cast<int>(weights_.size()); }
  const std::vector<int>& layer_sizes() const { return layer_sizes_; }
  OutputActivation output_activation() const { return out_act_; }
  double output_scale() const { return out_scale_; }

  Eigen::MatrixXd forward(const Eigen::Ref<const Eigen::MatrixXd>& input) const;
  Eigen::MatrixXd forward_cached(const Eigen::Ref<const Eigen::MatrixXd>& input,
                                 ForwardCache& cache) const;

  // Reverse-mode pass. dloss_doutput is dL/d(output), out_dim x batch.
  // If dinput is non-null it receives dL/d(input).
  Gradients backward(const ForwardCache& cache,
                     const Eigen::Ref<const Eigen::MatrixXd>& dloss_doutput,
                     Eigen::MatrixXd* dinput = nullptr) const;

  Gradients zero_gradients() const;

  // Congruence check against another network (same layer shapes).
  bool congruent(const MlpNetwork& other) const;

  std::vector<ParamRef> named_params(const std::string& prefix);

  Eigen::MatrixXd& weight(int layer) { return weights_[layer]; }
  const Eigen::MatrixXd& weight(int layer) const { return weights_[layer]; }
  Eigen::VectorXd& bias(int layer) { return biases_[layer]; }
  const Eigen::VectorXd& bias(int layer) const { return biases_[layer]; }

  void set_all_zero();

 private:
  std::vector<int> layer_sizes_;
  std::vector<Eigen::MatrixXd> weights_;  // W[l]: sizes[l+1] x sizes[l]
  std::vector<Eigen::VectorXd> biases_;
  OutputActivation out_act_ = OutputActivation::Identity;
  double out_scale_ = 1.0;
};

// target <- (1 - tau) * target + tau * online, element-wise. Throws on
// incongruent parameter sets or tau outside [0,1].
void polyak_update(MlpNetwork& target, const MlpNetwork& online, double tau);

}  // namespace rher::nn
