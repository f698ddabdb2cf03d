#pragma once

#include <Eigen/Dense>
#include <vector>

#include "rher/nn/mlp.hpp"

namespace rher::nn {

// Bias-corrected Adam state for one network's parameter set.
struct AdamState {
  long step_count = 0;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::vector<Eigen::MatrixXd> m_w, v_w;
  std::vector<Eigen::VectorXd> m_b, v_b;

  static AdamState for_network(const MlpNetwork& net, double lr);
};

// One Adam step. Returns false (parameters and step count untouched) when any
// gradient coordinate is non-finite.
bool adam_step(MlpNetwork& params, const Gradients& grads, AdamState& state);

}  // namespace rher::nn
