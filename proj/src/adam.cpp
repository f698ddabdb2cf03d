#include "rher/nn/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace rher::nn {

AdamState AdamState::for_network(const MlpNetwork& net, double lr) {
  AdamState s;
  s.learning_rate = lr;
  for (int l = 0; l < net.layer_count(); ++l) {
    s.m_w.push_back(Eigen::MatrixXd::Zero(net.weight(l).rows(), net.weight(l).cols()));
    s.v_w.push_back(Eigen::MatrixXd::Zero(net.weight(l).rows(), net.weight(l).cols()));
    s.m_b.push_back(Eigen::VectorXd::Zero(net.bias(l).size()));
    s.v_b.push_back(Eigen::VectorXd::Zero(net.bias(l).size()));
  }
  return s;
}

bool adam_step(MlpNetwork& params, const Gradients& grads, AdamState& state) {
  const int layers = params.layer_count();
  if (static_cast<int>(grads.dw.size()) != layers ||
      static_cast<int>(state.m_w.size()) != layers)
    throw std::invalid_argument("adam_step: gradients not congruent to parameters");
  for (int l = 0; l < layers; ++l) {
    if (grads.dw[l].rows() != params.weight(l).rows() ||
        grads.dw[l].cols() != params.weight(l).cols() ||
        grads.db[l].size() != params.bias(l).size())
      throw std::invalid_argument("adam_step: gradient shape mismatch");
  }
  if (!grads.all_finite()) return false;

  state.step_count += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, state.step_count);
  const double bc2 = 1.0 - std::pow(state.beta2, state.step_count);
  const double lr = state.learning_rate;

  for (int l = 0; l < layers; ++l) {
    auto& mw = state.m_w[l];
    auto& vw = state.v_w[l];
    mw = state.beta1 * mw + (1.0 - state.beta1) * grads.dw[l];
    vw = state.beta2 * vw.array().matrix() +
         (1.0 - state.beta2) * grads.dw[l].array().square().matrix();
    params.weight(l).array() -=
        lr * (mw.array() / bc1) / ((vw.array() / bc2).sqrt() + state.epsilon);

    auto& mb = state.m_b[l];
    auto& vb = state.v_b[l];
    mb = state.beta1 * mb + (1.0 - state.beta1) * grads.db[l];
    vb = state.beta2 * vb.array().matrix() +
         (1.0 - state.beta2) * grads.db[l].array().square().matrix();
    params.bias(l).array() -=
        lr * (mb.array() / bc1) / ((vb.array() / bc2).sqrt() + state.epsilon);
  }
  return true;
}

}  // namespace rher::nn
