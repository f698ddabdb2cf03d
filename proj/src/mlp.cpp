#include "rher/nn/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace rher::nn {

bool Gradients::all_finite() const {
  for (const auto& m : dw)
    if (!m.allFinite()) return false;
  for (const auto& v : db)
    if (!v.allFinite()) return false;
  return true;
}

MlpNetwork MlpNetwork::make(const std::vector<int>& layer_sizes,
                            OutputActivation out_act, double out_scale,
                            Rng& rng) {
  if (layer_sizes.size() < 2)
    throw std::invalid_argument("MlpNetwork: need at least input and output layer");
  for (int s : layer_sizes)
    if (s <= 0) throw std::invalid_argument("MlpNetwork: layer sizes must be positive");

  MlpNetwork net;
  net.layer_sizes_ = layer_sizes;
  net.out_act_ = out_act;
  net.out_scale_ = out_scale;
  const int layers = static_cast<int>(layer_sizes.size()) - 1;
  for (int l = 0; l < layers; ++l) {
    const int rows = layer_sizes[l + 1];
    const int cols = layer_sizes[l];
    Eigen::MatrixXd w(rows, cols);
    const bool last = (l == layers - 1);
    const double bound = last ? 3e-3 : std::sqrt(6.0 / cols);
    for (int c = 0; c < cols; ++c)
      for (int r = 0; r < rows; ++r) w(r, c) = rng.uniform(-bound, bound);
    net.weights_.push_back(std::move(w));
    net.biases_.push_back(Eigen::VectorXd::Zero(rows));
  }
  return net;
}

Eigen::MatrixXd MlpNetwork::forward(const Eigen::Ref<const Eigen::MatrixXd>& input) const {
  if (input.rows() != input_dim())
    throw std::invalid_argument("MlpNetwork::forward: input has " +
                                std::to_string(input.rows()) + " rows, expected " +
                                std::to_string(input_dim()));
  Eigen::MatrixXd a = input;
  const int layers = layer_count();
  for (int l = 0; l < layers; ++l) {
    Eigen::MatrixXd z = (weights_[l] * a).colwise() + biases_[l];
    if (l + 1 < layers) {
      a = z.cwiseMax(0.0);
    } else if (out_act_ == OutputActivation::TanhScaled) {
      a = out_scale_ * z.array().tanh();
    } else {
      a = std::move(z);
    }
  }
  return a;
}

Eigen::MatrixXd MlpNetwork::forward_cached(const Eigen::Ref<const Eigen::MatrixXd>& input,
                                           ForwardCache& cache) const {
  if (input.rows() != input_dim())
    throw std::invalid_argument("MlpNetwork::forward_cached: input dimension mismatch");
  cache.input = input;
  cache.post.resize(layer_count());
  const int layers = layer_count();
  const Eigen::MatrixXd* a = &cache.input;
  for (int l = 0; l < layers; ++l) {
    Eigen::MatrixXd z = (weights_[l] * (*a)).colwise() + biases_[l];
    if (l + 1 < layers) {
      cache.post[l] = z.cwiseMax(0.0);
    } else if (out_act_ == OutputActivation::TanhScaled) {
      cache.post[l] = out_scale_ * z.array().tanh();
    } else {
      cache.post[l] = std::move(z);
    }
    a = &cache.post[l];
  }
  return cache.post.back();
}

Gradients MlpNetwork::backward(const ForwardCache& cache,
                               const Eigen::Ref<const Eigen::MatrixXd>& dloss_doutput,
                               Eigen::MatrixXd* dinput) const {
  const int layers = layer_count();
  if (static_cast<int>(cache.post.size()) != layers)
    throw std::invalid_argument("MlpNetwork::backward: cache does not match network");
  if (dloss_doutput.rows() != output_dim() ||
      dloss_doutput.cols() != cache.input.cols())
    throw std::invalid_argument("MlpNetwork::backward: output gradient shape mismatch");

  Gradients g;
  g.dw.resize(layers);
  g.db.resize(layers);

  // dZ for the output layer.
  Eigen::MatrixXd dz;
  if (out_act_ == OutputActivation::TanhScaled) {
    // a = s * tanh(z)  =>  da/dz = s - a^2 / s
    dz = dloss_doutput.cwiseProduct(
        (out_scale_ - cache.post.back().array().square() / out_scale_).matrix());
  } else {
    dz = dloss_doutput;
  }

  for (int l = layers - 1; l >= 0; --l) {
    const Eigen::MatrixXd& below = (l == 0) ? cache.input : cache.post[l - 1];
    g.dw[l].noalias() = dz * below.transpose();
    g.db[l] = dz.rowwise().sum();
    if (l > 0) {
      Eigen::MatrixXd da = weights_[l].transpose() * dz;
      // rectifier: post > 0 iff pre-activation > 0
      dz = (cache.post[l - 1].array() > 0.0).select(da, 0.0);
    } else if (dinput != nullptr) {
      dinput->noalias() = weights_[0].transpose() * dz;
    }
  }
  return g;
}

Gradients MlpNetwork::zero_gradients() const {
  Gradients g;
  for (const auto& w : weights_) g.dw.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
  for (const auto& b : biases_) g.db.push_back(Eigen::VectorXd::Zero(b.size()));
  return g;
}

bool MlpNetwork::congruent(const MlpNetwork& other) const {
  if (layer_sizes_ != other.layer_sizes_) return false;
  return out_act_ == other.out_act_ && out_scale_ == other.out_scale_;
}

std::vector<ParamRef> MlpNetwork::named_params(const std::string& prefix) {
  std::vector<ParamRef> refs;
  for (int l = 0; l < layer_count(); ++l) {
    const std::string base = prefix + "/l" + std::to_string(l);
    refs.push_back({base + "/w", weights_[l].data(),
                    static_cast<int>(weights_[l].rows()),
                    static_cast<int>(weights_[l].cols())});
    refs.push_back({base + "/b", biases_[l].data(),
                    static_cast<int>(biases_[l].size()), 1});
  }
  return refs;
}

void MlpNetwork::set_all_zero() {
  for (auto& w : weights_) w.setZero();
  for (auto& b : biases_) b.setZero();
}

void polyak_update(MlpNetwork& target, const MlpNetwork& online, double tau) {
  if (tau < 0.0 || tau > 1.0)
    throw std::invalid_argument("polyak_update: tau must lie in [0,1]");
  if (!target.congruent(online))
    throw std::invalid_argument("polyak_update: parameter sets are not congruent");
  for (int l = 0; l < target.layer_count(); ++l) {
    target.weight(l) = (1.0 - tau) * target.weight(l) + tau * online.weight(l);
    target.bias(l) = (1.0 - tau) * target.bias(l) + tau * online.bias(l);
  }
}

}  // namespace rher::nn
