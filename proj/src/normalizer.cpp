#include "rher/nn/normalizer.hpp"

#include <stdexcept>

namespace rher::nn {

Normalizer::Normalizer(int dim, double clip_range)
    : sum_(Eigen::VectorXd::Zero(dim)), sumsq_(Eigen::VectorXd::Zero(dim)), clip_(clip_range) {
  if (dim <= 0) throw std::invalid_argument("Normalizer: dim must be positive");
  if (clip_range <= 0.0) throw std::invalid_argument("Normalizer: clip_range must be positive");
}

void Normalizer::observe(const Eigen::Ref<const Eigen::MatrixXd>& batch) {
  if (batch.rows() != dim())
    throw std::invalid_argument("Normalizer::observe: dimension mismatch");
  if (!batch.allFinite())
    throw std::invalid_argument("Normalizer::observe: non-finite sample");
  count_ += static_cast<double>(batch.cols());
  sum_ += batch.rowwise().sum();
  sumsq_ += batch.array().square().matrix().rowwise().sum();
}

Eigen::VectorXd Normalizer::mean() const {
  if (count_ <= 0.0) return Eigen::VectorXd::Zero(dim());
  return sum_ / count_;
}

Eigen::VectorXd Normalizer::stddev() const {
  if (count_ <= 0.0) return Eigen::VectorXd::Ones(dim());
  Eigen::ArrayXd mu = (sum_ / count_).array();
  Eigen::ArrayXd var = (sumsq_ / count_).array() - mu.square();
  return var.max(kVarianceFloor).sqrt().matrix();
}

Eigen::MatrixXd Normalizer::apply(const Eigen::Ref<const Eigen::MatrixXd>& x) const {
  if (x.rows() != dim())
    throw std::invalid_argument("Normalizer::apply: dimension mismatch");
  Eigen::ArrayXd mu = mean().array();
  Eigen::ArrayXd sd = stddev().array();
  Eigen::MatrixXd out(x.rows(), x.cols());
  out = ((x.array().colwise() - mu).colwise() / sd).min(clip_).max(-clip_).matrix();
  return out;
}

void Normalizer::restore(double count, Eigen::VectorXd sum, Eigen::VectorXd sumsq, double clip) {
  if (sum.size() != sumsq.size())
    throw std::invalid_argument("Normalizer::restore: inconsistent arrays");
  count_ = count;
  sum_ = std::move(sum);
  sumsq_ = std::move(sumsq);
  clip_ = clip;
}

}  // namespace rher::nn
