#pragma once

#include <Eigen/Dense>

namespace rher::nn {

// Running mean/std input scaler with symmetric clipping. An empty normalizer
// applies the identity transform (mean 0, std 1).
class Normalizer {
 public:
  Normalizer() = default;
  explicit Normalizer(int dim, double clip_range = 5.0);

  int dim() const { return static_cast<int>(sum_.size()); }
  double count() const { return count_; }
  double clip_range() const { return clip_; }

  // Accumulate raw samples; batch columns are samples.
  void observe(const Eigen::Ref<const Eigen::MatrixXd>& batch);

  Eigen::VectorXd mean() const;
  Eigen::VectorXd stddev() const;  // floored, never zero

  // (x - mean) / std, clipped to [-clip_range, clip_range] per coordinate.
  Eigen::MatrixXd apply(const Eigen::Ref<const Eigen::MatrixXd>& x) const;

  // Serialization access.
  double raw_count() const { return count_; }
  const Eigen::VectorXd& raw_sum() const { return sum_; }
  const Eigen::VectorXd& raw_sumsq() const { return sumsq_; }
  void restore(double count, Eigen::VectorXd sum, Eigen::VectorXd sumsq, double clip);

  static constexpr double kVarianceFloor = 1e-8;

 private:
  double count_ = 0.0;
  Eigen::VectorXd sum_;
  Eigen::VectorXd sumsq_;
  double clip_ = 5.0;
};

}  // namespace rher::nn
