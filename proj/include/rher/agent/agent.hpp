#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "rher/env/planar.hpp"
#include "rher/nn/adam.hpp"
#include "rher/nn/mlp.hpp"
#include "rher/nn/normalizer.hpp"
#include "rher/relay/encoding.hpp"
#include "rher/replay/buffer.hpp"
#include "rher/rng.hpp"

namespace rher::agent {

struct SgesConfig {
  double alpha = 0.4;      // guide-policy probability
  double beta = 0.2;       // random-policy probability
  double sr = 1.0;         // test-success threshold for guide promotion
  double noise_std = 0.2;  // gaussian noise added to policy actions
};

// Latest per-sub-task test success rates and the guide stage index g:
// the largest sub-task whose rate has reached sr (0 when none has).
struct GuideTracker {
  std::vector<double> test_success;
  int guide_index = 0;
};

void update_guide_index(GuideTracker& tracker, const std::vector<double>& rates, double sr);

struct AgentConfig {
  std::vector<int> hidden = {64, 64};
  double actor_lr = 1e-3;
  double critic_lr = 1e-3;
  double gamma = 0.98;
  double polyak_tau = 0.05;
  double action_l2 = 1.0;       // regularizer weight on squared action norm
  double normalizer_clip = 5.0;
  bool td3 = false;             // twin critics, smoothed targets, delayed actor
  double td3_smoothing_std = 0.05;
  double td3_smoothing_clip = 0.15;
  int td3_actor_delay = 2;
};

// One multi-goal / multi-task policy-critic pair with delayed targets. A
// single shared network serves every sub-task; the goal encoding selects the
// task. Parameters are plain values: reads may happen anywhere, writes only
// through the update calls.
class ActorCritic {
 public:
  ActorCritic(int obs_dim, int goal_dim, int action_dim, const AgentConfig& cfg,
              uint64_t init_seed);

  int obs_dim() const { return obs_dim_; }
  int goal_dim() const { return goal_dim_; }
  int action_dim() const { return action_dim_; }
  const AgentConfig& config() const { return cfg_; }

  Eigen::MatrixXd policy(const Eigen::Ref<const Eigen::MatrixXd>& obs,
                         const Eigen::Ref<const Eigen::MatrixXd>& goal) const;
  Eigen::VectorXd policy_single(const Eigen::VectorXd& obs,
                                const Eigen::VectorXd& goal) const;

  // Bellman targets r + gamma * Q'(s', g', pi'(s', g')), clipped to
  // [-1/(1-gamma), 0]. TD3 mode smooths target actions and takes the twin
  // minimum; the rng feeds that smoothing noise.
  Eigen::RowVectorXd compute_targets(const replay::HerBatch& batch, Rng& rng) const;

  // Mean squared Bellman error of the online critic against fixed targets,
  // and its gradients. The forward-only form supports finite-difference
  // checks of the gradient path.
  double critic_loss(const replay::HerBatch& batch, const Eigen::RowVectorXd& y,
                     bool twin = false) const;
  nn::Gradients critic_loss_gradients(const replay::HerBatch& batch,
                                      const Eigen::RowVectorXd& y, double& loss,
                                      bool twin = false) const;

  // Policy objective -mean Q(s, g, pi(s, g)) + action_l2 * mean ||a||^2 and
  // its gradients with respect to the actor parameters.
  double actor_loss(const replay::HerBatch& batch) const;
  nn::Gradients actor_loss_gradients(const replay::HerBatch& batch, double& loss) const;

  // One optimization step on the mean squared Bellman error. Returns the
  // loss; a non-finite loss or gradient skips the parameter update.
  double critic_update(const replay::HerBatch& batch, Rng& rng);

  // One step maximizing mean Q(s, g, pi(s, g)) with an action-magnitude
  // regularizer: loss = -mean Q + action_l2 * mean ||a||^2. In TD3 mode the
  // update runs on every td3_actor_delay-th critic update.
  double actor_update(const replay::HerBatch& batch);

  void update_targets();  // polyak toward online nets with cfg tau

  void observe_obs(const Eigen::Ref<const Eigen::MatrixXd>& batch);
  void observe_goals(const Eigen::Ref<const Eigen::MatrixXd>& batch);

  long critic_updates() const { return critic_updates_; }
  int consecutive_skipped() const { return consecutive_skipped_; }

  nn::MlpNetwork& actor_net() { return actor_; }
  nn::MlpNetwork& critic_net() { return critic_; }
  nn::MlpNetwork& critic2_net() { return critic2_; }
  nn::MlpNetwork& target_actor_net() { return target_actor_; }
  nn::MlpNetwork& target_critic_net() { return target_critic_; }
  nn::MlpNetwork& target_critic2_net() { return target_critic2_; }
  nn::Normalizer& obs_normalizer() { return obs_norm_; }
  nn::Normalizer& goal_normalizer() { return goal_norm_; }
  const nn::Normalizer& obs_normalizer() const { return obs_norm_; }
  const nn::Normalizer& goal_normalizer() const { return goal_norm_; }
  nn::AdamState& actor_opt() { return actor_opt_; }
  nn::AdamState& critic_opt() { return critic_opt_; }
  nn::AdamState& critic2_opt() { return critic2_opt_; }

  std::vector<nn::ParamRef> named_params();

 private:
  Eigen::MatrixXd actor_input(const Eigen::Ref<const Eigen::MatrixXd>& obs,
                              const Eigen::Ref<const Eigen::MatrixXd>& goal) const;
  Eigen::MatrixXd critic_input(const Eigen::Ref<const Eigen::MatrixXd>& obs,
                               const Eigen::Ref<const Eigen::MatrixXd>& goal,
                               const Eigen::Ref<const Eigen::MatrixXd>& action) const;

  int obs_dim_, goal_dim_, action_dim_;
  AgentConfig cfg_;
  nn::MlpNetwork actor_, critic_, critic2_;
  nn::MlpNetwork target_actor_, target_critic_, target_critic2_;
  nn::AdamState actor_opt_, critic_opt_, critic2_opt_;
  nn::Normalizer obs_norm_, goal_norm_;
  long critic_updates_ = 0;
  int consecutive_skipped_ = 0;
  double last_actor_loss_ = 0.0;
};

struct ActionChoice {
  Eigen::Vector2d action;
  replay::ActionSource source;
  int conditioned_subtask = 0;  // 0 for random actions
};

// Stage-aware exploration mixture: a uniform random action with probability
// beta, the guide policy pi^{max(g,j)} with probability alpha, otherwise the
// learning policy pi^{min(max(g,j)+1, max_subtask)}. Gaussian noise is added
// to the non-random branches, then the action is clipped to the box.
ActionChoice select_action_sges(const ActorCritic& agent, const env::Observation& o,
                                int stage, const GuideTracker& tracker,
                                const SgesConfig& cfg, const relay::TaskLayout& layout,
                                int max_subtask, Rng& rng);

}  // namespace rher::agent
