#include "rher/agent/agent.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rher::agent {

void update_guide_index(GuideTracker& tracker, const std::vector<double>& rates, double sr) {
  for (double r : rates)
    if (!(r >= 0.0 && r <= 1.0))
      throw std::invalid_argument("update_guide_index: success rate outside [0,1]");
  int g = 0;
  for (int j = 1; j <= static_cast<int>(rates.size()); ++j)
    if (rates[j - 1] >= sr) g = j;
  tracker.test_success = rates;
  tracker.guide_index = g;
}

ActorCritic::ActorCritic(int obs_dim, int goal_dim, int action_dim,
                         const AgentConfig& cfg, uint64_t init_seed)
    : obs_dim_(obs_dim), goal_dim_(goal_dim), action_dim_(action_dim), cfg_(cfg) {
  if (obs_dim < 1 || goal_dim < 1 || action_dim < 1)
    throw std::invalid_argument("ActorCritic: dimensions must be positive");

  Rng rng(init_seed);
  std::vector<int> actor_sizes{obs_dim + goal_dim};
  actor_sizes.insert(actor_sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
  actor_sizes.push_back(action_dim);
  std::vector<int> critic_sizes{obs_dim + goal_dim + action_dim};
  critic_sizes.insert(critic_sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
  critic_sizes.push_back(1);

  actor_ = nn::MlpNetwork::make(actor_sizes, nn::OutputActivation::TanhScaled, 1.0, rng);
  critic_ = nn::MlpNetwork::make(critic_sizes, nn::OutputActivation::Identity, 1.0, rng);
  critic2_ = nn::MlpNetwork::make(critic_sizes, nn::OutputActivation::Identity, 1.0, rng);
  target_actor_ = actor_;
  target_critic_ = critic_;
  target_critic2_ = critic2_;

  actor_opt_ = nn::AdamState::for_network(actor_, cfg.actor_lr);
  critic_opt_ = nn::AdamState::for_network(critic_, cfg.critic_lr);
  critic2_opt_ = nn::AdamState::for_network(critic2_, cfg.critic_lr);

  obs_norm_ = nn::Normalizer(obs_dim, cfg.normalizer_clip);
  goal_norm_ = nn::Normalizer(goal_dim, cfg.normalizer_clip);
}

Eigen::MatrixXd ActorCritic::actor_input(const Eigen::Ref<const Eigen::MatrixXd>& obs,
                                         const Eigen::Ref<const Eigen::MatrixXd>& goal) const {
  Eigen::MatrixXd in(obs_dim_ + goal_dim_, obs.cols());
  in.topRows(obs_dim_) = obs_norm_.apply(obs);
  in.bottomRows(goal_dim_) = goal_norm_.apply(goal);
  return in;
}

Eigen::MatrixXd ActorCritic::policy(const Eigen::Ref<const Eigen::MatrixXd>& obs,
                                    const Eigen::Ref<const Eigen::MatrixXd>& goal) const {
  return actor_.forward(actor_input(obs, goal));
}

Eigen::VectorXd ActorCritic::policy_single(const Eigen::VectorXd& obs,
                                           const Eigen::VectorXd& goal) const {
  return policy(obs, goal).col(0);
}

Eigen::MatrixXd ActorCritic::critic_input(const Eigen::Ref<const Eigen::MatrixXd>& obs,
                                          const Eigen::Ref<const Eigen::MatrixXd>& goal,
                                          const Eigen::Ref<const Eigen::MatrixXd>& action) const {
  Eigen::MatrixXd in(obs_dim_ + goal_dim_ + action_dim_, obs.cols());
  in.topRows(obs_dim_ + goal_dim_) = actor_input(obs, goal);
  in.bottomRows(action_dim_) = action;
  return in;
}

Eigen::RowVectorXd ActorCritic::compute_targets(const replay::HerBatch& batch,
                                                Rng& rng) const {
  const auto cols = batch.next_obs.cols();
  Eigen::MatrixXd next_in = actor_input(batch.next_obs, batch.next_goal);
  Eigen::MatrixXd next_a = target_actor_.forward(next_in);
  if (cfg_.td3) {
    for (Eigen::Index c = 0; c < next_a.cols(); ++c)
      for (Eigen::Index r = 0; r < next_a.rows(); ++r) {
        const double eps = std::clamp(rng.normal(cfg_.td3_smoothing_std),
                                      -cfg_.td3_smoothing_clip, cfg_.td3_smoothing_clip);
        next_a(r, c) = std::clamp(next_a(r, c) + eps, -1.0, 1.0);
      }
  }
  Eigen::MatrixXd critic_in(obs_dim_ + goal_dim_ + action_dim_, cols);
  critic_in.topRows(obs_dim_ + goal_dim_) = next_in;
  critic_in.bottomRows(action_dim_) = next_a;

  Eigen::RowVectorXd q_next = target_critic_.forward(critic_in).row(0);
  if (cfg_.td3)
    q_next = q_next.cwiseMin(target_critic2_.forward(critic_in).row(0));

  const double lo = -1.0 / (1.0 - cfg_.gamma);
  Eigen::RowVectorXd y =
      (batch.reward.transpose() + cfg_.gamma * q_next).cwiseMax(lo).cwiseMin(0.0);
  return y;
}

double ActorCritic::critic_loss(const replay::HerBatch& batch,
                                const Eigen::RowVectorXd& y, bool twin) const {
  const nn::MlpNetwork& critic = twin ? critic2_ : critic_;
  const Eigen::MatrixXd in = critic_input(batch.obs, batch.goal, batch.action);
  const Eigen::RowVectorXd q = critic.forward(in).row(0);
  return (q - y).squaredNorm() / static_cast<double>(batch.obs.cols());
}

nn::Gradients ActorCritic::critic_loss_gradients(const replay::HerBatch& batch,
                                                 const Eigen::RowVectorXd& y,
                                                 double& loss, bool twin) const {
  const nn::MlpNetwork& critic = twin ? critic2_ : critic_;
  const auto cols = batch.obs.cols();
  nn::ForwardCache cache;
  const Eigen::MatrixXd in = critic_input(batch.obs, batch.goal, batch.action);
  const Eigen::RowVectorXd q = critic.forward_cached(in, cache).row(0);
  const Eigen::RowVectorXd err = q - y;
  loss = err.squaredNorm() / static_cast<double>(cols);
  const Eigen::MatrixXd dq = (2.0 / static_cast<double>(cols)) * err;
  return critic.backward(cache, dq);
}

double ActorCritic::actor_loss(const replay::HerBatch& batch) const {
  const auto cols = batch.obs.cols();
  const Eigen::MatrixXd in = actor_input(batch.obs, batch.goal);
  const Eigen::MatrixXd a = actor_.forward(in);
  const Eigen::RowVectorXd q = critic_.forward(critic_input(batch.obs, batch.goal, a)).row(0);
  return -q.mean() + cfg_.action_l2 * a.array().square().sum() / static_cast<double>(cols);
}

nn::Gradients ActorCritic::actor_loss_gradients(const replay::HerBatch& batch,
                                                double& loss) const {
  const auto cols = batch.obs.cols();
  const double inv_b = 1.0 / static_cast<double>(cols);

  nn::ForwardCache actor_cache;
  const Eigen::MatrixXd in = actor_input(batch.obs, batch.goal);
  const Eigen::MatrixXd a = actor_.forward_cached(in, actor_cache);

  Eigen::MatrixXd critic_in(obs_dim_ + goal_dim_ + action_dim_, cols);
  critic_in.topRows(obs_dim_ + goal_dim_) = in;
  critic_in.bottomRows(action_dim_) = a;
  nn::ForwardCache critic_cache;
  const Eigen::RowVectorXd q = critic_.forward_cached(critic_in, critic_cache).row(0);

  loss = -q.mean() + cfg_.action_l2 * a.array().square().sum() * inv_b;

  // dL/da flows through the critic's action input, plus the regularizer term.
  const Eigen::MatrixXd dq = Eigen::MatrixXd::Constant(1, cols, -inv_b);
  Eigen::MatrixXd dcritic_in;
  critic_.backward(critic_cache, dq, &dcritic_in);
  const Eigen::MatrixXd da =
      dcritic_in.bottomRows(action_dim_) + (2.0 * cfg_.action_l2 * inv_b) * a;
  return actor_.backward(actor_cache, da);
}

double ActorCritic::critic_update(const replay::HerBatch& batch, Rng& rng) {
  const Eigen::RowVectorXd y = compute_targets(batch, rng);

  auto bellman_step = [&](nn::MlpNetwork& critic, nn::AdamState& opt, bool twin) -> double {
    double loss;
    nn::Gradients grads = critic_loss_gradients(batch, y, loss, twin);
    if (!std::isfinite(loss)) {
      ++consecutive_skipped_;
      return loss;
    }
    if (nn::adam_step(critic, grads, opt))
      consecutive_skipped_ = 0;
    else
      ++consecutive_skipped_;
    return loss;
  };

  double loss = bellman_step(critic_, critic_opt_, false);
  if (cfg_.td3) {
    const double loss2 = bellman_step(critic2_, critic2_opt_, true);
    loss = 0.5 * (loss + loss2);
  }
  ++critic_updates_;
  return loss;
}

double ActorCritic::actor_update(const replay::HerBatch& batch) {
  if (cfg_.td3 && cfg_.td3_actor_delay > 1 &&
      critic_updates_ % cfg_.td3_actor_delay != 0)
    return last_actor_loss_;

  double loss;
  nn::Gradients grads = actor_loss_gradients(batch, loss);
  if (!std::isfinite(loss)) {
    ++consecutive_skipped_;
    return loss;
  }
  if (nn::adam_step(actor_, grads, actor_opt_))
    consecutive_skipped_ = 0;
  else
    ++consecutive_skipped_;
  last_actor_loss_ = loss;
  return loss;
}

void ActorCritic::update_targets() {
  nn::polyak_update(target_actor_, actor_, cfg_.polyak_tau);
  nn::polyak_update(target_critic_, critic_, cfg_.polyak_tau);
  if (cfg_.td3) nn::polyak_update(target_critic2_, critic2_, cfg_.polyak_tau);
}

void ActorCritic::observe_obs(const Eigen::Ref<const Eigen::MatrixXd>& batch) {
  obs_norm_.observe(batch);
}

void ActorCritic::observe_goals(const Eigen::Ref<const Eigen::MatrixXd>& batch) {
  goal_norm_.observe(batch);
}

std::vector<nn::ParamRef> ActorCritic::named_params() {
  std::vector<nn::ParamRef> refs;
  auto append = [&refs](std::vector<nn::ParamRef> more) {
    refs.insert(refs.end(), more.begin(), more.end());
  };
  append(actor_.named_params("actor"));
  append(critic_.named_params("critic"));
  append(target_actor_.named_params("target_actor"));
  append(target_critic_.named_params("target_critic"));
  if (cfg_.td3) {
    append(critic2_.named_params("critic2"));
    append(target_critic2_.named_params("target_critic2"));
  }
  return refs;
}

ActionChoice select_action_sges(const ActorCritic& agent, const env::Observation& o,
                                int stage, const GuideTracker& tracker,
                                const SgesConfig& cfg, const relay::TaskLayout& layout,
                                int max_subtask, Rng& rng) {
  const double u = rng.uniform();
  if (u < cfg.beta) {
    return {Eigen::Vector2d(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)),
            replay::ActionSource::Random, 0};
  }
  const int base = std::min(std::max(tracker.guide_index, stage), max_subtask);
  const bool guide = u < cfg.beta + cfg.alpha;
  const int idx = guide ? base : std::min(base + 1, max_subtask);

  Eigen::VectorXd a = agent.policy_single(o.obs, relay::encode_goal(idx, o, layout));
  Eigen::Vector2d act(a[0], a[1]);
  act.x() = std::clamp(act.x() + rng.normal(cfg.noise_std), -1.0, 1.0);
  act.y() = std::clamp(act.y() + rng.normal(cfg.noise_std), -1.0, 1.0);
  return {act, guide ? replay::ActionSource::Guide : replay::ActionSource::Learning, idx};
}

}  // namespace rher::agent
