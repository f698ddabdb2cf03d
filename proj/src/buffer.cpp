#include "rher/replay/buffer.hpp"

#include <stdexcept>
#include <string>

namespace rher::replay {

Eigen::VectorXd EpisodeRecord::hindsight_goal(int j, int t, int k,
                                              const relay::TaskLayout& layout) const {
  const int T = length();
  if (t < 0 || t >= T)
    throw std::out_of_range("EpisodeRecord::hindsight_goal: t outside episode");
  if (k < 1 || t + k > T)
    throw std::out_of_range("EpisodeRecord::hindsight_goal: future offset k=" +
                            std::to_string(k) + " overflows episode of length " +
                            std::to_string(T));
  return relay::encode_hindsight_from(j, states.at(t + k), layout);
}

ReplayBuffer::ReplayBuffer(std::size_t capacity_transitions, int expected_length)
    : capacity_(capacity_transitions), expected_length_(expected_length) {
  if (expected_length < 1)
    throw std::invalid_argument("ReplayBuffer: episode length must be positive");
  if (capacity_transitions < static_cast<std::size_t>(expected_length))
    throw std::invalid_argument("ReplayBuffer: capacity below one episode");
}

void ReplayBuffer::store_episode(EpisodeRecord episode) {
  if (episode.length() != expected_length_ ||
      static_cast<int>(episode.states.size()) != expected_length_ + 1)
    throw std::invalid_argument("ReplayBuffer::store_episode: malformed episode length");
  stored_transitions_ += episode.length();
  episodes_.push_back(std::move(episode));
  while (stored_transitions_ > capacity_) {
    stored_transitions_ -= episodes_.front().length();
    episodes_.pop_front();
  }
}

HerBatch sample_her_batch(const ReplayBuffer& buffer, int j, int batch_size,
                          double p_future, const relay::TaskLayout& layout, Rng& rng) {
  if (buffer.empty())
    throw std::runtime_error("sample_her_batch: buffer is empty");
  if (batch_size < 1)
    throw std::invalid_argument("sample_her_batch: batch_size must be positive");

  const int obs_dim = static_cast<int>(buffer.episode(0).states.front().obs.size());
  HerBatch b;
  b.obs.resize(obs_dim, batch_size);
  b.goal.resize(layout.goal_dim, batch_size);
  b.action.resize(2, batch_size);
  b.reward.resize(batch_size);
  b.next_obs.resize(obs_dim, batch_size);
  b.next_goal.resize(layout.goal_dim, batch_size);

  for (int s = 0; s < batch_size; ++s) {
    const EpisodeRecord& ep =
        buffer.episode(rng.uniform_int(static_cast<int>(buffer.size_episodes())));
    const int T = ep.length();
    const int t = rng.uniform_int(T);
    const env::Observation& obs = ep.state(t);
    const env::Observation& next = ep.state(t + 1);

    Eigen::VectorXd goal, next_goal;
    const bool relabel = rng.uniform() < p_future;
    if (relabel) {
      const int k = 1 + rng.uniform_int(T - t);  // future offset in [1, T-t]
      goal = ep.hindsight_goal(j, t, k, layout);
      next_goal = goal;  // same future snapshot seen from t+1
    } else {
      goal = relay::encode_goal(j, obs, layout);
      next_goal = relay::encode_goal(j, next, layout);
    }
    const double reward = relay::reward_for_subtask(j, next, goal, layout);

    b.obs.col(s) = obs.obs;
    b.goal.col(s) = goal;
    b.action.col(s) = ep.steps[t].action;
    b.reward[s] = reward;
    b.next_obs.col(s) = next.obs;
    b.next_goal.col(s) = next_goal;
    if (relabel) {
      ++b.relabeled;
      if (reward == 0.0) ++b.relabeled_zero_reward;
    }
  }
  return b;
}

}  // namespace rher::replay
