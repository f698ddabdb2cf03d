#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <deque>
#include <vector>

#include "rher/env/planar.hpp"
#include "rher/relay/encoding.hpp"
#include "rher/rng.hpp"

namespace rher::replay {

// Where an exploration action came from.
enum class ActionSource : int { Random = 0, Guide = 1, Learning = 2, Scripted = 3 };

struct StepRecord {
  Eigen::Vector2d action;
  int stage = 1;  // detect_stage at the time the action was chosen
  ActionSource source = ActionSource::Learning;
};

// Fixed-horizon trajectory: T+1 state snapshots and T steps. Transition t
// reads states[t] and states[t+1].
struct EpisodeRecord {
  std::vector<env::Observation> states;
  std::vector<StepRecord> steps;
  uint64_t episode_seed = 0;

  int length() const { return static_cast<int>(steps.size()); }
  const env::Observation& state(int t) const { return states.at(t); }

  // Transition view matching the stored-step schema.
  struct Transition {
    const env::Observation& obs;
    const env::Observation& next_obs;
    const Eigen::Vector2d& action;
    int stage_at_t;
    ActionSource action_source;
  };
  Transition transition(int t) const {
    const StepRecord& s = steps.at(t);
    return {states.at(t), states.at(t + 1), s.action, s.stage, s.source};
  }

  // Eq. 9 hindsight goal for sub-task j at time t with future offset k,
  // 1 <= k <= T - t.
  Eigen::VectorXd hindsight_goal(int j, int t, int k, const relay::TaskLayout& layout) const;
};

// Episode ring buffer bounded by a total transition capacity; whole episodes
// are evicted oldest-first.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity_transitions, int expected_length);

  void store_episode(EpisodeRecord episode);

  std::size_t size_transitions() const { return stored_transitions_; }
  std::size_t size_episodes() const { return episodes_.size(); }
  std::size_t capacity_transitions() const { return capacity_; }
  int expected_length() const { return expected_length_; }
  bool empty() const { return episodes_.empty(); }
  const EpisodeRecord& episode(std::size_t idx) const { return episodes_.at(idx); }

 private:
  std::size_t capacity_;
  int expected_length_;
  std::deque<EpisodeRecord> episodes_;
  std::size_t stored_transitions_ = 0;
};

// One sampled training batch for a specific sub-task; columns are samples.
struct HerBatch {
  Eigen::MatrixXd obs;
  Eigen::MatrixXd goal;
  Eigen::MatrixXd action;
  Eigen::VectorXd reward;
  Eigen::MatrixXd next_obs;
  Eigen::MatrixXd next_goal;
  int relabeled = 0;              // samples that used a future hindsight goal
  int relabeled_zero_reward = 0;  // of those, samples whose reward came out 0
};

// HER future-strategy sampling (relabel probability p_future). Each sample
// draws an episode and a time uniformly; the goal is either the sub-task-j
// encoding of the stored state (probability 1 - p_future) or the hindsight
// encoding from a uniformly chosen future step. Rewards are recomputed
// against the chosen goal.
HerBatch sample_her_batch(const ReplayBuffer& buffer, int j, int batch_size,
                          double p_future, const relay::TaskLayout& layout, Rng& rng);

}  // namespace rher::replay
