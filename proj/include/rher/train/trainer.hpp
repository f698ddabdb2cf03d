#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

#include "rher/agent/agent.hpp"
#include "rher/replay/buffer.hpp"
#include "rher/train/config.hpp"
#include "rher/train/metrics.hpp"

namespace rher::train {

// Evaluation notion for sub-task j at the final step of an episode: all
// earlier objects at their goals; odd j additionally needs the gripper at
// object i, even j needs object i at its goal.
bool subtask_success(int j, const env::Observation& final_obs,
                     const relay::TaskLayout& layout);

using PolicyFn = std::function<Eigen::Vector2d(const env::Observation&)>;

// Noise-free rollouts of an arbitrary policy; returns the success fraction
// for sub-task j. Episode e uses reset seed derive_seed(seed_base, e).
double evaluate_policy(const env::EnvConfig& env_cfg, const relay::TaskLayout& layout,
                       int subtask, const PolicyFn& policy, int episodes,
                       uint64_t seed_base);

// The agent acting through its own sub-task-j goal encoding, no exploration.
double evaluate_agent(const agent::ActorCritic& agent, const env::EnvConfig& env_cfg,
                      const relay::TaskLayout& layout, int subtask, int episodes,
                      uint64_t seed_base);

struct TrainResult {
  std::vector<EpochMetrics> history;
  int episodes_run = 0;
  bool stopped_early = false;
  // First epoch (0-based) whose final-sub-task success reached the given
  // threshold, or -1. Convenience over `history`.
  int first_epoch_at(double threshold) const;
};

// Full training run per the relay protocol: collect an episode with
// stage-aware exploration, then optimization_steps gradient rounds over each
// trained sub-task; evaluate, promote the guide index and emit metrics once
// per epoch. Deterministic for a fixed (seed, config) within one build.
class Trainer {
 public:
  explicit Trainer(const TrainConfig& cfg);

  TrainResult run(std::ostream* log = nullptr);

  agent::ActorCritic& agent() { return *agent_; }
  const agent::ActorCritic& agent() const { return *agent_; }
  const agent::GuideTracker& tracker() const { return tracker_; }
  const relay::TaskLayout& layout() const { return layout_; }
  const TrainConfig& config() const { return cfg_; }
  const replay::ReplayBuffer& buffer() const { return buffer_; }
  int max_subtask() const { return max_subtask_; }
  long cumulative_steps() const { return cumulative_steps_; }

  // Exposed for tests: one exploration episode (also stored) and one
  // optimization phase.
  replay::EpisodeRecord collect_episode(int epoch, int episode_index);
  void optimize_phase();

 private:
  struct EpochAccumulator {
    long source_counts[3] = {0, 0, 0};
    long relabeled = 0;
    long relabeled_zero = 0;
    double critic_loss_sum = 0.0;
    double actor_loss_sum = 0.0;
    long update_count = 0;
  };

  std::vector<double> evaluate_all(int epoch) const;
  void check_nan_storm() const;

  TrainConfig cfg_;
  relay::TaskLayout layout_;
  int max_subtask_;
  std::vector<int> trained_subtasks_;
  std::unique_ptr<agent::ActorCritic> agent_;
  replay::ReplayBuffer buffer_;
  agent::GuideTracker tracker_;
  Rng rng_;
  long cumulative_steps_ = 0;
  EpochAccumulator acc_;
};

TrainResult run_training(const TrainConfig& cfg, std::ostream* log = nullptr);

}  // namespace rher::train
