#include "rher/train/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "rher/train/checkpoint.hpp"

namespace rher::train {

namespace {
// Seed stream tags.
constexpr uint64_t kAgentInit = 1;
constexpr uint64_t kTrainStream = 2;
constexpr uint64_t kEpisodeSeed = 3;
constexpr uint64_t kEvalSeed = 4;
}  // namespace

bool subtask_success(int j, const env::Observation& final_obs,
                     const relay::TaskLayout& layout) {
  if (j < 1 || j > layout.stages)
    throw std::out_of_range("subtask_success: sub-task index out of range");
  const int i = (j + 1) / 2;
  for (int m = 1; m < i; ++m)
    if ((final_obs.achieved[m - 1] - final_obs.desired[m - 1]).norm() >= layout.tol)
      return false;
  if (j % 2 == 1)
    return (final_obs.gripper - final_obs.achieved[i - 1]).norm() < layout.tol;
  return (final_obs.achieved[i - 1] - final_obs.desired[i - 1]).norm() < layout.tol;
}

double evaluate_policy(const env::EnvConfig& env_cfg, const relay::TaskLayout& layout,
                       int subtask, const PolicyFn& policy, int episodes,
                       uint64_t seed_base) {
  env::PlanarWorld world(env_cfg);
  int successes = 0;
  for (int e = 0; e < episodes; ++e) {
    env::Observation obs = world.reset(derive_seed(seed_base, e));
    bool done = false;
    while (!done) {
      auto [next, d] = world.step(policy(obs));
      obs = std::move(next);
      done = d;
    }
    if (subtask_success(subtask, obs, layout)) ++successes;
  }
  return static_cast<double>(successes) / episodes;
}

double evaluate_agent(const agent::ActorCritic& agent, const env::EnvConfig& env_cfg,
                      const relay::TaskLayout& layout, int subtask, int episodes,
                      uint64_t seed_base) {
  return evaluate_policy(
      env_cfg, layout, subtask,
      [&](const env::Observation& o) -> Eigen::Vector2d {
        Eigen::VectorXd a =
            agent.policy_single(o.obs, relay::encode_goal(subtask, o, layout));
        return {a[0], a[1]};
      },
      episodes, seed_base);
}

int TrainResult::first_epoch_at(double threshold) const {
  for (const auto& m : history)
    if (!m.success.empty() && m.success.back() >= threshold) return m.epoch;
  return -1;
}

Trainer::Trainer(const TrainConfig& cfg)
    : cfg_(cfg),
      layout_(relay::TaskLayout::make(env::object_count(cfg.env.task),
                                      cfg.dist_threshold, cfg.env.success_tol)),
      max_subtask_(cfg.env.task == env::Task::Reach ? 1 : layout_.stages),
      buffer_(cfg.buffer_capacity, cfg.env.horizon),
      rng_(derive_seed(cfg.seed, kTrainStream)) {
  if (cfg.epochs < 1 || cfg.episodes_per_epoch < 1 || cfg.optimization_steps < 0 ||
      cfg.batch_size < 1 || cfg.eval_episodes < 1)
    throw std::invalid_argument("TrainConfig: counts must be positive");

  if (cfg.baseline_her) {
    trained_subtasks_ = {max_subtask_};
  } else {
    for (int j = 1; j <= max_subtask_; ++j) trained_subtasks_.push_back(j);
  }

  const int n = env::object_count(cfg.env.task);
  agent_ = std::make_unique<agent::ActorCritic>(env::observation_dim(n), layout_.goal_dim,
                                                2, cfg.agent,
                                                derive_seed(cfg.seed, kAgentInit));
  tracker_.test_success.assign(max_subtask_, 0.0);
  tracker_.guide_index = 0;
}

replay::EpisodeRecord Trainer::collect_episode(int epoch, int episode_index) {
  env::PlanarWorld world(cfg_.env);
  replay::EpisodeRecord ep;
  ep.episode_seed = derive_seed(cfg_.seed, kEpisodeSeed, epoch, episode_index);
  env::Observation obs = world.reset(ep.episode_seed);
  ep.states.push_back(obs);

  const int final_subtask = max_subtask_;
  for (int t = 0; t < cfg_.env.horizon; ++t) {
    const int stage = relay::detect_stage(obs, layout_);
    agent::ActionChoice choice;
    if (cfg_.baseline_her) {
      const double u = rng_.uniform();
      if (u < cfg_.sges.beta) {
        choice = {Eigen::Vector2d(rng_.uniform(-1.0, 1.0), rng_.uniform(-1.0, 1.0)),
                  replay::ActionSource::Random, 0};
      } else {
        Eigen::VectorXd a = agent_->policy_single(
            obs.obs, relay::encode_goal(final_subtask, obs, layout_));
        Eigen::Vector2d act(
            std::clamp(a[0] + rng_.normal(cfg_.sges.noise_std), -1.0, 1.0),
            std::clamp(a[1] + rng_.normal(cfg_.sges.noise_std), -1.0, 1.0));
        choice = {act, replay::ActionSource::Learning, final_subtask};
      }
    } else {
      choice = agent::select_action_sges(*agent_, obs, stage, tracker_, cfg_.sges,
                                         layout_, max_subtask_, rng_);
    }
    auto [next, done] = world.step(choice.action);
    ep.steps.push_back({choice.action, stage, choice.source});
    ep.states.push_back(next);
    obs = std::move(next);
    acc_.source_counts[static_cast<int>(choice.source)] += 1;
    (void)done;
  }

  // normalizer statistics from the fresh episode
  const int T = cfg_.env.horizon;
  Eigen::MatrixXd obs_batch(ep.states[0].obs.size(), T + 1);
  for (int t = 0; t <= T; ++t) obs_batch.col(t) = ep.states[t].obs;
  agent_->observe_obs(obs_batch);
  Eigen::MatrixXd goal_batch(layout_.goal_dim,
                             static_cast<Eigen::Index>(T) * trained_subtasks_.size());
  Eigen::Index col = 0;
  for (int j : trained_subtasks_)
    for (int t = 0; t < T; ++t)
      goal_batch.col(col++) = relay::encode_goal(j, ep.states[t], layout_);
  agent_->observe_goals(goal_batch);

  buffer_.store_episode(ep);
  cumulative_steps_ += T;
  return ep;
}

void Trainer::optimize_phase() {
  for (int round = 0; round < cfg_.optimization_steps; ++round) {
    for (int j : trained_subtasks_) {
      replay::HerBatch batch = replay::sample_her_batch(buffer_, j, cfg_.batch_size,
                                                        cfg_.p_future, layout_, rng_);
      const double closs = agent_->critic_update(batch, rng_);
      const double aloss = agent_->actor_update(batch);
      agent_->update_targets();
      check_nan_storm();

      acc_.critic_loss_sum += closs;
      acc_.actor_loss_sum += aloss;
      acc_.update_count += 1;
      if (j == max_subtask_) {
        acc_.relabeled += batch.relabeled;
        acc_.relabeled_zero += batch.relabeled_zero_reward;
      }
    }
  }
}

void Trainer::check_nan_storm() const {
  if (agent_->consecutive_skipped() > 10)
    throw std::runtime_error(
        "training aborted: more than 10 consecutive optimization updates were "
        "skipped on non-finite losses or gradients");
}

std::vector<double> Trainer::evaluate_all(int epoch) const {
  std::vector<double> rates(layout_.stages, 0.0);
  for (int j = 1; j <= layout_.stages; ++j) {
    rates[j - 1] = evaluate_agent(*agent_, cfg_.env, layout_, j, cfg_.eval_episodes,
                                  derive_seed(cfg_.seed, kEvalSeed, epoch, j));
  }
  return rates;
}

TrainResult Trainer::run(std::ostream* log) {
  namespace fs = std::filesystem;
  std::ofstream metrics_out;
  std::string checkpoint_path;
  if (!cfg_.out_dir.empty()) {
    std::error_code ec;
    fs::create_directories(cfg_.out_dir, ec);
    std::ofstream cfg_out(cfg_.out_dir + "/config.ini");
    cfg_out << serialize_config(cfg_);
    if (!cfg_out)
      throw std::runtime_error("cannot write to output directory: " + cfg_.out_dir);
    metrics_out.open(cfg_.out_dir + "/metrics.csv", std::ios::trunc);
    if (!metrics_out)
      throw std::runtime_error("cannot write to output directory: " + cfg_.out_dir);
    metrics_out << metrics_header(layout_.stages) << "\n";
    metrics_out.flush();
    checkpoint_path = cfg_.out_dir + "/checkpoint.bin";
  }

  TrainResult result;
  for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    acc_ = EpochAccumulator{};
    for (int e = 0; e < cfg_.episodes_per_epoch; ++e) {
      collect_episode(epoch, e);
      optimize_phase();
      ++result.episodes_run;
    }

    const std::vector<double> rates = evaluate_all(epoch);
    if (!cfg_.baseline_her) {
      std::vector<double> trained_rates(rates.begin(), rates.begin() + max_subtask_);
      agent::update_guide_index(tracker_, trained_rates, cfg_.sges.sr);
    }

    EpochMetrics m;
    m.epoch = epoch;
    m.steps = cumulative_steps_;
    m.success = rates;
    m.guide_index = tracker_.guide_index;
    m.nnsr_ratio = acc_.relabeled > 0
                       ? static_cast<double>(acc_.relabeled_zero) / acc_.relabeled
                       : 0.0;
    const long total_steps =
        acc_.source_counts[0] + acc_.source_counts[1] + acc_.source_counts[2];
    m.freq_random = total_steps ? static_cast<double>(acc_.source_counts[0]) / total_steps : 0.0;
    m.freq_guide = total_steps ? static_cast<double>(acc_.source_counts[1]) / total_steps : 0.0;
    m.freq_learn = total_steps ? static_cast<double>(acc_.source_counts[2]) / total_steps : 0.0;
    m.loss_critic = acc_.update_count ? acc_.critic_loss_sum / acc_.update_count : 0.0;
    m.loss_actor = acc_.update_count ? acc_.actor_loss_sum / acc_.update_count : 0.0;
    m.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.history.push_back(m);

    if (metrics_out.is_open()) {
      metrics_out << metrics_row(m) << "\n";
      metrics_out.flush();
      if (!metrics_out) throw std::runtime_error("metrics stream write failed");
    }
    if (!checkpoint_path.empty() && cfg_.checkpoint_every > 0 &&
        ((epoch + 1) % cfg_.checkpoint_every == 0 || epoch + 1 == cfg_.epochs)) {
      save_checkpoint(checkpoint_path, cfg_, *agent_, tracker_, rng_.state(), epoch,
                      cumulative_steps_);
    }
    if (log != nullptr) {
      (*log) << "epoch " << epoch << " steps " << cumulative_steps_ << " success [";
      for (size_t i = 0; i < rates.size(); ++i)
        (*log) << (i ? " " : "") << rates[i];
      (*log) << "] g " << tracker_.guide_index << " closs " << m.loss_critic
             << " aloss " << m.loss_actor << " nnsr " << m.nnsr_ratio << " "
             << m.seconds << "s\n";
      log->flush();
    }

    if (cfg_.stop_success > 0.0 && epoch + 1 >= cfg_.min_epochs &&
        rates[max_subtask_ - 1] >= cfg_.stop_success) {
      result.stopped_early = true;
      break;
    }
  }

  if (!checkpoint_path.empty()) {
    save_checkpoint(checkpoint_path, cfg_, *agent_, tracker_, rng_.state(),
                    static_cast<int>(result.history.size()) - 1, cumulative_steps_);
  }
  return result;
}

TrainResult run_training(const TrainConfig& cfg, std::ostream* log) {
  Trainer trainer(cfg);
  return trainer.run(log);
}

}  // namespace rher::train
