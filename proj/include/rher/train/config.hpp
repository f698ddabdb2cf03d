#pragma once

#include <cstdint>
#include <string>

#include "rher/agent/agent.hpp"
#include "rher/env/planar.hpp"

namespace rher::train {

// Full run configuration. File format: flat "key = value" sections mirroring
// the fields below; command-line flags override file values.
struct TrainConfig {
  env::EnvConfig env;
  double dist_threshold = 0.05;
  agent::SgesConfig sges;
  agent::AgentConfig agent;

  int epochs = 400;
  int episodes_per_epoch = 50;
  int optimization_steps = 40;  // gradient rounds per episode
  int batch_size = 256;
  int eval_episodes = 20;
  double p_future = 0.8;
  std::size_t buffer_capacity = 1000000;
  uint64_t seed = 1;
  std::string out_dir;
  bool baseline_her = false;   // collapse to the final sub-task, no guidance
  double stop_success = 0.0;   // stop once final-sub-task success reaches this (0 = off)
  int min_epochs = 0;          // epochs to run before stop_success may trigger
  int checkpoint_every = 1;    // epochs between checkpoint writes
};

// Task-appropriate defaults: multi-object tasks switch to TD3, batch 2048,
// sr 0.8 and their longer horizons.
TrainConfig config_for_task(env::Task task);

TrainConfig parse_config_text(const std::string& text);
TrainConfig load_config_file(const std::string& path);

// Canonical serialization; parse_config_text(serialize_config(c)) == c.
std::string serialize_config(const TrainConfig& cfg);

}  // namespace rher::train
