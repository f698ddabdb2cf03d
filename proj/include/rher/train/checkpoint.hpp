#pragma once

#include <memory>
#include <string>

#include "rher/agent/agent.hpp"
#include "rher/train/config.hpp"

namespace rher::train {

// Versioned binary snapshot: magic header, config echo, named little-endian
// float32 parameter arrays, normalizer statistics, optimizer states, guide
// tracker and training rng state.
inline constexpr char kCheckpointMagic[8] = {'R', 'H', 'E', 'R', 'C', 'K', 'P', '1'};
inline constexpr uint32_t kCheckpointVersion = 1;

struct TrainerSnapshot {
  TrainConfig config;
  std::unique_ptr<agent::ActorCritic> agent;
  agent::GuideTracker tracker;
  std::string rng_state;
  int epoch = 0;
  long steps = 0;
};

void save_checkpoint(const std::string& path, const TrainConfig& cfg,
                     agent::ActorCritic& agent, const agent::GuideTracker& tracker,
                     const std::string& rng_state, int epoch, long steps);

TrainerSnapshot load_checkpoint(const std::string& path);

}  // namespace rher::train
