#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>
#include <set>

#include "rher/env/planar.hpp"
#include "rher/relay/encoding.hpp"
#include "rher/replay/buffer.hpp"
#include "rher/rng.hpp"

using namespace rher;
using relay::TaskLayout;
using replay::EpisodeRecord;
using replay::ReplayBuffer;

namespace {

// Rolls one episode in a real world with a fixed action callback.
template <typename ActionFn>
EpisodeRecord roll_episode(env::PlanarWorld& world, uint64_t seed, ActionFn act) {
  EpisodeRecord ep;
  ep.episode_seed = seed;
  env::Observation obs = world.reset(seed);
  ep.states.push_back(obs);
  bool done = false;
  int t = 0;
  while (!done) {
    Eigen::Vector2d a = act(obs, t);
    auto [next, d] = world.step(a);
    ep.steps.push_back({a, 1, replay::ActionSource::Scripted});
    ep.states.push_back(next);
    obs = std::move(next);
    done = d;
    ++t;
  }
  return ep;
}

EpisodeRecord random_episode(env::PlanarWorld& world, uint64_t seed) {
  Rng rng(derive_seed(seed, 0xAC));
  return roll_episode(world, seed, [&rng](const env::Observation&, int) {
    return Eigen::Vector2d(rng.uniform(-1, 1), rng.uniform(-1, 1));
  });
}

}  // namespace

TEST_CASE("store_episode rejects malformed lengths") {
  ReplayBuffer buf(1000, 50);
  env::PlanarWorld world(env::default_config(env::Task::Push));
  EpisodeRecord ep = random_episode(world, 1);
  ep.steps.pop_back();
  ep.states.pop_back();
  CHECK_THROWS_AS(buf.store_episode(ep), std::invalid_argument);
}

TEST_CASE("sampling with relabel probability 0 returns the sub-task encoding") {
  TaskLayout layout = TaskLayout::make(1, 0.05, 0.05);
  env::PlanarWorld world(env::default_config(env::Task::Push));
  ReplayBuffer buf(100000, 50);
  buf.store_episode(random_episode(world, 3));

  Rng rng(7);
  for (int j = 1; j <= 2; ++j) {
    auto batch = replay::sample_her_batch(buf, j, 64, 0.0, layout, rng);
    CHECK(batch.relabeled == 0);
    for (int s = 0; s < 64; ++s) {
      // identify the source transition by matching the observation column
      bool matched = false;
      const EpisodeRecord& ep = buf.episode(0);
      for (int t = 0; t < ep.length(); ++t) {
        if (ep.state(t).obs == batch.obs.col(s)) {
          CHECK(batch.goal.col(s) == relay::encode_goal(j, ep.state(t), layout));
          CHECK(batch.next_obs.col(s) == ep.state(t + 1).obs);
          matched = true;
          break;
        }
      }
      CHECK(matched);
    }
  }
}

TEST_CASE("ring eviction drops the oldest episode first") {
  env::EnvConfig cfg = env::default_config(env::Task::Push);
  cfg.horizon = 10;
  env::PlanarWorld world(cfg);
  ReplayBuffer buf(35, 10);  // room for 3 episodes
  for (uint64_t s = 0; s < 5; ++s) buf.store_episode(random_episode(world, 100 + s));
  CHECK(buf.size_episodes() == 3);
  CHECK(buf.size_transitions() == 30);
  std::set<uint64_t> seeds;
  for (size_t e = 0; e < buf.size_episodes(); ++e) seeds.insert(buf.episode(e).episode_seed);
  CHECK(seeds == std::set<uint64_t>{102, 103, 104});
}

TEST_CASE("single stored episode supports any batch size") {
  TaskLayout layout = TaskLayout::make(1, 0.05, 0.05);
  env::PlanarWorld world(env::default_config(env::Task::Push));
  ReplayBuffer buf(100000, 50);
  EpisodeRecord ep = random_episode(world, 9);
  buf.store_episode(ep);
  Rng rng(11);
  auto batch = replay::sample_her_batch(buf, 2, 256, 0.8, layout, rng);
  CHECK(batch.obs.cols() == 256);
  // every sample's observation occurs in the stored episode
  for (int s = 0; s < 256; ++s) {
    bool found = false;
    for (int t = 0; t < ep.length() && !found; ++t)
      found = (buf.episode(0).state(t).obs == batch.obs.col(s));
    CHECK(found);
  }
}

TEST_CASE("empty buffer is rejected") {
  TaskLayout layout = TaskLayout::make(1, 0.05, 0.05);
  ReplayBuffer buf(1000, 50);
  Rng rng(1);
  CHECK_THROWS_AS((void)replay::sample_her_batch(buf, 1, 8, 0.8, layout, rng),
                  std::runtime_error);
}

TEST_CASE("horizon-1 episodes force the next-state offset: all hindsight rewards 0") {
  TaskLayout layout = TaskLayout::make(1, 0.05, 0.05);
  env::EnvConfig cfg = env::default_config(env::Task::Push);
  cfg.horizon = 1;
  env::PlanarWorld world(cfg);
  ReplayBuffer buf(1000, 1);
  for (uint64_t s = 0; s < 10; ++s) buf.store_episode(random_episode(world, 40 + s));
  Rng rng(13);
  auto batch = replay::sample_her_batch(buf, 2, 512, 1.0, layout, rng);
  CHECK(batch.relabeled == 512);
  CHECK(batch.reward.minCoeff() == 0.0);
  CHECK(batch.relabeled_zero_reward == 512);
}

TEST_CASE("relabeled fraction concentrates near p_future") {
  TaskLayout layout = TaskLayout::make(1, 0.05, 0.05);
  env::PlanarWorld world(env::default_config(env::Task::Push));
  ReplayBuffer buf(100000, 50);
  for (uint64_t s = 0; s < 5; ++s) buf.store_episode(random_episode(world, 60 + s));
  Rng rng(17);
  long relabeled = 0, total = 0;
  while (total < 10000) {
    auto batch = replay::sample_her_batch(buf, 2, 500, 0.8, layout, rng);
    relabeled += batch.relabeled;
    total += 500;
  }
  const double fraction = static_cast<double>(relabeled) / total;
  CHECK(fraction >= 0.78);
  CHECK(fraction <= 0.82);
}

TEST_CASE("NNSR signature: untouched object makes every hindsight goal identical and zero-reward") {
  TaskLayout layout = TaskLayout::make(1, 0.05, 0.05);
  env::PlanarWorld world(env::default_config(env::Task::Push));
  // stand still: the object is never touched
  EpisodeRecord ep = roll_episode(world, 21, [](const env::Observation&, int) {
    return Eigen::Vector2d::Zero();
  });
  ReplayBuffer buf(1000, 50);
  buf.store_episode(ep);
  Rng rng(19);
  auto batch = replay::sample_her_batch(buf, 2, 1024, 1.0, layout, rng);
  CHECK(batch.relabeled == 1024);
  for (int s = 0; s < 1024; ++s) {
    CHECK(batch.goal.col(s) == batch.goal.col(0));  // identical hindsight goals
    CHECK(batch.reward[s] == 0.0);
  }
}

TEST_CASE("rewards are recomputed against the sampled encoding, never stale") {
  for (int n : {1, 2}) {
    TaskLayout layout = TaskLayout::make(n, 0.05, 0.05);
    env::PlanarWorld world(
        env::default_config(n == 1 ? env::Task::Push : env::Task::DPush));
    ReplayBuffer buf(100000, world.horizon());
    for (uint64_t s = 0; s < 4; ++s) buf.store_episode(random_episode(world, 80 + s));
    Rng rng(23);
    for (int j = 1; j <= 2 * n; ++j) {
      auto batch = replay::sample_her_batch(buf, j, 128, 0.8, layout, rng);
      for (int s = 0; s < 128; ++s) {
        // rebuild an observation view of the sampled next state
        env::Observation next;
        next.obs = batch.next_obs.col(s);
        next.gripper = next.obs.segment<2>(0);
        for (int m = 0; m < n; ++m)
          next.achieved.push_back(next.obs.segment<2>(4 + 6 * m));
        next.desired.assign(n, Eigen::Vector2d::Zero());  // unused by the check
        CHECK(batch.reward[s] ==
              relay::reward_for_subtask(j, next, batch.goal.col(s), layout));
      }
    }
  }
}

TEST_CASE("hindsight goals come only from the future of the same episode") {
  // episode whose object moves strictly monotonically in x: any future
  // object slot must exceed the current object position
  TaskLayout layout = TaskLayout::make(1, 0.05, 0.05);
  env::EnvConfig cfg = env::default_config(env::Task::Push);
  cfg.horizon = 15;  // short enough that the object never reaches the wall
  env::PlanarWorld world(cfg);
  world.reset(31);
  world.set_state({0.1, 0.5}, {{0.1 + cfg.object_radius + 1e-3, 0.5}}, {{0.9, 0.5}});
  EpisodeRecord ep;
  ep.episode_seed = 31;
  ep.states.push_back(world.observe());
  for (int t = 0; t < cfg.horizon; ++t) {
    auto [next, done] = world.step(Eigen::Vector2d(1.0, 0.0));  // push right
    ep.steps.push_back({{1.0, 0.0}, 1, replay::ActionSource::Scripted});
    ep.states.push_back(next);
  }
  ReplayBuffer buf(1000, cfg.horizon);
  buf.store_episode(ep);

  Rng rng(37);
  auto batch = replay::sample_her_batch(buf, 2, 2048, 1.0, layout, rng);
  int strictly_ahead = 0;
  for (int s = 0; s < 2048; ++s) {
    const double obj_now = batch.obs.col(s)[4];      // object x at time t
    const double goal_x = batch.goal.col(s)[2];      // hindsight object slot x
    CHECK(goal_x >= obj_now - 1e-12);
    if (goal_x > obj_now + 1e-12) ++strictly_ahead;
  }
  // the object advances every step, so every future goal lies strictly ahead
  CHECK(strictly_ahead == 2048);
}

TEST_CASE("episode selection is uniform within 3 sigma over 1e5 draws") {
  TaskLayout layout = TaskLayout::make(1, 0.05, 0.05);
  env::EnvConfig cfg = env::default_config(env::Task::Push);
  cfg.horizon = 5;
  env::PlanarWorld world(cfg);
  const int episodes = 16;
  ReplayBuffer buf(episodes * 5, 5);
  for (uint64_t s = 0; s < episodes; ++s) buf.store_episode(random_episode(world, 200 + s));

  // count per-episode frequency by matching episode seeds through obs values
  std::map<double, int> first_obs_to_episode;
  for (int e = 0; e < episodes; ++e)
    for (int t = 0; t < 5; ++t)
      first_obs_to_episode[buf.episode(e).state(t).obs[0] +
                           1000.0 * buf.episode(e).state(t).obs[1]] = e;

  Rng rng(41);
  std::vector<long> counts(episodes, 0);
  const long draws = 100000;
  long assigned = 0;
  for (long i = 0; i < draws; i += 1000) {
    auto batch = replay::sample_her_batch(buf, 1, 1000, 0.8, layout, rng);
    for (int s = 0; s < 1000; ++s) {
      auto it = first_obs_to_episode.find(batch.obs.col(s)[0] + 1000.0 * batch.obs.col(s)[1]);
      REQUIRE(it != first_obs_to_episode.end());
      counts[it->second] += 1;
      ++assigned;
    }
  }
  CHECK(assigned == draws);
  const double expected = static_cast<double>(draws) / episodes;
  const double p = 1.0 / episodes;
  const double sigma = std::sqrt(draws * p * (1.0 - p));
  for (int e = 0; e < episodes; ++e)
    CHECK(std::abs(counts[e] - expected) <= 3.0 * sigma);
}

TEST_CASE("one stored episode yields valid batches for every sub-task") {
  TaskLayout layout = TaskLayout::make(3, 0.05, 0.05);
  env::PlanarWorld world(env::default_config(env::Task::TPush));
  ReplayBuffer buf(100000, world.horizon());
  buf.store_episode(random_episode(world, 300));
  Rng rng(43);
  for (int j = 1; j <= 6; ++j) {
    auto batch = replay::sample_her_batch(buf, j, 64, 0.8, layout, rng);
    CHECK(batch.goal.rows() == layout.goal_dim);
    for (int s = 0; s < 64; ++s) {
      CHECK((batch.reward[s] == 0.0 || batch.reward[s] == -1.0));
      // the identity slot of sub-task j is all-zero in every sampled goal
      CHECK(batch.goal.col(s).segment<2>(2 * relay::zero_slot(j)) ==
            Eigen::Vector2d::Zero());
    }
  }
}

TEST_CASE("transition view exposes the stored step schema") {
  env::PlanarWorld world(env::default_config(env::Task::Push));
  EpisodeRecord ep = random_episode(world, 77);
  auto tr = ep.transition(10);
  CHECK(tr.obs.obs == ep.state(10).obs);
  CHECK(tr.next_obs.obs == ep.state(11).obs);
  CHECK(tr.action == ep.steps[10].action);
  CHECK(tr.action_source == replay::ActionSource::Scripted);
  CHECK_THROWS_AS((void)ep.hindsight_goal(1, 10, 45, TaskLayout::make(1, 0.05, 0.05)),
                  std::out_of_range);
}
