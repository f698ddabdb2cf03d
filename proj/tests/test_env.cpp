#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sstream>

#include "rher/env/planar.hpp"
#include "rher/rng.hpp"

using namespace rher;
using env::EnvConfig;
using env::PlanarWorld;
using env::Task;

TEST_CASE("reset: same seed gives identical observations") {
  PlanarWorld w(env::default_config(Task::DPush));
  env::Observation a = w.reset(123);
  env::Observation b = w.reset(123);
  CHECK(a.obs == b.obs);
  CHECK(a.gripper == b.gripper);
  for (size_t i = 0; i < a.achieved.size(); ++i) {
    CHECK(a.achieved[i] == b.achieved[i]);
    CHECK(a.desired[i] == b.desired[i]);
  }
}

TEST_CASE("reset: PlanarPush has one object and one desired goal") {
  PlanarWorld w(env::default_config(Task::Push));
  env::Observation o = w.reset(1);
  CHECK(o.achieved.size() == 1);
  CHECK(o.desired.size() == 1);
  CHECK(o.obs.size() == env::observation_dim(1));
}

TEST_CASE("reset: sampled entities keep pairwise separation and goal distance") {
  for (Task task : {Task::Push, Task::DPush, Task::TPush}) {
    PlanarWorld w(env::default_config(task));
    const double r = w.config().object_radius;
    for (uint64_t seed = 0; seed < 10000 / 3; ++seed) {
      env::Observation o = w.reset(seed);
      std::vector<Eigen::Vector2d> all;
      all.push_back(o.gripper);
      for (const auto& p : o.achieved) all.push_back(p);
      for (const auto& p : o.desired) all.push_back(p);
      double min_sep = 1e9;
      for (size_t a = 0; a < all.size(); ++a)
        for (size_t b = a + 1; b < all.size(); ++b)
          min_sep = std::min(min_sep, (all[a] - all[b]).norm());
      REQUIRE(min_sep >= 2.0 * r);
      for (size_t i = 0; i < o.achieved.size(); ++i)
        REQUIRE((o.achieved[i] - o.desired[i]).norm() >= w.config().success_tol);
    }
  }
}

TEST_CASE("step: null action leaves gripper and objects stationary") {
  PlanarWorld w(env::default_config(Task::Push));
  env::Observation before = w.reset(7);
  auto [after, done] = w.step(Eigen::Vector2d::Zero());
  CHECK_FALSE(done);
  CHECK(after.gripper == before.gripper);
  CHECK(after.achieved[0] == before.achieved[0]);
}

TEST_CASE("step: driving into an object pushes it to contact distance") {
  PlanarWorld w(env::default_config(Task::Push));
  w.reset(3);
  // place the gripper left of the object, goal out of the way
  w.set_state({0.30, 0.5}, {{0.40, 0.5}}, {{0.8, 0.8}});
  for (int k = 0; k < 8; ++k) w.step(Eigen::Vector2d(1.0, 0.0));
  env::Observation o = w.observe();
  const double dist = (o.gripper - o.achieved[0]).norm();
  CHECK(dist == doctest::Approx(w.config().object_radius).epsilon(1e-9));
  // displaced along the motion axis only
  CHECK(o.achieved[0].y() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(o.achieved[0].x() > 0.40);
}

TEST_CASE("step: boundary clamps the gripper at the workspace edge") {
  PlanarWorld w(env::default_config(Task::Push));
  w.reset(5);
  w.set_state({0.02, 0.5}, {{0.8, 0.8}}, {{0.6, 0.2}});
  for (int k = 0; k < 3; ++k) w.step(Eigen::Vector2d(-1.0, 0.0));
  CHECK(w.observe().gripper.x() == 0.0);
}

TEST_CASE("step: episode terminates after exactly T steps") {
  EnvConfig cfg = env::default_config(Task::Push);
  cfg.horizon = 5;
  PlanarWorld w(cfg);
  w.reset(11);
  for (int t = 0; t < 4; ++t) {
    auto [o, done] = w.step(Eigen::Vector2d(0.1, 0.1));
    CHECK_FALSE(done);
  }
  auto [o, done] = w.step(Eigen::Vector2d(0.1, 0.1));
  CHECK(done);
  CHECK_THROWS_AS((void)w.step(Eigen::Vector2d::Zero()), std::logic_error);
}

TEST_CASE("compute_reward: sparse threshold semantics") {
  Eigen::Vector2d p(0.4, 0.4);
  CHECK(env::compute_reward(p, p, 0.05) == 0.0);
  CHECK(env::compute_reward({0.4, 0.4}, {0.5, 0.4}, 0.05) == -1.0);
  // boundary: distance exactly tol fails (strict inequality); dyadic values
  // keep the distance representable
  CHECK(env::compute_reward({0.5, 0.4}, {0.5625, 0.4}, 0.0625) == -1.0);
  CHECK(env::compute_reward({0.5, 0.4}, {0.5624, 0.4}, 0.0625) == 0.0);
}

TEST_CASE("is_success: all objects must be at their goals") {
  PlanarWorld w(env::default_config(Task::DPush));
  w.reset(2);
  w.set_state({0.1, 0.1}, {{0.4, 0.4}, {0.6, 0.6}}, {{0.4, 0.4}, {0.6, 0.6}});
  env::Observation o = w.observe();
  CHECK(env::is_success(o, 0.05));
  w.set_state({0.1, 0.1}, {{0.4, 0.4}, {0.6, 0.6}}, {{0.4, 0.4}, {0.9, 0.6}});
  CHECK_FALSE(env::is_success(w.observe(), 0.05));
}

TEST_CASE("is_success agrees with per-object rewards") {
  PlanarWorld w(env::default_config(Task::DPush));
  Rng rng(77);
  for (int trial = 0; trial < 500; ++trial) {
    env::Observation o = w.reset(1000 + trial);
    // randomly teleport objects, sometimes onto their goals
    std::vector<Eigen::Vector2d> objs = o.achieved;
    for (size_t i = 0; i < objs.size(); ++i)
      if (rng.uniform() < 0.5)
        objs[i] = o.desired[i] + Eigen::Vector2d(rng.normal(0.03), rng.normal(0.03));
    w.set_state(o.gripper, objs, o.desired);
    env::Observation s = w.observe();
    bool all_zero = true;
    for (size_t i = 0; i < s.achieved.size(); ++i)
      if (env::compute_reward(s.achieved[i], s.desired[i], 0.05) != 0.0) all_zero = false;
    CHECK(env::is_success(s, 0.05) == all_zero);
  }
}

TEST_CASE("containment and contact: random action fuzz keeps invariants") {
  for (Task task : {Task::TPush, Task::ObstaclePush}) {
    PlanarWorld w(env::default_config(task));
    Rng rng(13);
    for (int ep = 0; ep < 20; ++ep) {
      w.reset(500 + ep);
      bool done = false;
      while (!done) {
        Eigen::Vector2d a(rng.uniform(-1, 1), rng.uniform(-1, 1));
        auto [o, d] = w.step(a);
        done = d;
        REQUIRE(o.gripper.x() >= 0.0);
        REQUIRE(o.gripper.x() <= 1.0);
        REQUIRE(o.gripper.y() >= 0.0);
        REQUIRE(o.gripper.y() <= 1.0);
        for (const auto& p : o.achieved) {
          REQUIRE(p.x() >= 0.0);
          REQUIRE(p.x() <= 1.0);
          REQUIRE(p.y() >= 0.0);
          REQUIRE(p.y() <= 1.0);
        }
        for (size_t i = 0; i < o.achieved.size(); ++i)
          for (size_t k = i + 1; k < o.achieved.size(); ++k)
            REQUIRE((o.achieved[i] - o.achieved[k]).norm() >=
                    2.0 * w.config().object_radius - 1e-9);
      }
    }
  }
}

TEST_CASE("obstacle: the wall blocks a straight crossing") {
  PlanarWorld w(env::default_config(Task::ObstaclePush));
  w.reset(1);
  w.set_state({0.45, 0.5}, {{0.2, 0.2}}, {{0.8, 0.8}});
  for (int k = 0; k < 5; ++k) w.step(Eigen::Vector2d(1.0, 0.0));
  // the gripper must still be on the left side of the wall at x=0.5
  CHECK(w.observe().gripper.x() <= 0.5);

  // but going around (below y=0.35) is free
  w.set_state({0.45, 0.2}, {{0.2, 0.8}}, {{0.8, 0.8}});
  for (int k = 0; k < 5; ++k) w.step(Eigen::Vector2d(1.0, 0.0));
  CHECK(w.observe().gripper.x() > 0.5);
}

TEST_CASE("obstacle: objects cannot be pushed through the wall") {
  PlanarWorld w(env::default_config(Task::ObstaclePush));
  w.reset(1);
  const double r = w.config().object_radius;
  w.set_state({0.40, 0.5}, {{0.46, 0.5}}, {{0.8, 0.8}});
  for (int k = 0; k < 10; ++k) w.step(Eigen::Vector2d(1.0, 0.0));
  env::Observation o = w.observe();
  CHECK(o.achieved[0].x() <= 0.5 - r + 1e-9);
}

TEST_CASE("velocities are per-step position differences") {
  PlanarWorld w(env::default_config(Task::Push));
  w.reset(9);
  env::Observation before = w.observe();
  auto [after, done] = w.step(Eigen::Vector2d(0.5, -0.25));
  Eigen::Vector2d vel = after.obs.segment<2>(2);
  CHECK(vel == (after.gripper - before.gripper));
}

TEST_CASE("trace export emits one JSON line per step") {
  PlanarWorld w(env::default_config(Task::Push));
  std::ostringstream trace;
  w.enable_trace(&trace);
  w.reset(4);
  w.step(Eigen::Vector2d(0.3, 0.3));
  w.step(Eigen::Vector2d(-0.3, 0.1));
  std::string text = trace.str();
  int lines = 0;
  for (char c : text) lines += (c == '\n');
  CHECK(lines == 2);
  CHECK(text.find("\"gripper\"") != std::string::npos);
  CHECK(text.find("\"rewards\"") != std::string::npos);
}
