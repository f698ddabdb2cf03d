#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace rher::env {

enum class Task { Reach, Push, ObstaclePush, DPush, TPush };

Task task_from_name(const std::string& name);
std::string task_name(Task t);
int object_count(Task t);      // 1, 1, 1, 2, 3
int default_horizon(Task t);   // 50, 50, 50, 60, 70

struct EnvConfig {
  Task task = Task::Push;
  int horizon = 50;
  double success_tol = 0.05;
  double max_step = 0.05;
  double object_radius = 0.025;
};

EnvConfig default_config(Task t);

// One goal-conditioned observation snapshot.
struct Observation {
  Eigen::VectorXd obs;                    // gripper pos+vel, per object pos, vel, rel
  Eigen::Vector2d gripper;                // achieved gripper position (copy of obs[0:2])
  std::vector<Eigen::Vector2d> achieved;  // per-object achieved goals (positions)
  std::vector<Eigen::Vector2d> desired;   // per-object desired goals
};

int observation_dim(int n_objects);  // 4 + 6N

// Axis-aligned wall segment. axis 0: vertical line x=coord, y in [lo,hi];
// axis 1: horizontal line y=coord, x in [lo,hi].
struct Wall {
  int axis = 0;
  double coord = 0.5;
  double lo = 0.0;
  double hi = 1.0;
};

// r(achieved, desired): 0 if ||achieved - desired|| < tol, else -1.
double compute_reward(const Eigen::Vector2d& achieved, const Eigen::Vector2d& desired,
                      double tol);

bool object_success(const Observation& o, int index, double tol);
bool is_success(const Observation& o, double tol);  // every object at its goal

// Deterministic planar kinematic world: a point gripper pushes disk objects
// inside the unit workspace. No friction, mass, or rotation; penetrations are
// resolved by projection, walls and the workspace boundary block motion.
class PlanarWorld {
 public:
  explicit PlanarWorld(const EnvConfig& cfg);

  Observation reset(uint64_t seed);
  std::pair<Observation, bool> step(const Eigen::Vector2d& action);

  Observation observe() const;
  int steps_taken() const { return step_count_; }
  int horizon() const { return cfg_.horizon; }
  int num_objects() const { return n_; }
  const EnvConfig& config() const { return cfg_; }
  const std::vector<Wall>& walls() const { return walls_; }

  // Direct state injection for diagnostics and replay tooling.
  void set_state(const Eigen::Vector2d& gripper,
                 const std::vector<Eigen::Vector2d>& objects,
                 const std::vector<Eigen::Vector2d>& goals);

  // Appends one line-delimited JSON record per step to the given stream.
  void enable_trace(std::ostream* out) { trace_ = out; }

 private:
  void resolve_contacts();
  void write_trace_line(const Eigen::Vector2d& action) const;

  EnvConfig cfg_;
  int n_ = 1;
  std::vector<Wall> walls_;
  Eigen::Vector2d gripper_{0.5, 0.5};
  Eigen::Vector2d gripper_vel_{0.0, 0.0};
  std::vector<Eigen::Vector2d> objects_;
  std::vector<Eigen::Vector2d> object_vel_;
  std::vector<Eigen::Vector2d> goals_;
  int step_count_ = 0;
  std::ostream* trace_ = nullptr;
};

}  // namespace rher::env
