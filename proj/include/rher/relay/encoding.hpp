#pragma once

#include <Eigen/Dense>

#include "rher/env/planar.hpp"

namespace rher::relay {

// Sequential-task layout for N objects: 2N stages, goal vectors of one
// gripper slot plus N object slots (2 coordinates each).
struct TaskLayout {
  int objects = 1;             // N
  int stages = 2;              // M = 2N
  int goal_dim = 4;            // 2 * (N + 1)
  double dist_threshold = 0.05;  // gripper-object proximity threshold d
  double tol = 0.05;             // per-object success tolerance

  static TaskLayout make(int n_objects, double dist_threshold, double tol);
};

// Stage index j in [1, 2N]. Let i be the first object not at its goal
// (i = N when all are solved): j = 2i-1 while the gripper is farther than
// dist_threshold from object i, else j = 2i.
int detect_stage(const env::Observation& o, const TaskLayout& layout);

// Goal-space encoding for sub-task j built from the current observation.
// Odd j=2i-1: [ag^i | dg^1..dg^{i-1} | 0 | ag^{i+1}..ag^N]
// Even j=2i:  [0    | dg^1..dg^i     |     ag^{i+1}..ag^N]
Eigen::VectorXd encode_goal(int j, const env::Observation& o, const TaskLayout& layout);

// Hindsight variant of encode_goal built from a future state: desired slots
// are replaced by what was actually achieved there (gripper position for the
// reach slot, object positions elsewhere).
Eigen::VectorXd encode_hindsight_from(int j, const env::Observation& future,
                                      const TaskLayout& layout);

// Sparse sub-task reward of `next` against an encoding for sub-task j.
// Odd j: gripper must be within tol of the gripper slot and every encoded
// object slot must hold; even j: every encoded object slot must hold.
// Returns 0 on success, -1 otherwise.
double reward_for_subtask(int j, const env::Observation& next,
                          const Eigen::Ref<const Eigen::VectorXd>& encoding,
                          const TaskLayout& layout);

// Index of the zero slot for sub-task j: 0 for even j (gripper slot),
// ceil(j/2) for odd j (object slot i).
int zero_slot(int j);

}  // namespace rher::relay
