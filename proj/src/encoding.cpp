#include "rher/relay/encoding.hpp"

#include <stdexcept>
#include <string>

namespace rher::relay {

TaskLayout TaskLayout::make(int n_objects, double dist_threshold, double tol) {
  if (n_objects < 1 || n_objects > 3)
    throw std::invalid_argument("TaskLayout: object count must be 1, 2 or 3");
  if (dist_threshold < 0.0)
    throw std::invalid_argument("TaskLayout: dist_threshold must be non-negative");
  if (tol <= 0.0) throw std::invalid_argument("TaskLayout: tol must be positive");
  TaskLayout l;
  l.objects = n_objects;
  l.stages = 2 * n_objects;
  l.goal_dim = 2 * (n_objects + 1);
  l.dist_threshold = dist_threshold;
  l.tol = tol;
  return l;
}

static void check_subtask(int j, const TaskLayout& layout, const char* where) {
  if (j < 1 || j > layout.stages)
    throw std::out_of_range(std::string(where) + ": sub-task index " + std::to_string(j) +
                            " outside [1, " + std::to_string(layout.stages) + "]");
}

int detect_stage(const env::Observation& o, const TaskLayout& layout) {
  if (static_cast<int>(o.achieved.size()) != layout.objects)
    throw std::invalid_argument("detect_stage: observation does not match layout");
  int first_unsolved = layout.objects;  // 1-based; N when everything is solved
  for (int m = 1; m <= layout.objects; ++m) {
    if ((o.achieved[m - 1] - o.desired[m - 1]).norm() >= layout.tol) {
      first_unsolved = m;
      break;
    }
  }
  const double dist = (o.gripper - o.achieved[first_unsolved - 1]).norm();
  return (dist > layout.dist_threshold) ? (2 * first_unsolved - 1) : (2 * first_unsolved);
}

int zero_slot(int j) { return (j % 2 == 1) ? (j + 1) / 2 : 0; }

Eigen::VectorXd encode_goal(int j, const env::Observation& o, const TaskLayout& layout) {
  check_subtask(j, layout, "encode_goal");
  const int i = (j + 1) / 2;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(layout.goal_dim);
  if (j % 2 == 1) {
    g.segment<2>(0) = o.achieved[i - 1];  // reach target: object i's position
  }                                       // even j: gripper slot stays zero
  for (int m = 1; m <= layout.objects; ++m) {
    auto slot = g.segment<2>(2 * m);
    if (j % 2 == 1 && m == i) continue;  // zero identity slot
    if (m < i || (j % 2 == 0 && m == i)) {
      slot = o.desired[m - 1];
    } else {
      slot = o.achieved[m - 1];  // keep later objects where they are
    }
  }
  return g;
}

Eigen::VectorXd encode_hindsight_from(int j, const env::Observation& future,
                                      const TaskLayout& layout) {
  check_subtask(j, layout, "encode_hindsight_from");
  const int i = (j + 1) / 2;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(layout.goal_dim);
  if (j % 2 == 1) {
    g.segment<2>(0) = future.gripper;
  }
  for (int m = 1; m <= layout.objects; ++m) {
    if (j % 2 == 1 && m == i) continue;
    g.segment<2>(2 * m) = future.achieved[m - 1];
  }
  return g;
}

double reward_for_subtask(int j, const env::Observation& next,
                          const Eigen::Ref<const Eigen::VectorXd>& encoding,
                          const TaskLayout& layout) {
  check_subtask(j, layout, "reward_for_subtask");
  if (encoding.size() != layout.goal_dim)
    throw std::invalid_argument("reward_for_subtask: encoding does not match layout");
  const int i = (j + 1) / 2;
  if (j % 2 == 1) {
    if ((next.gripper - encoding.segment<2>(0)).norm() >= layout.tol) return -1.0;
  }
  for (int m = 1; m <= layout.objects; ++m) {
    if (j % 2 == 1 && m == i) continue;  // identity slot carries no target
    if ((next.achieved[m - 1] - encoding.segment<2>(2 * m)).norm() >= layout.tol)
      return -1.0;
  }
  return 0.0;
}

}  // namespace rher::relay
