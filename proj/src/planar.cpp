#include "rher/env/planar.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "json.hpp"
#include "rher/rng.hpp"

namespace rher::env {

namespace {

constexpr double kPointMargin = 1e-9;  // keeps a point's wall side well-defined

Eigen::Vector2d clamp_box(const Eigen::Vector2d& p, double margin) {
  return {std::clamp(p.x(), margin, 1.0 - margin), std::clamp(p.y(), margin, 1.0 - margin)};
}

Eigen::Vector2d wall_closest(const Wall& w, const Eigen::Vector2d& p) {
  if (w.axis == 0) return {w.coord, std::clamp(p.y(), w.lo, w.hi)};
  return {std::clamp(p.x(), w.lo, w.hi), w.coord};
}

double wall_distance(const Wall& w, const Eigen::Vector2d& p) {
  return (p - wall_closest(w, p)).norm();
}

// Blocks a center path from `from` to `to` that would cross the wall segment
// (inflated by r): the normal coordinate is clamped at the surface on the
// incoming side, the tangential coordinate keeps sliding.
Eigen::Vector2d block_crossing(const Wall& w, const Eigen::Vector2d& from,
                               Eigen::Vector2d to, double r) {
  const int n = (w.axis == 0) ? 0 : 1;
  const int t = 1 - n;
  const double pn = from[n] - w.coord;
  const double qn = to[n] - w.coord;
  const double side = (pn >= 0.0) ? 1.0 : -1.0;
  if (side * qn >= r) return to;  // stays clear on the incoming side
  const double denom = qn - pn;
  double s = 0.0;
  if (std::abs(denom) > 1e-300) s = std::clamp((side * r - pn) / denom, 0.0, 1.0);
  const double tang_at_cross = from[t] + s * (to[t] - from[t]);
  if (tang_at_cross > w.lo - r && tang_at_cross < w.hi + r) {
    to[n] = w.coord + side * r;
  }
  return to;
}

// Static resolution: if the disk still overlaps the segment (end caps after
// clamping etc.), push it out along the contact normal.
Eigen::Vector2d push_out(const Wall& w, const Eigen::Vector2d& prev,
                         Eigen::Vector2d pos, double r) {
  const Eigen::Vector2d c = wall_closest(w, pos);
  const Eigen::Vector2d d = pos - c;
  const double dist = d.norm();
  if (dist >= r) return pos;
  Eigen::Vector2d normal;
  if (dist > 1e-12) {
    normal = d / dist;
  } else {
    const int ax = (w.axis == 0) ? 0 : 1;
    normal = Eigen::Vector2d::Zero();
    normal[ax] = (prev[ax] >= w.coord) ? 1.0 : -1.0;
  }
  return c + normal * r;
}

}  // namespace

Task task_from_name(const std::string& name) {
  if (name == "PlanarReach") return Task::Reach;
  if (name == "PlanarPush") return Task::Push;
  if (name == "PlanarObstaclePush") return Task::ObstaclePush;
  if (name == "PlanarDPush") return Task::DPush;
  if (name == "PlanarTPush") return Task::TPush;
  throw std::invalid_argument(
      "unknown task '" + name +
      "' (expected PlanarReach, PlanarPush, PlanarObstaclePush, PlanarDPush or PlanarTPush)");
}

std::string task_name(Task t) {
  switch (t) {
    case Task::Reach: return "PlanarReach";
    case Task::Push: return "PlanarPush";
    case Task::ObstaclePush: return "PlanarObstaclePush";
    case Task::DPush: return "PlanarDPush";
    case Task::TPush: return "PlanarTPush";
  }
  throw std::logic_error("task_name: invalid task");
}

int object_count(Task t) {
  switch (t) {
    case Task::Reach:
    case Task::Push:
    case Task::ObstaclePush: return 1;
    case Task::DPush: return 2;
    case Task::TPush: return 3;
  }
  throw std::logic_error("object_count: invalid task");
}

int default_horizon(Task t) {
  switch (t) {
    case Task::DPush: return 60;
    case Task::TPush: return 70;
    default: return 50;
  }
}

EnvConfig default_config(Task t) {
  EnvConfig cfg;
  cfg.task = t;
  cfg.horizon = default_horizon(t);
  return cfg;
}

int observation_dim(int n_objects) { return 4 + 6 * n_objects; }

double compute_reward(const Eigen::Vector2d& achieved, const Eigen::Vector2d& desired,
                      double tol) {
  if (!achieved.allFinite() || !desired.allFinite())
    throw std::invalid_argument("compute_reward: non-finite input");
  return ((achieved - desired).norm() < tol) ? 0.0 : -1.0;
}

bool object_success(const Observation& o, int index, double tol) {
  return compute_reward(o.achieved.at(index), o.desired.at(index), tol) == 0.0;
}

bool is_success(const Observation& o, double tol) {
  for (size_t i = 0; i < o.achieved.size(); ++i)
    if (!object_success(o, static_cast<int>(i), tol)) return false;
  return true;
}

PlanarWorld::PlanarWorld(const EnvConfig& cfg) : cfg_(cfg), n_(object_count(cfg.task)) {
  if (cfg.horizon < 1) throw std::invalid_argument("EnvConfig: horizon must be >= 1");
  if (cfg.success_tol <= 0.0) throw std::invalid_argument("EnvConfig: success_tol must be > 0");
  if (cfg.max_step <= 0.0) throw std::invalid_argument("EnvConfig: max_step must be > 0");
  if (cfg.object_radius <= 0.0 || cfg.object_radius >= 0.5)
    throw std::invalid_argument("EnvConfig: object_radius out of range");
  if (cfg.task == Task::ObstaclePush) {
    walls_.push_back(Wall{0, 0.5, 0.35, 0.65});
  }
  objects_.assign(n_, Eigen::Vector2d(0.25, 0.5));
  object_vel_.assign(n_, Eigen::Vector2d::Zero());
  goals_.assign(n_, Eigen::Vector2d(0.75, 0.5));
}

Observation PlanarWorld::reset(uint64_t seed) {
  Rng rng(seed);
  const double r = cfg_.object_radius;
  const double wall_clear = r + 1e-6;

  for (int attempt = 0; attempt < 1000; ++attempt) {
    Eigen::Vector2d grip(rng.uniform(), rng.uniform());
    std::vector<Eigen::Vector2d> objs(n_), goals(n_);
    for (int i = 0; i < n_; ++i)
      objs[i] = {rng.uniform(r, 1.0 - r), rng.uniform(r, 1.0 - r)};
    for (int i = 0; i < n_; ++i)
      goals[i] = {rng.uniform(r, 1.0 - r), rng.uniform(r, 1.0 - r)};

    std::vector<Eigen::Vector2d> all;
    all.push_back(grip);
    all.insert(all.end(), objs.begin(), objs.end());
    all.insert(all.end(), goals.begin(), goals.end());
    bool ok = true;
    for (size_t a = 0; a < all.size() && ok; ++a)
      for (size_t b = a + 1; b < all.size() && ok; ++b)
        if ((all[a] - all[b]).norm() < 2.0 * r) ok = false;
    for (int i = 0; i < n_ && ok; ++i)
      if ((goals[i] - objs[i]).norm() < cfg_.success_tol) ok = false;
    for (const Wall& w : walls_) {
      if (!ok) break;
      if (wall_distance(w, grip) < 1e-6) ok = false;
      for (int i = 0; i < n_ && ok; ++i)
        if (wall_distance(w, objs[i]) < wall_clear ||
            wall_distance(w, goals[i]) < wall_clear)
          ok = false;
    }
    if (!ok) continue;

    gripper_ = grip;
    gripper_vel_.setZero();
    objects_ = std::move(objs);
    object_vel_.assign(n_, Eigen::Vector2d::Zero());
    goals_ = std::move(goals);
    step_count_ = 0;
    return observe();
  }
  throw std::runtime_error(
      "PlanarWorld::reset: rejection sampling exceeded 1000 attempts (configuration error)");
}

void PlanarWorld::set_state(const Eigen::Vector2d& gripper,
                            const std::vector<Eigen::Vector2d>& objects,
                            const std::vector<Eigen::Vector2d>& goals) {
  if (static_cast<int>(objects.size()) != n_ || static_cast<int>(goals.size()) != n_)
    throw std::invalid_argument("PlanarWorld::set_state: object/goal count mismatch");
  gripper_ = gripper;
  gripper_vel_.setZero();
  objects_ = objects;
  object_vel_.assign(n_, Eigen::Vector2d::Zero());
  goals_ = goals;
  step_count_ = 0;
}

Observation PlanarWorld::observe() const {
  Observation o;
  o.obs.resize(observation_dim(n_));
  o.obs.segment<2>(0) = gripper_;
  o.obs.segment<2>(2) = gripper_vel_;
  for (int i = 0; i < n_; ++i) {
    const int base = 4 + 6 * i;
    o.obs.segment<2>(base) = objects_[i];
    o.obs.segment<2>(base + 2) = object_vel_[i];
    o.obs.segment<2>(base + 4) = objects_[i] - gripper_;
  }
  o.gripper = gripper_;
  o.achieved = objects_;
  o.desired = goals_;
  return o;
}

std::pair<Observation, bool> PlanarWorld::step(const Eigen::Vector2d& action) {
  if (step_count_ >= cfg_.horizon)
    throw std::logic_error("PlanarWorld::step: episode exhausted, call reset()");

  const Eigen::Vector2d a = action.cwiseMax(-1.0).cwiseMin(1.0);
  const Eigen::Vector2d old_gripper = gripper_;
  const std::vector<Eigen::Vector2d> old_objects = objects_;

  // Substep the motion below half an object radius so a moving gripper can
  // never tunnel through a disk between contact checks. Substeps advance from
  // the current position, so a blocked gripper does not jump past contacts.
  const Eigen::Vector2d disp = a * cfg_.max_step;
  const int substeps =
      std::max(1, static_cast<int>(std::ceil(disp.norm() / (0.5 * cfg_.object_radius))));
  const Eigen::Vector2d delta = disp / substeps;
  for (int s = 0; s < substeps; ++s) {
    Eigen::Vector2d target = clamp_box(gripper_ + delta, 0.0);
    for (const Wall& w : walls_) target = block_crossing(w, gripper_, target, kPointMargin);
    for (const Wall& w : walls_) target = push_out(w, gripper_, target, kPointMargin);
    gripper_ = clamp_box(target, 0.0);
    resolve_contacts();
  }

  gripper_vel_ = gripper_ - old_gripper;
  for (int i = 0; i < n_; ++i) object_vel_[i] = objects_[i] - old_objects[i];
  ++step_count_;
  const bool done = step_count_ >= cfg_.horizon;
  if (trace_ != nullptr) write_trace_line(a);
  return {observe(), done};
}

// Move a disk center toward `to`, honoring workspace box and walls.
// `from` disambiguates the wall side.
static Eigen::Vector2d admissible_disk_move(const std::vector<Wall>& walls,
                                            const Eigen::Vector2d& from,
                                            Eigen::Vector2d to, double r) {
  to = clamp_box(to, r);
  for (const Wall& w : walls) to = block_crossing(w, from, to, r);
  for (const Wall& w : walls) to = push_out(w, from, to, r);
  return clamp_box(to, r);
}

void PlanarWorld::resolve_contacts() {
  const double r = cfg_.object_radius;
  for (int pass = 0; pass < 64; ++pass) {
    bool dirty = false;

    // gripper penetrating an object: project the object out to contact
    for (int i = 0; i < n_; ++i) {
      const Eigen::Vector2d d = objects_[i] - gripper_;
      const double dist = d.norm();
      if (dist < r) {
        const Eigen::Vector2d normal =
            (dist > 1e-12) ? (d / dist).eval() : Eigen::Vector2d(1.0, 0.0);
        const Eigen::Vector2d before = objects_[i];
        objects_[i] = admissible_disk_move(walls_, before, gripper_ + normal * r, r);
        if ((objects_[i] - before).norm() > 1e-15) dirty = true;

        // object pinned (wall or boundary): the gripper yields instead
        const Eigen::Vector2d d2 = objects_[i] - gripper_;
        const double dist2 = d2.norm();
        if (dist2 < r) {
          const Eigen::Vector2d n2 = (dist2 > 1e-12) ? (d2 / dist2).eval() : normal;
          const Eigen::Vector2d grip_before = gripper_;
          gripper_ = clamp_box(objects_[i] - n2 * r, 0.0);
          for (const Wall& w : walls_)
            gripper_ = push_out(w, grip_before, gripper_, kPointMargin);
          if ((gripper_ - grip_before).norm() > 1e-15) dirty = true;
        }
      }
    }

    // object-object penetration: separate the pair symmetrically
    for (int i = 0; i < n_; ++i) {
      for (int k = i + 1; k < n_; ++k) {
        const Eigen::Vector2d d = objects_[k] - objects_[i];
        const double dist = d.norm();
        if (dist < 2.0 * r) {
          const Eigen::Vector2d normal = (dist > 1e-12) ? (d / dist).eval()
                                                        : Eigen::Vector2d(1.0, 0.0);
          const double push = (2.0 * r - dist) * 0.5;
          const Eigen::Vector2d bi = objects_[i];
          const Eigen::Vector2d bk = objects_[k];
          objects_[i] = admissible_disk_move(walls_, bi, bi - normal * push, r);
          objects_[k] = admissible_disk_move(walls_, bk, bk + normal * push, r);
          if ((objects_[i] - bi).norm() > 1e-15 || (objects_[k] - bk).norm() > 1e-15)
            dirty = true;
        }
      }
    }

    if (!dirty) break;
  }
}

void PlanarWorld::write_trace_line(const Eigen::Vector2d& action) const {
  nlohmann::json rec;
  rec["step"] = step_count_;
  rec["gripper"] = {gripper_.x(), gripper_.y()};
  nlohmann::json objs = nlohmann::json::array();
  nlohmann::json rewards = nlohmann::json::array();
  for (int i = 0; i < n_; ++i) {
    objs.push_back({objects_[i].x(), objects_[i].y()});
    rewards.push_back(compute_reward(objects_[i], goals_[i], cfg_.success_tol));
  }
  rec["objects"] = objs;
  rec["action"] = {action.x(), action.y()};
  rec["rewards"] = rewards;
  (*trace_) << rec.dump() << "\n";
}

}  // namespace rher::env
