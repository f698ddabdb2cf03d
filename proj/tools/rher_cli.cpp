#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "rher/train/checkpoint.hpp"
#include "rher/train/config.hpp"
#include "rher/train/metrics.hpp"
#include "rher/train/plot.hpp"
#include "rher/train/trainer.hpp"

using namespace rher;

namespace {

int cmd_train(const std::string& config_path, const std::string& env_name,
              bool seed_set, uint64_t seed, bool alpha_set, double alpha,
              bool beta_set, double beta, bool dist_set, double dist,
              bool baseline, const std::string& out_dir, int epochs,
              double stop_success) {
  train::TrainConfig cfg;
  if (!env_name.empty() && config_path.empty()) {
    cfg = train::config_for_task(env::task_from_name(env_name));
  } else if (!config_path.empty()) {
    cfg = train::load_config_file(config_path);
    if (!env_name.empty()) {
      // --env switches the task but keeps explicit file settings
      const auto task = env::task_from_name(env_name);
      const auto task_defaults = train::config_for_task(task);
      cfg.env.task = task;
      cfg.env.horizon = task_defaults.env.horizon;
    }
  } else {
    cfg = train::config_for_task(env::Task::Push);
  }
  if (seed_set) cfg.seed = seed;
  if (alpha_set) cfg.sges.alpha = alpha;
  if (beta_set) cfg.sges.beta = beta;
  if (dist_set) cfg.dist_threshold = dist;
  if (baseline) cfg.baseline_her = true;
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (epochs > 0) cfg.epochs = epochs;
  if (stop_success > 0) cfg.stop_success = stop_success;
  if (cfg.out_dir.empty())
    cfg.out_dir = "runs/" + env::task_name(cfg.env.task) + "_seed" + std::to_string(cfg.seed);

  std::cout << "training " << env::task_name(cfg.env.task) << " seed " << cfg.seed
            << (cfg.baseline_her ? " (baseline HER mode)" : "") << "\n"
            << "output: " << cfg.out_dir << "\n";
  train::TrainResult result = train::run_training(cfg, &std::cout);
  std::cout << "done: " << result.episodes_run << " episodes"
            << (result.stopped_early ? " (stopped at success threshold)" : "") << "\n";
  return 0;
}

int cmd_eval(const std::string& checkpoint_path, int episodes, uint64_t seed,
             const std::string& trace_path) {
  train::TrainerSnapshot snap = train::load_checkpoint(checkpoint_path);
  const auto& cfg = snap.config;
  const auto layout = relay::TaskLayout::make(env::object_count(cfg.env.task),
                                              cfg.dist_threshold, cfg.env.success_tol);
  std::cout << "checkpoint: " << checkpoint_path << " (" << env::task_name(cfg.env.task)
            << ", epoch " << snap.epoch << ")\n";
  for (int j = 1; j <= layout.stages; ++j) {
    const double rate = train::evaluate_agent(*snap.agent, cfg.env, layout, j, episodes,
                                              derive_seed(seed, 0xE, j));
    std::cout << "subtask " << j << " success " << rate << "\n";
  }
  if (!trace_path.empty()) {
    std::ofstream trace(trace_path, std::ios::trunc);
    if (!trace) {
      std::cerr << "cannot open trace output: " << trace_path << "\n";
      return 1;
    }
    env::PlanarWorld world(cfg.env);
    world.enable_trace(&trace);
    env::Observation obs = world.reset(derive_seed(seed, 0x17));
    bool done = false;
    while (!done) {
      Eigen::VectorXd a = snap.agent->policy_single(
          obs.obs, relay::encode_goal(layout.stages, obs, layout));
      auto [next, d] = world.step(Eigen::Vector2d(a[0], a[1]));
      obs = std::move(next);
      done = d;
    }
    std::cout << "trace written to " << trace_path << "\n";
  }
  return 0;
}

int cmd_plot(const std::string& metrics_path, const std::string& out_path) {
  const auto rows = train::load_metrics_csv(metrics_path);
  train::write_success_plot_svg(rows, out_path);
  std::cout << "wrote " << out_path << " (" << rows.size() << " epochs)\n";
  return 0;
}

int cmd_inspect(const std::string& checkpoint_path) {
  train::TrainerSnapshot snap = train::load_checkpoint(checkpoint_path);
  std::cout << "checkpoint version " << train::kCheckpointVersion << "\n"
            << "epoch " << snap.epoch << ", cumulative steps " << snap.steps << "\n"
            << "guide index " << snap.tracker.guide_index << ", test success [";
  for (size_t i = 0; i < snap.tracker.test_success.size(); ++i)
    std::cout << (i ? " " : "") << snap.tracker.test_success[i];
  std::cout << "]\n\nparameters:\n";
  for (const auto& p : snap.agent->named_params()) {
    Eigen::Map<Eigen::VectorXd> v(p.data, p.size());
    std::cout << "  " << p.name << "  [" << p.rows << "x" << p.cols
              << "]  |mean| " << v.cwiseAbs().mean() << "\n";
  }
  std::cout << "\nconfig:\n" << train::serialize_config(snap.config);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"goal-conditioned relay RL trainer for planar manipulation tasks"};
  app.require_subcommand(1);

  // train
  auto* train_cmd = app.add_subcommand("train", "run a training session");
  std::string config_path, env_name, out_dir;
  uint64_t seed = 0;
  double alpha = 0, beta = 0, dist = 0, stop_success = 0;
  int epochs = 0;
  bool baseline = false;
  auto* seed_opt = train_cmd->add_option("--seed", seed, "master seed");
  train_cmd->add_option("--config", config_path, "config file (key = value sections)");
  train_cmd->add_option("--env", env_name,
                        "task: PlanarReach, PlanarPush, PlanarObstaclePush, "
                        "PlanarDPush, PlanarTPush");
  auto* alpha_opt = train_cmd->add_option("--alpha", alpha, "guide-policy probability");
  auto* beta_opt = train_cmd->add_option("--beta", beta, "random-policy probability");
  auto* dist_opt =
      train_cmd->add_option("--dist-threshold", dist, "gripper-object stage threshold");
  train_cmd->add_flag("--baseline-her", baseline,
                      "vanilla HER baseline: final-goal encoding only, no guidance");
  train_cmd->add_option("--out", out_dir, "output directory");
  train_cmd->add_option("--epochs", epochs, "override epoch count");
  train_cmd->add_option("--stop-at-success", stop_success,
                        "stop once final sub-task success reaches this rate");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
  std::string checkpoint_path, trace_path;
  int episodes = 20;
  uint64_t eval_seed = 12345;
  eval_cmd->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();
  eval_cmd->add_option("--episodes", episodes, "episodes per sub-task");
  eval_cmd->add_option("--seed", eval_seed, "evaluation seed");
  eval_cmd->add_option("--trace-out", trace_path, "write one episode trace (JSON lines)");

  // plot
  auto* plot_cmd = app.add_subcommand("plot", "plot success curves from a metrics CSV");
  std::string metrics_path, plot_out = "success.svg";
  plot_cmd->add_option("--metrics", metrics_path, "metrics.csv path")->required();
  plot_cmd->add_option("--out", plot_out, "output SVG path");

  // inspect
  auto* inspect_cmd = app.add_subcommand("inspect", "print checkpoint contents");
  std::string inspect_path;
  inspect_cmd->add_option("--checkpoint", inspect_path, "checkpoint file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (train_cmd->parsed())
      return cmd_train(config_path, env_name, seed_opt->count() > 0, seed,
                       alpha_opt->count() > 0, alpha, beta_opt->count() > 0, beta,
                       dist_opt->count() > 0, dist, baseline, out_dir, epochs,
                       stop_success);
    if (eval_cmd->parsed()) return cmd_eval(checkpoint_path, episodes, eval_seed, trace_path);
    if (plot_cmd->parsed()) return cmd_plot(metrics_path, plot_out);
    if (inspect_cmd->parsed()) return cmd_inspect(inspect_path);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
