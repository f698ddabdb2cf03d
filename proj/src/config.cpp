#include "rher/train/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rher::train {

TrainConfig config_for_task(env::Task task) {
  TrainConfig cfg;
  cfg.env = env::default_config(task);
  if (env::object_count(task) > 1) {
    cfg.agent.td3 = true;
    cfg.sges.sr = 0.8;
    cfg.batch_size = 2048;
  }
  return cfg;
}

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument("config: bad boolean for " + key + ": '" + v + "'");
}

std::vector<int> parse_int_list(const std::string& v) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(std::stoi(item));
  }
  return out;
}

std::string join_int_list(const std::vector<int>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(v[i]);
  }
  return s;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

TrainConfig parse_config_text(const std::string& text) {
  TrainConfig cfg;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::invalid_argument("config line " + std::to_string(lineno) +
                                    ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    const std::string qual = section + "." + key;

    if (qual == "env.task") cfg.env.task = env::task_from_name(val);
    else if (qual == "env.horizon") cfg.env.horizon = std::stoi(val);
    else if (qual == "env.success_tol") cfg.env.success_tol = std::stod(val);
    else if (qual == "env.max_step") cfg.env.max_step = std::stod(val);
    else if (qual == "env.object_radius") cfg.env.object_radius = std::stod(val);
    else if (qual == "layout.dist_threshold") cfg.dist_threshold = std::stod(val);
    else if (qual == "sges.alpha") cfg.sges.alpha = std::stod(val);
    else if (qual == "sges.beta") cfg.sges.beta = std::stod(val);
    else if (qual == "sges.sr") cfg.sges.sr = std::stod(val);
    else if (qual == "sges.noise_std") cfg.sges.noise_std = std::stod(val);
    else if (qual == "agent.hidden") cfg.agent.hidden = parse_int_list(val);
    else if (qual == "agent.actor_lr") cfg.agent.actor_lr = std::stod(val);
    else if (qual == "agent.critic_lr") cfg.agent.critic_lr = std::stod(val);
    else if (qual == "agent.gamma") cfg.agent.gamma = std::stod(val);
    else if (qual == "agent.polyak_tau") cfg.agent.polyak_tau = std::stod(val);
    else if (qual == "agent.action_l2") cfg.agent.action_l2 = std::stod(val);
    else if (qual == "agent.normalizer_clip") cfg.agent.normalizer_clip = std::stod(val);
    else if (qual == "agent.td3") cfg.agent.td3 = parse_bool(val, qual);
    else if (qual == "agent.td3_smoothing_std") cfg.agent.td3_smoothing_std = std::stod(val);
    else if (qual == "agent.td3_smoothing_clip") cfg.agent.td3_smoothing_clip = std::stod(val);
    else if (qual == "agent.td3_actor_delay") cfg.agent.td3_actor_delay = std::stoi(val);
    else if (qual == "train.epochs") cfg.epochs = std::stoi(val);
    else if (qual == "train.episodes_per_epoch") cfg.episodes_per_epoch = std::stoi(val);
    else if (qual == "train.optimization_steps") cfg.optimization_steps = std::stoi(val);
    else if (qual == "train.batch_size") cfg.batch_size = std::stoi(val);
    else if (qual == "train.eval_episodes") cfg.eval_episodes = std::stoi(val);
    else if (qual == "train.p_future") cfg.p_future = std::stod(val);
    else if (qual == "train.buffer_capacity") cfg.buffer_capacity = std::stoull(val);
    else if (qual == "train.seed") cfg.seed = std::stoull(val);
    else if (qual == "train.out_dir") cfg.out_dir = val;
    else if (qual == "train.baseline_her") cfg.baseline_her = parse_bool(val, qual);
    else if (qual == "train.stop_success") cfg.stop_success = std::stod(val);
    else if (qual == "train.min_epochs") cfg.min_epochs = std::stoi(val);
    else if (qual == "train.checkpoint_every") cfg.checkpoint_every = std::stoi(val);
    else
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": unknown key '" + qual + "'");
  }
  return cfg;
}

TrainConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string serialize_config(const TrainConfig& cfg) {
  std::ostringstream os;
  os << "[env]\n";
  os << "task = " << env::task_name(cfg.env.task) << "\n";
  os << "horizon = " << cfg.env.horizon << "\n";
  os << "success_tol = " << format_double(cfg.env.success_tol) << "\n";
  os << "max_step = " << format_double(cfg.env.max_step) << "\n";
  os << "object_radius = " << format_double(cfg.env.object_radius) << "\n";
  os << "\n[layout]\n";
  os << "dist_threshold = " << format_double(cfg.dist_threshold) << "\n";
  os << "\n[sges]\n";
  os << "alpha = " << format_double(cfg.sges.alpha) << "\n";
  os << "beta = " << format_double(cfg.sges.beta) << "\n";
  os << "sr = " << format_double(cfg.sges.sr) << "\n";
  os << "noise_std = " << format_double(cfg.sges.noise_std) << "\n";
  os << "\n[agent]\n";
  os << "hidden = " << join_int_list(cfg.agent.hidden) << "\n";
  os << "actor_lr = " << format_double(cfg.agent.actor_lr) << "\n";
  os << "critic_lr = " << format_double(cfg.agent.critic_lr) << "\n";
  os << "gamma = " << format_double(cfg.agent.gamma) << "\n";
  os << "polyak_tau = " << format_double(cfg.agent.polyak_tau) << "\n";
  os << "action_l2 = " << format_double(cfg.agent.action_l2) << "\n";
  os << "normalizer_clip = " << format_double(cfg.agent.normalizer_clip) << "\n";
  os << "td3 = " << (cfg.agent.td3 ? "true" : "false") << "\n";
  os << "td3_smoothing_std = " << format_double(cfg.agent.td3_smoothing_std) << "\n";
  os << "td3_smoothing_clip = " << format_double(cfg.agent.td3_smoothing_clip) << "\n";
  os << "td3_actor_delay = " << cfg.agent.td3_actor_delay << "\n";
  os << "\n[train]\n";
  os << "epochs = " << cfg.epochs << "\n";
  os << "episodes_per_epoch = " << cfg.episodes_per_epoch << "\n";
  os << "optimization_steps = " << cfg.optimization_steps << "\n";
  os << "batch_size = " << cfg.batch_size << "\n";
  os << "eval_episodes = " << cfg.eval_episodes << "\n";
  os << "p_future = " << format_double(cfg.p_future) << "\n";
  os << "buffer_capacity = " << cfg.buffer_capacity << "\n";
  os << "seed = " << cfg.seed << "\n";
  os << "out_dir = " << cfg.out_dir << "\n";
  os << "baseline_her = " << (cfg.baseline_her ? "true" : "false") << "\n";
  os << "stop_success = " << format_double(cfg.stop_success) << "\n";
  os << "min_epochs = " << cfg.min_epochs << "\n";
  os << "checkpoint_every = " << cfg.checkpoint_every << "\n";
  return os.str();
}

}  // namespace rher::train
