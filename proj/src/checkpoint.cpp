#include "rher/train/checkpoint.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace rher::train {

namespace {

bool host_little_endian() {
  const uint16_t probe = 0x1;
  return reinterpret_cast<const char*>(&probe)[0] == 1;
}

template <typename T>
void write_le(std::ostream& out, T value) {
  if (!host_little_endian()) {
    auto* p = reinterpret_cast<unsigned char*>(&value);
    std::reverse(p, p + sizeof(T));
  }
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
  if (!out) throw std::runtime_error("checkpoint: write failed");
}

template <typename T>
T read_le(std::istream& in) {
  T value;
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  if (!host_little_endian()) {
    auto* p = reinterpret_cast<unsigned char*>(&value);
    std::reverse(p, p + sizeof(T));
  }
  return value;
}

void write_string(std::ostream& out, const std::string& s) {
  write_le<uint32_t>(out, static_cast<uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
  if (!out) throw std::runtime_error("checkpoint: write failed");
}

std::string read_string(std::istream& in) {
  const uint32_t len = read_le<uint32_t>(in);
  std::string s(len, '\0');
  in.read(s.data(), len);
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  return s;
}

void write_f64_array(std::ostream& out, const double* data, uint32_t n) {
  write_le<uint32_t>(out, n);
  for (uint32_t i = 0; i < n; ++i) write_le<double>(out, data[i]);
}

Eigen::VectorXd read_f64_vector(std::istream& in) {
  const uint32_t n = read_le<uint32_t>(in);
  Eigen::VectorXd v(n);
  for (uint32_t i = 0; i < n; ++i) v[i] = read_le<double>(in);
  return v;
}

void write_normalizer(std::ostream& out, const nn::Normalizer& n) {
  write_le<double>(out, n.raw_count());
  write_f64_array(out, n.raw_sum().data(), static_cast<uint32_t>(n.dim()));
  write_f64_array(out, n.raw_sumsq().data(), static_cast<uint32_t>(n.dim()));
  write_le<double>(out, n.clip_range());
}

void read_normalizer(std::istream& in, nn::Normalizer& n) {
  const double count = read_le<double>(in);
  Eigen::VectorXd sum = read_f64_vector(in);
  Eigen::VectorXd sumsq = read_f64_vector(in);
  const double clip = read_le<double>(in);
  n.restore(count, std::move(sum), std::move(sumsq), clip);
}

void write_adam(std::ostream& out, const nn::AdamState& s) {
  write_le<uint64_t>(out, static_cast<uint64_t>(s.step_count));
  write_le<double>(out, s.learning_rate);
  write_le<double>(out, s.beta1);
  write_le<double>(out, s.beta2);
  write_le<double>(out, s.epsilon);
  write_le<uint32_t>(out, static_cast<uint32_t>(s.m_w.size()));
  for (size_t l = 0; l < s.m_w.size(); ++l) {
    write_f64_array(out, s.m_w[l].data(), static_cast<uint32_t>(s.m_w[l].size()));
    write_f64_array(out, s.v_w[l].data(), static_cast<uint32_t>(s.v_w[l].size()));
    write_f64_array(out, s.m_b[l].data(), static_cast<uint32_t>(s.m_b[l].size()));
    write_f64_array(out, s.v_b[l].data(), static_cast<uint32_t>(s.v_b[l].size()));
  }
}

void read_adam(std::istream& in, nn::AdamState& s) {
  s.step_count = static_cast<long>(read_le<uint64_t>(in));
  s.learning_rate = read_le<double>(in);
  s.beta1 = read_le<double>(in);
  s.beta2 = read_le<double>(in);
  s.epsilon = read_le<double>(in);
  const uint32_t layers = read_le<uint32_t>(in);
  if (layers != s.m_w.size())
    throw std::runtime_error("checkpoint: optimizer state does not match network");
  for (uint32_t l = 0; l < layers; ++l) {
    auto fill = [&in](auto& dest) {
      Eigen::VectorXd v = read_f64_vector(in);
      if (v.size() != dest.size())
        throw std::runtime_error("checkpoint: optimizer moment shape mismatch");
      std::memcpy(dest.data(), v.data(), sizeof(double) * v.size());
    };
    fill(s.m_w[l]);
    fill(s.v_w[l]);
    fill(s.m_b[l]);
    fill(s.v_b[l]);
  }
}

}  // namespace

void save_checkpoint(const std::string& path, const TrainConfig& cfg,
                     agent::ActorCritic& agent, const agent::GuideTracker& tracker,
                     const std::string& rng_state, int epoch, long steps) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);

  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  write_le<uint32_t>(out, kCheckpointVersion);
  write_string(out, serialize_config(cfg));
  write_le<int32_t>(out, epoch);
  write_le<int64_t>(out, steps);

  write_normalizer(out, agent.obs_normalizer());
  write_normalizer(out, agent.goal_normalizer());

  const auto params = agent.named_params();
  write_le<uint32_t>(out, static_cast<uint32_t>(params.size()));
  for (const auto& p : params) {
    write_string(out, p.name);
    write_le<uint32_t>(out, static_cast<uint32_t>(p.rows));
    write_le<uint32_t>(out, static_cast<uint32_t>(p.cols));
    for (long i = 0; i < p.size(); ++i)
      write_le<float>(out, static_cast<float>(p.data[i]));
  }

  write_le<uint32_t>(out, agent.config().td3 ? 3u : 2u);
  write_adam(out, agent.actor_opt());
  write_adam(out, agent.critic_opt());
  if (agent.config().td3) write_adam(out, agent.critic2_opt());

  write_le<uint32_t>(out, static_cast<uint32_t>(tracker.test_success.size()));
  for (double r : tracker.test_success) write_le<double>(out, r);
  write_le<int32_t>(out, tracker.guide_index);

  write_string(out, rng_state);
  if (!out) throw std::runtime_error("checkpoint: write failed");
}

TrainerSnapshot load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);

  char magic[sizeof(kCheckpointMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0)
    throw std::runtime_error("checkpoint: bad magic bytes (not a checkpoint file)");
  const uint32_t version = read_le<uint32_t>(in);
  if (version != kCheckpointVersion)
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));

  TrainerSnapshot snap;
  snap.config = parse_config_text(read_string(in));
  snap.epoch = read_le<int32_t>(in);
  snap.steps = read_le<int64_t>(in);

  const int n = env::object_count(snap.config.env.task);
  const int obs_dim = env::observation_dim(n);
  const int goal_dim = 2 * (n + 1);
  snap.agent = std::make_unique<agent::ActorCritic>(obs_dim, goal_dim, 2,
                                                    snap.config.agent, /*init_seed=*/0);

  read_normalizer(in, snap.agent->obs_normalizer());
  read_normalizer(in, snap.agent->goal_normalizer());

  auto params = snap.agent->named_params();
  const uint32_t tensor_count = read_le<uint32_t>(in);
  if (tensor_count != params.size())
    throw std::runtime_error("checkpoint: tensor count does not match architecture");
  for (uint32_t i = 0; i < tensor_count; ++i) {
    const std::string name = read_string(in);
    const uint32_t rows = read_le<uint32_t>(in);
    const uint32_t cols = read_le<uint32_t>(in);
    if (name != params[i].name || rows != static_cast<uint32_t>(params[i].rows) ||
        cols != static_cast<uint32_t>(params[i].cols))
      throw std::runtime_error("checkpoint: tensor '" + name + "' does not match architecture");
    for (long k = 0; k < params[i].size(); ++k)
      params[i].data[k] = static_cast<double>(read_le<float>(in));
  }

  const uint32_t adam_count = read_le<uint32_t>(in);
  if (adam_count != (snap.config.agent.td3 ? 3u : 2u))
    throw std::runtime_error("checkpoint: optimizer count mismatch");
  read_adam(in, snap.agent->actor_opt());
  read_adam(in, snap.agent->critic_opt());
  if (snap.config.agent.td3) read_adam(in, snap.agent->critic2_opt());

  const uint32_t rates = read_le<uint32_t>(in);
  snap.tracker.test_success.resize(rates);
  for (uint32_t i = 0; i < rates; ++i) snap.tracker.test_success[i] = read_le<double>(in);
  snap.tracker.guide_index = read_le<int32_t>(in);

  snap.rng_state = read_string(in);
  return snap;
}

}  // namespace rher::train
