#include "rher/train/metrics.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rher::train {

namespace {

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) fields.push_back(f);
  return fields;
}

}  // namespace

std::string metrics_header(int stages) {
  std::string h = "epoch,steps";
  for (int j = 1; j <= stages; ++j) h += ",success_" + std::to_string(j);
  h += ",g,nnsr_ratio,freq_random,freq_guide,freq_learn,loss_critic,loss_actor,seconds";
  return h;
}

std::string metrics_row(const EpochMetrics& m) {
  std::string r = std::to_string(m.epoch) + "," + std::to_string(m.steps);
  for (double s : m.success) r += "," + fmt(s);
  r += "," + std::to_string(m.guide_index);
  r += "," + fmt(m.nnsr_ratio);
  r += "," + fmt(m.freq_random) + "," + fmt(m.freq_guide) + "," + fmt(m.freq_learn);
  r += "," + fmt(m.loss_critic) + "," + fmt(m.loss_actor);
  r += "," + fmt(m.seconds);
  return r;
}

std::vector<EpochMetrics> parse_metrics_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("metrics csv: missing header");
  const auto header = split_csv(line);
  if (header.size() < 12 || header[0] != "epoch" || header[1] != "steps")
    throw std::runtime_error("metrics csv: unexpected header");
  const int stages = static_cast<int>(header.size()) - 10;

  std::vector<EpochMetrics> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (static_cast<int>(f.size()) != stages + 10)
      throw std::runtime_error("metrics csv: bad field count in row");
    EpochMetrics m;
    int idx = 0;
    m.epoch = std::stoi(f[idx++]);
    m.steps = std::stol(f[idx++]);
    m.success.resize(stages);
    for (int j = 0; j < stages; ++j) m.success[j] = std::stod(f[idx++]);
    m.guide_index = std::stoi(f[idx++]);
    m.nnsr_ratio = std::stod(f[idx++]);
    m.freq_random = std::stod(f[idx++]);
    m.freq_guide = std::stod(f[idx++]);
    m.freq_learn = std::stod(f[idx++]);
    m.loss_critic = std::stod(f[idx++]);
    m.loss_actor = std::stod(f[idx++]);
    m.seconds = std::stod(f[idx++]);
    rows.push_back(std::move(m));
  }
  return rows;
}

std::vector<EpochMetrics> load_metrics_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open metrics csv: " + path);
  return parse_metrics_csv(in);
}

}  // namespace rher::train
