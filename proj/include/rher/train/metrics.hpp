#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rher::train {

// One evaluation row; persisted as one CSV line.
struct EpochMetrics {
  int epoch = 0;
  long steps = 0;                // cumulative environment steps
  std::vector<double> success;   // per sub-task test success rates
  int guide_index = 0;
  double nnsr_ratio = 0.0;       // zero-reward fraction of relabeled samples, final sub-task
  double freq_random = 0.0;
  double freq_guide = 0.0;
  double freq_learn = 0.0;
  double loss_critic = 0.0;
  double loss_actor = 0.0;
  double seconds = 0.0;          // wall clock for the epoch
};

// Fixed schema: epoch, steps, success_1..success_M, g, nnsr_ratio,
// freq_random, freq_guide, freq_learn, loss_critic, loss_actor, seconds.
std::string metrics_header(int stages);
std::string metrics_row(const EpochMetrics& m);

std::vector<EpochMetrics> parse_metrics_csv(std::istream& in);
std::vector<EpochMetrics> load_metrics_csv(const std::string& path);

}  // namespace rher::train
