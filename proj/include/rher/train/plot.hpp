#pragma once

#include <string>
#include <vector>

#include "rher/train/metrics.hpp"

namespace rher::train {

// Renders the per-sub-task success curves of a metrics table as a standalone
// SVG image.
std::string render_success_plot_svg(const std::vector<EpochMetrics>& rows);
void write_success_plot_svg(const std::vector<EpochMetrics>& rows, const std::string& path);

}  // namespace rher::train
