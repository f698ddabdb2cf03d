#include "rher/train/plot.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rher::train {

namespace {
const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b"};
constexpr int kPaletteSize = 6;
}  // namespace

std::string render_success_plot_svg(const std::vector<EpochMetrics>& rows) {
  if (rows.empty()) throw std::invalid_argument("plot: no metric rows");
  const int stages = static_cast<int>(rows.front().success.size());

  const double width = 860, height = 520;
  const double ml = 70, mr = 160, mt = 30, mb = 55;
  const double pw = width - ml - mr, ph = height - mt - mb;
  const int max_epoch = std::max(1, rows.back().epoch);

  auto px = [&](double epoch) { return ml + pw * (epoch / max_epoch); };
  auto py = [&](double rate) { return mt + ph * (1.0 - rate); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " " << height
      << "\">\n";
  svg << "<rect width=\"" << width << "\" height=\"" << height
      << "\" fill=\"white\"/>\n";

  // axes and grid
  svg << "<g stroke=\"#444\" stroke-width=\"1\">\n";
  svg << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw
      << "\" y2=\"" << mt + ph << "\"/>\n";
  svg << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
      << mt + ph << "\"/>\n</g>\n";
  svg << "<g font-family=\"sans-serif\" font-size=\"12\" fill=\"#222\">\n";
  for (int i = 0; i <= 5; ++i) {
    const double r = i / 5.0;
    svg << "<line x1=\"" << ml - 4 << "\" y1=\"" << py(r) << "\" x2=\"" << ml + pw
        << "\" y2=\"" << py(r) << "\" stroke=\"#ddd\"/>\n";
    svg << "<text x=\"" << ml - 8 << "\" y=\"" << py(r) + 4
        << "\" text-anchor=\"end\">" << r << "</text>\n";
  }
  for (int i = 0; i <= 8; ++i) {
    const double e = max_epoch * (i / 8.0);
    svg << "<text x=\"" << px(e) << "\" y=\"" << mt + ph + 18
        << "\" text-anchor=\"middle\">" << static_cast<int>(e) << "</text>\n";
  }
  svg << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\">epoch</text>\n";
  svg << "<text x=\"18\" y=\"" << mt + ph / 2
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " << mt + ph / 2
      << ")\">test success rate</text>\n";
  svg << "</g>\n";

  for (int j = 0; j < stages; ++j) {
    const char* color = kPalette[j % kPaletteSize];
    svg << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.8\" points=\"";
    for (const auto& m : rows) svg << px(m.epoch) << "," << py(m.success[j]) << " ";
    svg << "\"/>\n";
    const double ly = mt + 16 + 18 * j;
    svg << "<line x1=\"" << ml + pw + 14 << "\" y1=\"" << ly << "\" x2=\""
        << ml + pw + 40 << "\" y2=\"" << ly << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << ml + pw + 46 << "\" y=\"" << ly + 4
        << "\" font-family=\"sans-serif\" font-size=\"12\">subtask " << (j + 1)
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void write_success_plot_svg(const std::vector<EpochMetrics>& rows,
                            const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open plot output: " + path);
  out << render_success_plot_svg(rows);
  if (!out) throw std::runtime_error("plot write failed: " + path);
}

}  // namespace rher::train
