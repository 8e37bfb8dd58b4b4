#pragma once

#include <string>
#include <vector>

#include "tabrl/harness.hpp"

namespace tabrl {

struct PlotSeries {
  std::string label;
  AggregateSummary summary;
};

/// A directory becomes one series aggregated over its run_*.csv files; a file
/// is a single-run series. The label is the directory or file stem.
PlotSeries load_series(const std::filesystem::path& path);

struct PlotOptions {
  std::string title = "Shaped return per episode";
  int width = 900;
  int height = 520;
};

/// Standalone SVG: one median line with a shaded interquartile band per series,
/// baselines drawn dashed. Throws InputError when episode counts differ or
/// nothing is given.
std::string plot_curves(const std::vector<PlotSeries>& series,
                        const std::vector<PlotSeries>& baselines,
                        const PlotOptions& options = {});

}  // namespace tabrl
