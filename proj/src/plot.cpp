#include "tabrl/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace tabrl {
namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#17becf", "#bcbd22"};
constexpr const char* kBaselinePalette[] = {"#ff7f0e", "#7f7f7f", "#000000"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Round the axis span out to a "nice" tick step.
double nice_step(double span, int target_ticks) {
  const double raw = span / target_ticks;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (raw <= m * mag) return m * mag;
  return 10.0 * mag;
}

}  // namespace

PlotSeries load_series(const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  if (fs::is_directory(path)) {
    for (const auto& entry : fs::directory_iterator(path)) {
      const auto name = entry.path().filename().string();
      if (entry.is_regular_file() && name.starts_with("run_") && name.ends_with(".csv"))
        files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw InputError("no run_*.csv files in " + path.string());
  } else {
    files.push_back(path);
  }
  std::vector<std::vector<double>> returns;
  for (const auto& f : files) {
    std::vector<double> r;
    for (const auto& row : read_run_csv(f)) r.push_back(row.shaped_return);
    returns.push_back(std::move(r));
  }
  const fs::path trimmed = path.has_filename() ? path : path.parent_path();
  return {fs::is_directory(path) ? trimmed.filename().string() : path.stem().string(),
          aggregate(returns)};
}

std::string plot_curves(const std::vector<PlotSeries>& series,
                        const std::vector<PlotSeries>& baselines,
                        const PlotOptions& options) {
  if (series.empty() && baselines.empty()) throw InputError("no series to plot");
  const std::size_t episodes =
      series.empty() ? baselines.front().summary.episodes() : series.front().summary.episodes();
  if (episodes == 0) throw InputError("series has no episodes");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto* group : {&series, &baselines})
    for (const auto& s : *group) {
      if (s.summary.episodes() != episodes)
        throw InputError("series '" + s.label + "' has " + std::to_string(s.summary.episodes()) +
                         " episodes, expected " + std::to_string(episodes));
      for (double v : s.summary.lower) lo = std::min(lo, v);
      for (double v : s.summary.upper) hi = std::max(hi, v);
      for (double v : s.summary.median) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
  if (hi - lo < 1e-9) {
    lo -= 1.0;
    hi += 1.0;
  }
  const double ystep = nice_step(hi - lo, 6);
  lo = std::floor(lo / ystep) * ystep;
  hi = std::ceil(hi / ystep) * ystep;

  const double left = 70, right = 190, top = 40, bottom = 50;
  const double pw = options.width - left - right;
  const double ph = options.height - top - bottom;
  const double xmax = std::max<double>(1.0, static_cast<double>(episodes - 1));
  auto sx = [&](std::size_t e) { return left + pw * static_cast<double>(e) / xmax; };
  auto sy = [&](double v) { return top + ph * (hi - v) / (hi - lo); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << options.width
      << "\" height=\"" << options.height << "\" viewBox=\"0 0 " << options.width << ' '
      << options.height << "\">\n"
      << "<style>text{font-family:sans-serif;font-size:12px;fill:#222}"
         ".grid{stroke:#ddd;stroke-width:1}.axis{stroke:#444;stroke-width:1}"
         ".median{fill:none;stroke-width:1.8}.band{stroke:none;fill-opacity:0.2}"
         ".baseline{stroke-dasharray:6 4}</style>\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << num(left + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" "
         "style=\"font-size:15px\">" << escape(options.title) << "</text>\n";

  for (double v = lo; v <= hi + ystep * 1e-6; v += ystep) {
    svg << "<line class=\"grid\" x1=\"" << num(left) << "\" x2=\"" << num(left + pw) << "\" y1=\""
        << num(sy(v)) << "\" y2=\"" << num(sy(v)) << "\"/>"
        << "<text x=\"" << num(left - 6) << "\" y=\"" << num(sy(v) + 4)
        << "\" text-anchor=\"end\">" << num(v) << "</text>\n";
  }
  const double xstep = nice_step(static_cast<double>(episodes), 8);
  for (double e = 0; e <= static_cast<double>(episodes) + 1e-9; e += xstep) {
    const auto idx = static_cast<std::size_t>(std::max(0.0, e - 1));
    if (idx >= episodes) break;
    svg << "<text x=\"" << num(sx(idx)) << "\" y=\"" << num(top + ph + 18)
        << "\" text-anchor=\"middle\">" << static_cast<long>(std::max(1.0, e)) << "</text>\n";
  }
  svg << "<line class=\"axis\" x1=\"" << num(left) << "\" x2=\"" << num(left + pw) << "\" y1=\""
      << num(top + ph) << "\" y2=\"" << num(top + ph) << "\"/>\n"
      << "<line class=\"axis\" x1=\"" << num(left) << "\" x2=\"" << num(left) << "\" y1=\""
      << num(top) << "\" y2=\"" << num(top + ph) << "\"/>\n"
      << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << options.height - 10
      << "\" text-anchor=\"middle\">episode</text>\n"
      << "<text transform=\"rotate(-90)\" x=\"" << num(-(top + ph / 2)) << "\" y=\"18\" "
         "text-anchor=\"middle\">shaped return</text>\n";

  int legend_row = 0;
  auto draw = [&](const PlotSeries& s, const char* colour, bool baseline) {
    const auto& m = s.summary;
    svg << "<g>\n<path class=\"band\" fill=\"" << colour << "\" d=\"M";
    for (std::size_t e = 0; e < episodes; ++e)
      svg << (e ? " L" : "") << num(sx(e)) << ',' << num(sy(m.upper[e]));
    for (std::size_t e = episodes; e-- > 0;) svg << " L" << num(sx(e)) << ',' << num(sy(m.lower[e]));
    svg << " Z\"/>\n<path class=\"median" << (baseline ? " baseline" : "") << "\" stroke=\""
        << colour << "\" d=\"M";
    for (std::size_t e = 0; e < episodes; ++e)
      svg << (e ? " L" : "") << num(sx(e)) << ',' << num(sy(m.median[e]));
    svg << "\"/>\n";
    const double ly = top + 10 + 20.0 * legend_row++;
    svg << "<line class=\"median" << (baseline ? " baseline" : "") << "\" stroke=\"" << colour
        << "\" x1=\"" << num(left + pw + 15) << "\" x2=\"" << num(left + pw + 45) << "\" y1=\""
        << num(ly) << "\" y2=\"" << num(ly) << "\"/>"
        << "<text x=\"" << num(left + pw + 52) << "\" y=\"" << num(ly + 4) << "\">"
        << escape(baseline ? "baseline: " + s.label : s.label) << "</text>\n</g>\n";
  };
  for (std::size_t i = 0; i < series.size(); ++i) draw(series[i], kPalette[i % 8], false);
  for (std::size_t i = 0; i < baselines.size(); ++i)
    draw(baselines[i], kBaselinePalette[i % 3], true);
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace tabrl
