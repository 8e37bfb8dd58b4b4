#include <fstream>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "tabrl/config.hpp"
#include "tabrl/context.hpp"
#include "tabrl/harness.hpp"
#include "tabrl/plot.hpp"

namespace {

int cmd_run(const std::string& config_path, unsigned workers, const std::string& out_override) {
  tabrl::ExperimentConfig config = tabrl::load_config(config_path);
  const std::filesystem::path out =
      out_override.empty() ? config.output_dir : std::filesystem::path(out_override);
  std::cerr << "running " << config.seeds.size() << " seed(s) of "
            << tabrl::env_name(config.agent.env) << " with "
            << tabrl::operator_name(config.agent.truncation) << " truncation -> " << out << '\n';
  const auto result = tabrl::run_suite(config, workers, out);
  tabrl::write_file_atomic(out / "config.txt", tabrl::format_config(config));

  int failed = 0;
  for (const auto& run : result.runs) {
    const double last = run.rows.empty() ? 0.0 : run.rows.back().shaped_return;
    std::cout << "seed " << run.seed << ": " << run.rows.size() << " episodes, "
              << run.refit_count << " refits, final buffer " << run.final_buffer.size()
              << ", last return " << last;
    if (!run.complete) {
      std::cout << "  [INCOMPLETE: " << run.error << "]";
      ++failed;
    }
    std::cout << '\n';
  }
  if (result.summary.seeds > 0)
    std::cout << "final-" << result.summary.final_window
              << " median shaped return: " << result.summary.final_median << '\n';
  return failed == 0 ? 0 : 2;
}

int cmd_plot(const std::vector<std::string>& inputs, const std::vector<std::string>& baselines,
             const std::string& out, const std::string& title) {
  std::vector<tabrl::PlotSeries> series, base;
  for (const auto& p : inputs) series.push_back(tabrl::load_series(p));
  for (const auto& p : baselines) base.push_back(tabrl::load_series(p));
  tabrl::PlotOptions options;
  if (!title.empty()) options.title = title;
  tabrl::write_file_atomic(out, tabrl::plot_curves(series, base, options));
  std::cout << "wrote " << out << '\n';
  return 0;
}

int cmd_inspect(const std::string& path, std::size_t show_rows) {
  std::ifstream in(path);
  if (!in) throw tabrl::InputError("cannot open " + path);
  const auto transitions = tabrl::read_snapshot(in);
  std::map<tabrl::EpisodeTag, std::pair<std::size_t, double>> per_tag;
  std::map<tabrl::ActionId, std::size_t> per_action;
  std::size_t done = 0;
  for (const auto& t : transitions) {
    auto& [count, ret] = per_tag[t.tag];
    ++count;
    ret += t.shaped_reward;
    ++per_action[t.action];
    done += t.done ? 1 : 0;
  }
  std::cout << "transitions: " << transitions.size() << '\n'
            << "state width: " << (transitions.empty() ? 0 : transitions.front().state.size())
            << '\n'
            << "terminal transitions: " << done << '\n'
            << "actions:";
  for (const auto& [a, n] : per_action) std::cout << ' ' << a << '=' << n;
  std::cout << "\nepisodes (tag, transitions, shaped return in context):\n";
  for (const auto& [tag, info] : per_tag)
    std::cout << "  " << (tag == tabrl::kInitialTag ? std::string("initial") : std::to_string(tag))
              << ", " << info.first << ", " << info.second << '\n';
  if (show_rows > 0) {
    std::vector<tabrl::Transition> head(
        transitions.begin(), transitions.begin() + std::min(show_rows, transitions.size()));
    tabrl::write_snapshot(std::cout, head);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gradient-free fitted Q iteration with an in-context regressor"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  unsigned workers = 1;
  auto* run = app.add_subcommand("run", "Run every seed of an experiment config");
  run->add_option("--config", config_path, "Experiment config file")->required()->check(CLI::ExistingFile);
  run->add_option("--workers", workers, "Concurrent runs")->check(CLI::PositiveNumber);
  run->add_option("--out", out_dir, "Output directory (overrides output.dir)");

  std::vector<std::string> inputs, baselines;
  std::string plot_out = "curves.svg", title;
  auto* plot = app.add_subcommand("plot", "Plot learning curves as SVG");
  plot->add_option("--inputs", inputs, "Run directories or run CSVs, one series each")->required();
  plot->add_option("--baseline", baselines, "Baseline run directories or CSVs");
  plot->add_option("--out", plot_out, "Output SVG path");
  plot->add_option("--title", title, "Plot title");

  std::string snapshot;
  std::size_t show_rows = 0;
  auto* inspect = app.add_subcommand("inspect-buffer", "Summarize a context buffer snapshot");
  inspect->add_option("snapshot", snapshot, "Snapshot file")->required()->check(CLI::ExistingFile);
  inspect->add_option("--rows", show_rows, "Also print the first N transitions");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(config_path, workers, out_dir);
    if (*plot) return cmd_plot(inputs, baselines, plot_out, title);
    if (*inspect) return cmd_inspect(snapshot, show_rows);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
