#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "tabrl/agent.hpp"
#include "tabrl/config.hpp"

namespace tabrl {

/// Column order of every per-run CSV.
inline constexpr const char* kRunCsvHeader =
    "episode,shaped_return,raw_return,epsilon,buffer_size,gated,refit_count,refit_seconds";

void write_run_csv(std::ostream& out, const std::vector<EpisodeRow>& rows);
std::vector<EpisodeRow> read_run_csv(std::istream& in);
std::vector<EpisodeRow> read_run_csv(const std::filesystem::path& path);

/// Per-episode statistics of shaped return across seeds.
struct AggregateSummary {
  std::vector<double> mean;
  std::vector<double> median;
  std::vector<double> lower;  ///< 25th percentile
  std::vector<double> upper;  ///< 75th percentile
  std::size_t seeds = 0;

  /// Window statistics over the last `final_window` episodes, pooled over seeds.
  std::size_t final_window = 0;
  double final_mean = 0.0;
  double final_median = 0.0;

  std::size_t episodes() const { return median.size(); }
};

/// `returns[s][e]` is the shaped return of seed s at episode e. All seeds must
/// cover the same number of episodes.
AggregateSummary aggregate(const std::vector<std::vector<double>>& returns,
                           std::size_t final_window = 50);

void write_aggregate_csv(std::ostream& out, const AggregateSummary& summary);

struct SuiteResult {
  std::vector<RunRecord> runs;  ///< in seed order
  AggregateSummary summary;
  std::vector<std::filesystem::path> written;
};

/// One run per seed on up to `workers` threads, then aggregate and plot.
/// Writes run_seed<S>.csv, buffer_seed<S>.snapshot, aggregate.csv and
/// curves.svg under `out_dir`. Failed runs are kept (flagged incomplete) and
/// left out of the aggregate.
SuiteResult run_suite(const ExperimentConfig& config, unsigned workers,
                      const std::filesystem::path& out_dir);

/// Writes `content` to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace tabrl
