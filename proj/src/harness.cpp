#include "tabrl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include "tabrl/context.hpp"
#include "tabrl/plot.hpp"

namespace tabrl {
namespace {

std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <typename T>
T parse_field(const std::string& cell, int line) {
  T v{};
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
    throw InputError("run CSV line " + std::to_string(line) + ": bad field '" + cell + "'");
  return v;
}

}  // namespace

void write_run_csv(std::ostream& out, const std::vector<EpisodeRow>& rows) {
  out << kRunCsvHeader << '\n';
  for (const auto& r : rows)
    out << r.episode << ',' << fmt(r.shaped_return) << ',' << fmt(r.raw_return) << ','
        << fmt(r.epsilon) << ',' << r.buffer_size << ',' << (r.gated ? 1 : 0) << ','
        << r.refit_count << ',' << fmt(r.refit_seconds) << '\n';
}

std::vector<EpisodeRow> read_run_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kRunCsvHeader)
    throw InputError("run CSV header does not match '" + std::string(kRunCsvHeader) + "'");
  std::vector<EpisodeRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 8)
      throw InputError("run CSV line " + std::to_string(line_no) + ": expected 8 fields");
    EpisodeRow r;
    r.episode = parse_field<int>(cells[0], line_no);
    r.shaped_return = parse_field<double>(cells[1], line_no);
    r.raw_return = parse_field<double>(cells[2], line_no);
    r.epsilon = parse_field<double>(cells[3], line_no);
    r.buffer_size = parse_field<std::size_t>(cells[4], line_no);
    r.gated = parse_field<int>(cells[5], line_no) != 0;
    r.refit_count = parse_field<int>(cells[6], line_no);
    r.refit_seconds = parse_field<double>(cells[7], line_no);
    rows.push_back(r);
  }
  return rows;
}

std::vector<EpisodeRow> read_run_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return read_run_csv(in);
}

AggregateSummary aggregate(const std::vector<std::vector<double>>& returns,
                           std::size_t final_window) {
  if (returns.empty()) throw InputError("nothing to aggregate");
  const std::size_t episodes = returns.front().size();
  for (const auto& r : returns)
    if (r.size() != episodes)
      throw InputError("seeds cover different numbers of episodes (" +
                       std::to_string(r.size()) + " vs " + std::to_string(episodes) + ")");

  AggregateSummary s;
  s.seeds = returns.size();
  std::vector<double> column(returns.size());
  for (std::size_t e = 0; e < episodes; ++e) {
    for (std::size_t i = 0; i < returns.size(); ++i) column[i] = returns[i][e];
    s.mean.push_back(std::accumulate(column.begin(), column.end(), 0.0) /
                     static_cast<double>(column.size()));
    s.median.push_back(quantile(column, 0.5));
    s.lower.push_back(quantile(column, 0.25));
    s.upper.push_back(quantile(column, 0.75));
  }

  s.final_window = std::min(final_window, episodes);
  if (s.final_window > 0) {
    std::vector<double> pooled;
    for (const auto& r : returns) pooled.insert(pooled.end(), r.end() - s.final_window, r.end());
    s.final_mean = std::accumulate(pooled.begin(), pooled.end(), 0.0) /
                   static_cast<double>(pooled.size());
    s.final_median = quantile(pooled, 0.5);
  }
  return s;
}

void write_aggregate_csv(std::ostream& out, const AggregateSummary& s) {
  out << "episode,mean,median,q25,q75,seeds\n";
  for (std::size_t e = 0; e < s.episodes(); ++e)
    out << e + 1 << ',' << fmt(s.mean[e]) << ',' << fmt(s.median[e]) << ',' << fmt(s.lower[e])
        << ',' << fmt(s.upper[e]) << ',' << s.seeds << '\n';
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

SuiteResult run_suite(const ExperimentConfig& config, unsigned workers,
                      const std::filesystem::path& out_dir) {
  config.validate();
  SuiteResult result;
  result.runs.resize(config.seeds.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < config.seeds.size(); i = next++)
      result.runs[i] = run_agent(config.agent, config.seeds[i]);
  };
  const unsigned threads =
      std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(config.seeds.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  std::filesystem::create_directories(out_dir);
  std::vector<std::vector<double>> complete;
  for (const auto& run : result.runs) {
    const std::string stem = "seed" + std::to_string(run.seed);
    std::ostringstream csv;
    write_run_csv(csv, run.rows);
    result.written.push_back(out_dir / ("run_" + stem + ".csv"));
    write_file_atomic(result.written.back(), csv.str());

    std::ostringstream snap;
    write_snapshot(snap, run.final_buffer);
    result.written.push_back(out_dir / ("buffer_" + stem + ".snapshot"));
    write_file_atomic(result.written.back(), snap.str());

    if (run.complete) {
      std::vector<double> r;
      for (const auto& row : run.rows) r.push_back(row.shaped_return);
      complete.push_back(std::move(r));
    }
  }
  if (complete.empty()) return result;

  result.summary = aggregate(complete);
  std::ostringstream agg;
  write_aggregate_csv(agg, result.summary);
  result.written.push_back(out_dir / "aggregate.csv");
  write_file_atomic(result.written.back(), agg.str());

  const std::string label = std::string(env_name(config.agent.env)) + " / " +
                            std::string(operator_name(config.agent.truncation));
  result.written.push_back(out_dir / "curves.svg");
  write_file_atomic(result.written.back(),
                    plot_curves({PlotSeries{label, result.summary}}, {}));
  return result;
}

}  // namespace tabrl
