#pragma once

#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string_view>
#include <vector>

#include "tabrl/regressor.hpp"
#include "tabrl/transition.hpp"

namespace tabrl {

/// What to do with an accepted episode once the context budget is reached.
enum class TruncationOperator {
  Stale,           ///< keep the context frozen
  Latest,          ///< FIFO over transitions
  NaiveDedup,      ///< drop near-duplicates in raw state-action space
  EmbedDedup,      ///< drop near-duplicates in the regressor's embedding space
  RewardVariance,  ///< high-return / low-return episode partitions
};

std::string_view operator_name(TruncationOperator op);
TruncationOperator parse_operator(std::string_view name);

/// Linear-interpolation quantile: position q*(n-1) on the sorted sample.
double quantile(std::span<const double> values, double q);

/// Return-history acceptance test: true when fewer than two returns are on
/// record, otherwise iff `episode_return` strictly exceeds quantile(history, q).
bool gate(double episode_return, std::span<const double> history, double q);

struct InsertReport {
  bool inserted = false;
  std::vector<EpisodeTag> evicted_tags;  ///< tags that left the buffer entirely
  std::size_t evicted_transitions = 0;
  bool refit_required = false;
};

/// Budget-bounded in-context dataset.
///
/// Transitions are kept in arrival order. The return history holds one shaped
/// return per gated episode tag that still has at least one transition in the
/// buffer; initial random transitions carry kInitialTag and no return.
class ContextBuffer {
 public:
  ContextBuffer(std::size_t budget, TruncationOperator op, std::size_t action_count);

  /// Adds the initial random batch, keeping at most `budget` transitions.
  void add_initial(std::span<const Transition> transitions);

  bool accepts(double episode_return, double q) const;

  /// Inserts a gated episode, evicting per the operator when the budget would
  /// be exceeded. `embedder` is required for EmbedDedup once the buffer is full.
  InsertReport insert_episode(const Episode& episode,
                              const FittedRegressor* embedder = nullptr);

  std::span<const Transition> transitions() const { return transitions_; }
  std::size_t size() const { return transitions_.size(); }
  std::size_t budget() const { return budget_; }
  std::size_t action_count() const { return action_count_; }
  TruncationOperator truncation() const { return operator_; }

  /// The return history H (ordered by tag).
  std::vector<double> return_history() const;
  const std::map<EpisodeTag, double>& episode_returns() const { return returns_; }
  std::size_t count_of(EpisodeTag tag) const;

  const std::set<EpisodeTag>& good_partition() const { return good_; }
  const std::set<EpisodeTag>& bad_partition() const { return bad_; }
  std::size_t partition_size(const std::set<EpisodeTag>& part) const;

  /// state ++ onehot(action) for every stored transition, in buffer order.
  Matrix features() const;

  /// Removes the given buffer positions; returns the tags that disappeared.
  std::vector<EpisodeTag> remove(std::span<const std::size_t> positions);

 private:
  void append(const Episode& episode, std::size_t keep_last);
  InsertReport insert_reward_variance(const Episode& episode);
  std::vector<EpisodeTag> remove_tag(EpisodeTag tag);

  std::size_t budget_;
  TruncationOperator operator_;
  std::size_t action_count_;
  std::vector<Transition> transitions_;
  std::map<EpisodeTag, double> returns_;
  std::map<EpisodeTag, std::size_t> counts_;
  std::set<EpisodeTag> good_;
  std::set<EpisodeTag> bad_;
};

/// Oldest (size + incoming - budget) positions, clamped to the buffer size.
std::vector<std::size_t> truncate_latest(const ContextBuffer& buffer,
                                         std::size_t incoming_len);

/// Nearest-pair de-duplication over arbitrary row vectors.
///
/// For each row i >= 1, pair it with its closest earlier row j. Pairs are ranked
/// by distance (then by i) and walked in order; each pair evicts its earlier
/// member j unless either member is already evicted. Passes repeat on the
/// survivors until exactly `count` rows are evicted. Returns sorted positions.
/// Throws InputError when `count` exceeds rows - 1.
std::vector<std::size_t> dedup_evictions(const Matrix& points, std::size_t count);

std::vector<std::size_t> truncate_nd(const ContextBuffer& buffer, std::size_t count);
std::vector<std::size_t> truncate_ed(const ContextBuffer& buffer, std::size_t count,
                                     const FittedRegressor& embedder);

/// Columnar text snapshot: CSV with header
/// tag,s0..s{d-1},action,raw_reward,shaped_reward,ns0..ns{d-1},done,truncated
void write_snapshot(std::ostream& out, std::span<const Transition> transitions);
std::vector<Transition> read_snapshot(std::istream& in);

}  // namespace tabrl
