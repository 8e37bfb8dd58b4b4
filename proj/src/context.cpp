#include "tabrl/context.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "tabrl/kernels.hpp"

namespace tabrl {

std::string_view operator_name(TruncationOperator op) {
  switch (op) {
    case TruncationOperator::Stale:
      return "stale";
    case TruncationOperator::Latest:
      return "latest";
    case TruncationOperator::NaiveDedup:
      return "naive-dedup";
    case TruncationOperator::EmbedDedup:
      return "embed-dedup";
    case TruncationOperator::RewardVariance:
      return "reward-variance";
  }
  return "?";
}

TruncationOperator parse_operator(std::string_view name) {
  std::string lower;
  for (char c : name) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (lower == "stale" || lower == "s") return TruncationOperator::Stale;
  if (lower == "latest" || lower == "l") return TruncationOperator::Latest;
  if (lower == "naive-dedup" || lower == "nd") return TruncationOperator::NaiveDedup;
  if (lower == "embed-dedup" || lower == "ed") return TruncationOperator::EmbedDedup;
  if (lower == "reward-variance" || lower == "rv") return TruncationOperator::RewardVariance;
  throw InputError("unknown truncation operator '" + std::string(name) + "'");
}

double quantile(std::span<const double> values, double q) {
  if (values.empty()) throw InputError("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw InputError("quantile level must be in [0, 1]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= sorted.size()) return sorted[lo];
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

bool gate(double episode_return, std::span<const double> history, double q) {
  // A one-element quantile is just that element; fewer than two returns is
  // treated as no history.
  if (history.size() < 2) return true;
  return episode_return > quantile(history, q);
}

ContextBuffer::ContextBuffer(std::size_t budget, TruncationOperator op,
                             std::size_t action_count)
    : budget_(budget), operator_(op), action_count_(action_count) {
  if (budget == 0) throw InputError("context budget must be positive");
  if (action_count == 0) throw InputError("action count must be positive");
}

void ContextBuffer::add_initial(std::span<const Transition> transitions) {
  const std::size_t room = budget_ - std::min(budget_, transitions_.size());
  const std::size_t take = std::min(room, transitions.size());
  for (std::size_t i = 0; i < take; ++i) {
    Transition t = transitions[i];
    t.tag = kInitialTag;
    transitions_.push_back(std::move(t));
    ++counts_[kInitialTag];
  }
}

bool ContextBuffer::accepts(double episode_return, double q) const {
  return gate(episode_return, return_history(), q);
}

std::vector<double> ContextBuffer::return_history() const {
  std::vector<double> h;
  h.reserve(returns_.size());
  for (const auto& [tag, r] : returns_) h.push_back(r);
  return h;
}

std::size_t ContextBuffer::count_of(EpisodeTag tag) const {
  const auto it = counts_.find(tag);
  return it == counts_.end() ? 0 : it->second;
}

std::size_t ContextBuffer::partition_size(const std::set<EpisodeTag>& part) const {
  std::size_t n = 0;
  for (EpisodeTag tag : part) n += count_of(tag);
  return n;
}

Matrix ContextBuffer::features() const {
  Matrix x;
  for (const auto& t : transitions_) x.append_row(encode_state_action(t.state, t.action, action_count_));
  return x;
}

std::vector<EpisodeTag> ContextBuffer::remove(std::span<const std::size_t> positions) {
  std::vector<char> drop(transitions_.size(), 0);
  for (std::size_t p : positions) {
    if (p >= transitions_.size()) throw InputError("eviction position out of range");
    drop[p] = 1;
  }
  std::vector<EpisodeTag> gone;
  std::vector<Transition> kept;
  kept.reserve(transitions_.size());
  for (std::size_t i = 0; i < transitions_.size(); ++i) {
    if (!drop[i]) {
      kept.push_back(std::move(transitions_[i]));
      continue;
    }
    const EpisodeTag tag = transitions_[i].tag;
    if (--counts_[tag] == 0) {
      counts_.erase(tag);
      returns_.erase(tag);
      good_.erase(tag);
      bad_.erase(tag);
      gone.push_back(tag);
    }
  }
  transitions_ = std::move(kept);
  return gone;
}

std::vector<EpisodeTag> ContextBuffer::remove_tag(EpisodeTag tag) {
  std::vector<std::size_t> positions;
  for (std::size_t i = 0; i < transitions_.size(); ++i)
    if (transitions_[i].tag == tag) positions.push_back(i);
  return remove(positions);
}

void ContextBuffer::append(const Episode& episode, std::size_t keep_last) {
  const auto& ts = episode.transitions;
  const std::size_t first = ts.size() - std::min(keep_last, ts.size());
  for (std::size_t i = first; i < ts.size(); ++i) {
    Transition t = ts[i];
    t.tag = episode.tag;
    transitions_.push_back(std::move(t));
  }
  counts_[episode.tag] += ts.size() - first;
  returns_[episode.tag] = episode.shaped_return();
}

InsertReport ContextBuffer::insert_episode(const Episode& episode,
                                           const FittedRegressor* embedder) {
  if (episode.transitions.empty()) throw InputError("cannot insert an empty episode");
  if (episode.tag == kInitialTag) throw InputError("episode uses the reserved initial tag");
  if (counts_.contains(episode.tag))
    throw InputError("episode tag " + std::to_string(episode.tag) + " already in context");

  if (operator_ == TruncationOperator::RewardVariance) return insert_reward_variance(episode);

  const std::size_t len = episode.transitions.size();
  InsertReport report;
  if (transitions_.size() + len <= budget_) {
    append(episode, len);
    report.inserted = report.refit_required = true;
    return report;
  }

  std::vector<std::size_t> evict;
  const std::size_t overflow = transitions_.size() + len - budget_;
  switch (operator_) {
    case TruncationOperator::Stale:
      return report;
    case TruncationOperator::Latest:
      evict = truncate_latest(*this, len);
      break;
    case TruncationOperator::NaiveDedup:
    case TruncationOperator::EmbedDedup:
      if (overflow + 1 > transitions_.size()) {
        // Nothing short of a full flush makes room.
        evict.resize(transitions_.size());
        std::iota(evict.begin(), evict.end(), std::size_t{0});
      } else if (operator_ == TruncationOperator::NaiveDedup) {
        evict = truncate_nd(*this, overflow);
      } else {
        if (embedder == nullptr)
          throw CapabilityError("embedding de-duplication needs a fitted regressor");
        evict = truncate_ed(*this, overflow, *embedder);
      }
      break;
    case TruncationOperator::RewardVariance:
      break;
  }
  report.evicted_transitions = evict.size();
  report.evicted_tags = remove(evict);
  append(episode, std::min(len, budget_));
  report.inserted = report.refit_required = true;
  return report;
}

InsertReport ContextBuffer::insert_reward_variance(const Episode& episode) {
  InsertReport report;
  const std::size_t len = episode.transitions.size();
  const std::size_t half = budget_ / 2;
  if (len > half) return report;

  const double r = episode.shaped_return();
  auto returns_of = [&](const std::set<EpisodeTag>& part) {
    std::vector<double> out;
    for (EpisodeTag tag : part) out.push_back(returns_.at(tag));
    return out;
  };

  bool to_good;
  if (good_.empty() || r > quantile(returns_of(good_), 0.95))
    to_good = true;
  else if (bad_.empty() || r < quantile(returns_of(bad_), 0.05))
    to_good = false;
  else
    return report;

  std::set<EpisodeTag>& part = to_good ? good_ : bad_;
  const std::size_t before = transitions_.size();
  while (partition_size(part) + len > half) {
    // G sheds its lowest return, W its highest; lowest tag on ties.
    EpisodeTag victim = *part.begin();
    for (EpisodeTag tag : part) {
      const double cand = returns_.at(tag), best = returns_.at(victim);
      if (to_good ? cand < best : cand > best) victim = tag;
    }
    auto gone = remove_tag(victim);
    report.evicted_tags.insert(report.evicted_tags.end(), gone.begin(), gone.end());
  }

  if (transitions_.size() + len > budget_) {
    std::size_t need = transitions_.size() + len - budget_;
    std::vector<std::size_t> initial;
    for (std::size_t i = 0; i < transitions_.size() && initial.size() < need; ++i)
      if (transitions_[i].tag == kInitialTag) initial.push_back(i);
    auto gone = remove(initial);
    report.evicted_tags.insert(report.evicted_tags.end(), gone.begin(), gone.end());
  }

  report.evicted_transitions = before - transitions_.size();
  append(episode, len);
  part.insert(episode.tag);
  report.inserted = report.refit_required = true;
  return report;
}

std::vector<std::size_t> truncate_latest(const ContextBuffer& buffer,
                                         std::size_t incoming_len) {
  const std::size_t total = buffer.size() + incoming_len;
  const std::size_t count =
      total > buffer.budget() ? std::min(buffer.size(), total - buffer.budget()) : 0;
  std::vector<std::size_t> out(count);
  std::iota(out.begin(), out.end(), std::size_t{0});
  return out;
}

std::vector<std::size_t> dedup_evictions(const Matrix& points, std::size_t count) {
  if (count == 0) return {};
  if (count + 1 > points.rows())
    throw InputError("cannot evict " + std::to_string(count) + " of " +
                     std::to_string(points.rows()) + " rows by de-duplication");

  std::vector<std::size_t> alive(points.rows());
  std::iota(alive.begin(), alive.end(), std::size_t{0});
  std::vector<std::size_t> evicted;

  while (evicted.size() < count) {
    Matrix sub(alive.size(), points.cols());
    for (std::size_t i = 0; i < alive.size(); ++i) {
      const auto src = points.row(alive[i]);
      std::copy(src.begin(), src.end(), sub.row(i).begin());
    }
    const auto nearest = kernels::previous_nearest(sub);

    std::vector<std::size_t> order(alive.size() - 1);
    std::iota(order.begin(), order.end(), std::size_t{1});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return nearest.distance[a] < nearest.distance[b];
    });

    std::vector<char> marked(alive.size(), 0);
    for (std::size_t i : order) {
      const std::size_t j = nearest.index[i];
      if (marked[i] || marked[j]) continue;
      marked[j] = 1;
      evicted.push_back(alive[j]);
      if (evicted.size() == count) break;
    }
    std::vector<std::size_t> survivors;
    for (std::size_t i = 0; i < alive.size(); ++i)
      if (!marked[i]) survivors.push_back(alive[i]);
    alive = std::move(survivors);
  }
  std::sort(evicted.begin(), evicted.end());
  return evicted;
}

std::vector<std::size_t> truncate_nd(const ContextBuffer& buffer, std::size_t count) {
  return dedup_evictions(buffer.features(), count);
}

std::vector<std::size_t> truncate_ed(const ContextBuffer& buffer, std::size_t count,
                                     const FittedRegressor& embedder) {
  if (count == 0) return {};
  return dedup_evictions(embedder.embed(buffer.features()), count);
}

namespace {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw InputError("bad number '" + s + "' in snapshot");
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

}  // namespace

void write_snapshot(std::ostream& out, std::span<const Transition> transitions) {
  const std::size_t d = transitions.empty() ? 0 : transitions.front().state.size();
  out << "tag";
  for (std::size_t i = 0; i < d; ++i) out << ",s" << i;
  out << ",action,raw_reward,shaped_reward";
  for (std::size_t i = 0; i < d; ++i) out << ",ns" << i;
  out << ",done,truncated\n";
  for (const auto& t : transitions) {
    out << t.tag;
    for (double v : t.state) out << ',' << format_double(v);
    out << ',' << t.action << ',' << format_double(t.raw_reward) << ','
        << format_double(t.shaped_reward);
    for (double v : t.next_state) out << ',' << format_double(v);
    out << ',' << (t.done ? 1 : 0) << ',' << (t.truncated ? 1 : 0) << '\n';
  }
}

std::vector<Transition> read_snapshot(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("empty snapshot");
  const auto header = split_csv(line);
  const std::size_t d =
      std::count_if(header.begin(), header.end(),
                    [](const std::string& h) { return h.size() > 1 && h[0] == 's' && std::isdigit(static_cast<unsigned char>(h[1])); });
  // Older snapshots end at "done"; the truncated column is optional.
  const bool has_truncated = !header.empty() && header.back() == "truncated";
  const std::size_t columns = 2 * d + 5 + (has_truncated ? 1 : 0);
  if (header.size() != columns || header.front() != "tag" ||
      header[2 * d + 4] != "done")
    throw InputError("snapshot header does not match the transition schema");

  std::vector<Transition> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != columns)
      throw InputError("snapshot line " + std::to_string(line_no) + " has " +
                       std::to_string(cells.size()) + " fields, expected " +
                       std::to_string(columns));
    Transition t;
    std::size_t c = 0;
    t.tag = std::stoll(cells[c++]);
    for (std::size_t i = 0; i < d; ++i) t.state.push_back(parse_double(cells[c++]));
    t.action = static_cast<ActionId>(std::stoull(cells[c++]));
    t.raw_reward = parse_double(cells[c++]);
    t.shaped_reward = parse_double(cells[c++]);
    for (std::size_t i = 0; i < d; ++i) t.next_state.push_back(parse_double(cells[c++]));
    t.done = cells[c++] == "1";
    if (has_truncated) t.truncated = cells[c++] == "1";
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace tabrl
