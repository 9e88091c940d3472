#pragma once

#include <algorithm>
#include <cstddef>
#include <deque>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hallclean/normalize.hpp"

namespace hallclean {

/// Occurrence of pattern `pattern_id` over tokens [start, end).
struct MatchSpan {
  std::size_t pattern_id = 0;
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const { return end - start; }
  friend bool operator==(const MatchSpan&, const MatchSpan&) = default;
};

/// Transition counters for the linearity check: goto steps are token
/// consumptions, fail steps are failure-link hops.
struct MatchStats {
  std::size_t goto_steps = 0;
  std::size_t fail_steps = 0;
};

struct RemovalReport {
  std::vector<MatchSpan> kept;  // non-overlapping, sorted by start
  std::size_t tokens_removed = 0;
};

/// Token-level Aho-Corasick automaton. Matching runs on whole tokens, so a
/// pattern can never match inside a word. Immutable after construction.
class PatternAutomaton {
 public:
  explicit PatternAutomaton(const std::vector<NormalizedText>& patterns) {
    nodes_.push_back({});  // root
    for (const auto& p : patterns) {
      if (p.empty()) throw std::invalid_argument("empty pattern not allowed");
      std::string key = p.join();
      if (dedup_.contains(key)) continue;
      dedup_.emplace(std::move(key), patterns_.size());
      int state = 0;
      for (const auto& tok : p.tokens) {
        int id = intern(tok);
        auto it = nodes_[static_cast<std::size_t>(state)].next.find(id);
        if (it == nodes_[static_cast<std::size_t>(state)].next.end()) {
          nodes_.push_back({});
          nodes_.back().depth = nodes_[static_cast<std::size_t>(state)].depth + 1;
          int fresh = static_cast<int>(nodes_.size()) - 1;
          nodes_[static_cast<std::size_t>(state)].next.emplace(id, fresh);
          state = fresh;
        } else {
          state = it->second;
        }
      }
      nodes_[static_cast<std::size_t>(state)].out.push_back(patterns_.size());
      patterns_.push_back(p);
    }
    build_failure_links();
  }

  std::size_t pattern_count() const { return patterns_.size(); }
  std::size_t state_count() const { return nodes_.size(); }
  const NormalizedText& pattern(std::size_t id) const { return patterns_[id]; }
  const std::vector<NormalizedText>& patterns() const { return patterns_; }

  /// All occurrences of all patterns in t, overlapping and nested included,
  /// sorted by (end, start).
  std::vector<MatchSpan> find_all(const NormalizedText& t, MatchStats* stats = nullptr) const {
    std::vector<MatchSpan> spans;
    int state = 0;
    for (std::size_t pos = 0; pos < t.size(); ++pos) {
      auto vit = vocab_.find(t.tokens[pos]);
      int id = vit == vocab_.end() ? -1 : vit->second;
      if (id < 0) {
        // token unseen in any pattern: only the root transition exists
        state = 0;
        if (stats) ++stats->goto_steps;
      } else {
        while (true) {
          const auto& next = nodes_[static_cast<std::size_t>(state)].next;
          auto it = next.find(id);
          if (it != next.end()) {
            state = it->second;
            if (stats) ++stats->goto_steps;
            break;
          }
          if (state == 0) {
            if (stats) ++stats->goto_steps;
            break;
          }
          state = nodes_[static_cast<std::size_t>(state)].fail;
          if (stats) ++stats->fail_steps;
        }
      }
      for (std::size_t pid : nodes_[static_cast<std::size_t>(state)].out)
        spans.push_back({pid, pos + 1 - patterns_[pid].size(), pos + 1});
    }
    std::sort(spans.begin(), spans.end(), [](const MatchSpan& a, const MatchSpan& b) {
      return a.end != b.end ? a.end < b.end : a.start < b.start;
    });
    return spans;
  }

 private:
  struct Node {
    std::unordered_map<int, int> next;
    int fail = 0;
    int depth = 0;
    std::vector<std::size_t> out;
  };

  int intern(const std::string& tok) {
    auto [it, inserted] = vocab_.emplace(tok, static_cast<int>(vocab_.size()));
    return it->second;
  }

  void build_failure_links() {
    std::deque<int> queue;
    for (auto& [tok, child] : nodes_[0].next) {
      nodes_[static_cast<std::size_t>(child)].fail = 0;
      queue.push_back(child);
    }
    while (!queue.empty()) {
      int cur = queue.front();
      queue.pop_front();
      for (auto& [tok, child] : nodes_[static_cast<std::size_t>(cur)].next) {
        queue.push_back(child);
        int f = nodes_[static_cast<std::size_t>(cur)].fail;
        while (f != 0 && !nodes_[static_cast<std::size_t>(f)].next.contains(tok))
          f = nodes_[static_cast<std::size_t>(f)].fail;
        auto it = nodes_[static_cast<std::size_t>(f)].next.find(tok);
        int link = (it != nodes_[static_cast<std::size_t>(f)].next.end() && it->second != child)
                       ? it->second
                       : 0;
        nodes_[static_cast<std::size_t>(child)].fail = link;
        // output set = patterns that are suffixes of this node's path
        const auto& inherited = nodes_[static_cast<std::size_t>(link)].out;
        auto& out = nodes_[static_cast<std::size_t>(child)].out;
        out.insert(out.end(), inherited.begin(), inherited.end());
      }
    }
  }

  std::vector<Node> nodes_;
  std::vector<NormalizedText> patterns_;
  std::unordered_map<std::string, int> vocab_;
  std::unordered_map<std::string, std::size_t> dedup_;
};

/// Delete a non-overlapping subset of spans from t. Longer spans win,
/// leftmost breaks ties; overlapping losers are discarded.
inline std::pair<NormalizedText, RemovalReport> remove(const NormalizedText& t,
                                                       std::vector<MatchSpan> spans) {
  for (const auto& s : spans) {
    if (s.start > s.end || s.end > t.size())
      throw std::out_of_range("match span out of bounds for text");
  }
  std::sort(spans.begin(), spans.end(), [](const MatchSpan& a, const MatchSpan& b) {
    if (a.length() != b.length()) return a.length() > b.length();
    if (a.start != b.start) return a.start < b.start;
    return a.pattern_id < b.pattern_id;
  });
  RemovalReport report;
  std::vector<char> deleted(t.size(), 0);
  for (const auto& s : spans) {
    bool clash = false;
    for (std::size_t i = s.start; i < s.end && !clash; ++i) clash = deleted[i];
    if (clash) continue;
    for (std::size_t i = s.start; i < s.end; ++i) deleted[i] = 1;
    report.kept.push_back(s);
    report.tokens_removed += s.length();
  }
  std::sort(report.kept.begin(), report.kept.end(),
            [](const MatchSpan& a, const MatchSpan& b) { return a.start < b.start; });
  NormalizedText out;
  out.tokens.reserve(t.size() - report.tokens_removed);
  for (std::size_t i = 0; i < t.size(); ++i)
    if (!deleted[i]) out.tokens.push_back(t.tokens[i]);
  return {std::move(out), std::move(report)};
}

}  // namespace hallclean
