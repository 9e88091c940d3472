#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "hallclean/normalize.hpp"

namespace hallclean {

/// One collapsed tandem repeat: `repeat_count` adjacent copies of the
/// `unit_length`-token unit starting at `start` reduced to a single copy.
struct Collapse {
  std::size_t start = 0;
  std::size_t unit_length = 0;
  std::size_t repeat_count = 0;

  friend bool operator==(const Collapse&, const Collapse&) = default;
};

struct LoopReport {
  std::vector<Collapse> collapses;  // application order

  bool looped() const { return !collapses.empty(); }

  std::size_t tokens_removed() const {
    std::size_t n = 0;
    for (const auto& c : collapses) n += c.unit_length * (c.repeat_count - 1);
    return n;
  }
};

/// Minimum repeat size for is_looped(); deloop() itself always collapses
/// everything down to unit length 1.
struct DeloopConfig {
  std::size_t min_unit = 1;
  std::size_t min_repeats = 2;
};

namespace detail {

inline bool unit_eq(const std::vector<std::string>& t, std::size_t a, std::size_t b,
                    std::size_t u) {
  for (std::size_t k = 0; k < u; ++k)
    if (t[a + k] != t[b + k]) return false;
  return true;
}

}  // namespace detail

/// Collapse adjacent tandem repeats to a single copy of their unit.
/// Repeatedly picks the repeat with the longest unit (leftmost on ties),
/// collapses the whole run, and rescans until no adjacent repeat remains.
inline std::pair<NormalizedText, LoopReport> deloop(NormalizedText t) {
  LoopReport report;
  auto& toks = t.tokens;
  bool changed = true;
  while (changed) {
    changed = false;
    const std::size_t n = toks.size();
    for (std::size_t u = n / 2; u >= 1 && !changed; --u) {
      for (std::size_t i = 0; i + 2 * u <= n; ++i) {
        if (!detail::unit_eq(toks, i, i + u, u)) continue;
        std::size_t r = 2;
        while (i + (r + 1) * u <= n && detail::unit_eq(toks, i, i + r * u, u)) ++r;
        toks.erase(toks.begin() + static_cast<std::ptrdiff_t>(i + u),
                   toks.begin() + static_cast<std::ptrdiff_t>(i + r * u));
        report.collapses.push_back({i, u, r});
        changed = true;
        break;
      }
    }
  }
  return {std::move(t), std::move(report)};
}

inline bool is_looped(const NormalizedText& t, const DeloopConfig& cfg = {}) {
  auto [_, report] = deloop(t);
  for (const auto& c : report.collapses)
    if (c.unit_length >= cfg.min_unit && c.repeat_count >= cfg.min_repeats) return true;
  return false;
}

}  // namespace hallclean
