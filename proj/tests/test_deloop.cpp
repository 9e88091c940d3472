#include <doctest.h>

#include <algorithm>
#include <string>
#include <vector>

#include "hallclean/deloop.hpp"
#include "hallclean/normalize.hpp"

using namespace hallclean;

namespace {

NormalizedText nt(std::vector<std::string> toks) { return {std::move(toks)}; }

// Independent eliminator: enumerate every maximal tandem run, pick the one
// with the longest unit (leftmost on ties), collapse, repeat.
NormalizedText brute_deloop(NormalizedText t) {
  for (;;) {
    const auto& v = t.tokens;
    const std::size_t n = v.size();
    struct Run { std::size_t u, i, r; };
    std::vector<Run> runs;
    for (std::size_t u = 1; u * 2 <= n; ++u) {
      for (std::size_t i = 0; i + 2 * u <= n; ++i) {
        std::size_t r = 1;
        while (i + (r + 1) * u <= n &&
               std::equal(v.begin() + i, v.begin() + i + u, v.begin() + i + r * u))
          ++r;
        if (r >= 2) runs.push_back({u, i, r});
      }
    }
    if (runs.empty()) break;
    std::sort(runs.begin(), runs.end(), [](const Run& a, const Run& b) {
      return a.u != b.u ? a.u > b.u : a.i < b.i;
    });
    const Run& best = runs.front();
    t.tokens.erase(t.tokens.begin() + static_cast<std::ptrdiff_t>(best.i + best.u),
                   t.tokens.begin() + static_cast<std::ptrdiff_t>(best.i + best.r * best.u));
  }
  return t;
}

bool has_adjacent_repeat(const NormalizedText& t) {
  const auto& v = t.tokens;
  for (std::size_t u = 1; 2 * u <= v.size(); ++u)
    for (std::size_t i = 0; i + 2 * u <= v.size(); ++i)
      if (std::equal(v.begin() + i, v.begin() + i + u, v.begin() + i + u))
        return true;
  return false;
}

}  // namespace

TEST_CASE("paper looping example") {
  NormalizedText in =
      normalize("Welcome to the New York City City of New York City of New York");
  auto [out, report] = deloop(in);
  CHECK(out.join() == "welcome to the new york city of new york");
  REQUIRE(report.collapses.size() == 2);
  CHECK(report.collapses[0] == Collapse{6, 4, 2});
  CHECK(report.collapses[1] == Collapse{5, 1, 2});
  CHECK(report.tokens_removed() == 5);
}

TEST_CASE("no repeats means no change") {
  auto [out, report] = deloop(nt({"thank", "you"}));
  CHECK(out == nt({"thank", "you"}));
  CHECK_FALSE(report.looped());
}

TEST_CASE("full-run collapse") {
  auto [out, report] = deloop(nt({"a", "b", "a", "b", "a", "b"}));
  CHECK(out == nt({"a", "b"}));
  REQUIRE(report.collapses.size() == 1);
  CHECK(report.collapses[0] == Collapse{0, 2, 3});
}

TEST_CASE("is_looped") {
  CHECK(is_looped(nt({"the", "the"})));
  CHECK(is_looped(nt({"new", "york", "new", "york", "city"})));
  CHECK_FALSE(is_looped(nt({})));
  CHECK_FALSE(is_looped(nt({"a", "b", "a"})));
  DeloopConfig strict;
  strict.min_unit = 2;
  CHECK_FALSE(is_looped(nt({"the", "the"}), strict));
  CHECK(is_looped(nt({"new", "york", "new", "york"}), strict));
  strict.min_unit = 1;
  strict.min_repeats = 3;
  CHECK_FALSE(is_looped(nt({"the", "the"}), strict));
  CHECK(is_looped(nt({"the", "the", "the"}), strict));
}

TEST_CASE("exhaustive fixpoint suite, length <= 10 over 3 letters") {
  const std::string alpha[] = {"a", "b", "c"};
  for (std::size_t len = 0; len <= 10; ++len) {
    std::size_t total = 1;
    for (std::size_t k = 0; k < len; ++k) total *= 3;
    for (std::size_t code = 0; code < total; ++code) {
      NormalizedText t;
      std::size_t c = code;
      for (std::size_t k = 0; k < len; ++k) {
        t.tokens.push_back(alpha[c % 3]);
        c /= 3;
      }
      auto [out, report] = deloop(t);
      CHECK_FALSE(has_adjacent_repeat(out));
      CHECK(out.size() <= t.size());
      CHECK((out.size() == t.size()) == !report.looped());
      CHECK(t.size() - out.size() == report.tokens_removed());
      auto [again, rep2] = deloop(out);
      CHECK(again == out);
      CHECK_FALSE(rep2.looped());
      CHECK(out == brute_deloop(t));
    }
  }
}
