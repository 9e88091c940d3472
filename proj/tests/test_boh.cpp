#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hallclean/boh.hpp"

using namespace hallclean;

namespace {

// Table of the most common non-speech outputs with their printed LM scores.
const std::vector<std::pair<std::string, double>> kTopOutputs = {
    {"thank you", -9.22},
    {"thanks for watching", -13.32},
    {"so", -7.76},
    {"thank you for watching", -12.42},
    {"the", -6.67},
    {"you", -7.93},
    {"oh", -8.04},
    {"okay", -8.23},
    {"i m sorry", -8.42},
    {"oh my god", -8.60},
    {"bye", -7.98},
    {"i m not sure what i m doing here", -28.97},
    {"uh", -8.88},
    {"meow", -9.89},
    {"subtitles by the amara org community", -31.13},
    {"subtitles by steamteamextra", -20.70},
    {"hello everyone welcome to my channel", -26.73},
};

SentenceScorer table_scorer() {
  std::map<std::string, double> scores;
  for (const auto& [text, logp] : kTopOutputs) scores.emplace(text, logp);
  return [scores](const NormalizedText& t) { return scores.at(t.join()); };
}

}  // namespace

TEST_CASE("collect normalizes, filters and deloops") {
  HallucinationCollector c;
  c.add("Thank you.");
  c.add("thank  YOU");
  c.add("!!!");
  CHECK(c.stats().records == 3);
  CHECK(c.stats().retained == 2);
  CHECK(c.stats().discarded == 1);
  CHECK(c.table().at("thank you") == 2);
  CHECK(c.unique_count() == 1);
}

TEST_CASE("collect counts after delooping") {
  HallucinationCollector c;
  c.add("bye bye bye");
  c.add("bye");
  CHECK(c.stats().looped == 1);
  CHECK(c.table().at("bye") == 2);
  CHECK(c.unique_count() == 1);
}

TEST_CASE("empty corpus yields empty table") {
  HallucinationCollector c;
  CHECK(c.table().empty());
  CHECK(c.stats().records == 0);
}

TEST_CASE("unreadable records are tallied, never fatal") {
  HallucinationCollector c;
  c.add("ok");
  c.note_error();
  CHECK(c.stats().records == 2);
  CHECK(c.stats().errors == 1);
  CHECK(c.stats().retained == 1);
}

TEST_CASE("dual-criterion filtration marks exactly the low-probability frequent outputs") {
  FrequencyTable table;
  for (const auto& [text, logp] : kTopOutputs) table[text] = 100;  // all above count threshold
  BagOfHallucinations bag = filter(table, table_scorer(), "test-lm");
  std::set<std::string> got;
  for (const auto& e : bag.entries) got.insert(e.pattern.join());
  std::set<std::string> want = {
      "thanks for watching",
      "thank you for watching",
      "i m not sure what i m doing here",
      "subtitles by the amara org community",
      "subtitles by steamteamextra",
      "hello everyone welcome to my channel",
  };
  CHECK(got == want);
}

TEST_CASE("thresholds are strict") {
  SentenceScorer scorer = [](const NormalizedText& t) {
    return t.join() == "exactly ten" ? -10.0 : -20.70;
  };
  FrequencyTable table;
  table["subtitles by steamteamextra"] = 5;
  BagOfHallucinations bag = filter(table, scorer, "lm");
  CHECK(bag.entries.size() == 1);  // count 5 > 4

  table["subtitles by steamteamextra"] = 4;
  bag = filter(table, scorer, "lm");
  CHECK(bag.entries.empty());  // count 4 is not "more than four"

  table.clear();
  table["exactly ten"] = 100;
  bag = filter(table, scorer, "lm");
  CHECK(bag.entries.empty());  // -10.0 is not "lower than -10"
}

TEST_CASE("scoring failures exclude the entry and are counted") {
  SentenceScorer scorer = [](const NormalizedText& t) -> double {
    if (t.join() == "bad entry") throw std::runtime_error("no score");
    return -15.0;
  };
  FrequencyTable table;
  table["bad entry"] = 10;
  table["good entry"] = 10;
  std::uint64_t failures = 0;
  BagOfHallucinations bag = filter(table, scorer, "lm", 4, -10.0, &failures);
  CHECK(failures == 1);
  REQUIRE(bag.entries.size() == 1);
  CHECK(bag.entries[0].pattern.join() == "good entry");
}

TEST_CASE("filtration is order-independent and deterministic") {
  std::mt19937 rng(99);
  std::vector<std::string> texts;
  for (int i = 0; i < 50; ++i) texts.push_back("phrase num " + std::to_string(i));
  SentenceScorer scorer = [](const NormalizedText& t) {
    return -5.0 - static_cast<double>(t.join().size());
  };
  FrequencyTable table;
  for (const auto& t : texts) table[t] = 5 + rng() % 20;
  BagOfHallucinations a = filter(table, scorer, "lm");
  // rebuild the table in shuffled insertion order
  std::shuffle(texts.begin(), texts.end(), rng);
  FrequencyTable table2;
  for (const auto& t : texts) table2[t] = table[t];
  BagOfHallucinations b = filter(table2, scorer, "lm");
  CHECK(a.entries == b.entries);
  // sorted by count desc, then pattern
  for (std::size_t i = 1; i < a.entries.size(); ++i) {
    CHECK(a.entries[i - 1].count >= a.entries[i].count);
  }
}

TEST_CASE("save/load round trip") {
  FrequencyTable table;
  for (const auto& [text, logp] : kTopOutputs) table[text] = 100;
  BagOfHallucinations bag = filter(table, table_scorer(), "test-lm");
  bag.metadata.built_at = "2026-08-26T00:00:00Z";
  bag.metadata.corpus_digest = "deadbeef";
  std::ostringstream out;
  save_boh(bag, out);
  std::istringstream in(out.str());
  BagOfHallucinations loaded = load_boh(in);
  CHECK(loaded == bag);
}

TEST_CASE("load validates format_version and thresholds") {
  {
    std::istringstream in(R"({"format_version": 7, "metadata": {"lm": "x", "min_count": 4,
      "lm_threshold": -10.0}, "entries": []})");
    CHECK_THROWS_AS(load_boh(in), BoHError);
  }
  {
    // entry violating the recorded lm_threshold
    std::istringstream in(R"({"format_version": 1, "metadata": {"lm": "x", "min_count": 4,
      "lm_threshold": -10.0}, "entries": [{"pattern": "thank you", "count": 9, "lm_logp": -9.2}]})");
    CHECK_THROWS_AS(load_boh(in), BoHError);
  }
  {
    // entry violating min_count
    std::istringstream in(R"({"format_version": 1, "metadata": {"lm": "x", "min_count": 4,
      "lm_threshold": -10.0}, "entries": [{"pattern": "ok then", "count": 3, "lm_logp": -19.2}]})");
    CHECK_THROWS_AS(load_boh(in), BoHError);
  }
  {
    // minimal hand-written file
    std::istringstream in(R"({"format_version": 1, "metadata": {"lm": "x", "min_count": 4,
      "lm_threshold": -10.0}, "entries": [{"pattern": "thanks for watching", "count": 9,
      "lm_logp": -13.3}]})");
    BagOfHallucinations bag = load_boh(in);
    REQUIRE(bag.entries.size() == 1);
    CHECK(bag.entries[0].pattern.join() == "thanks for watching");
  }
  {
    // not JSON at all
    std::istringstream in("not json");
    CHECK_THROWS_AS(load_boh(in), BoHError);
  }
}
