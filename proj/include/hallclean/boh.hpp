#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <set>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hallclean/arpa.hpp"
#include "hallclean/deloop.hpp"
#include "hallclean/normalize.hpp"

namespace hallclean {

struct BoHError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Frequency table of delooped hallucination texts, keyed by space-joined
/// tokens. Ordered map so iteration (and everything built from it) is
/// deterministic regardless of ingestion order.
using FrequencyTable = std::map<std::string, std::uint64_t>;

struct CollectStats {
  std::uint64_t records = 0;
  std::uint64_t retained = 0;   // hallucinations with lexical content
  std::uint64_t discarded = 0;  // symbol/whitespace-only outputs
  std::uint64_t looped = 0;
  std::uint64_t errors = 0;  // unreadable records skipped upstream
};

/// Accumulates hallucination counts from raw non-speech transcriptions:
/// normalize, drop non-lexical outputs, deloop, count.
class HallucinationCollector {
 public:
  explicit HallucinationCollector(NormalizeConfig norm = {}) : norm_(norm) {}

  void add(std::string_view raw) {
    ++stats_.records;
    NormalizedText t = normalize(raw, norm_);
    if (!has_lexical_content(t)) {
      ++stats_.discarded;
      return;
    }
    ++stats_.retained;
    auto [delooped, report] = deloop(std::move(t));
    if (report.looped()) ++stats_.looped;
    ++table_[delooped.join()];
  }

  void note_error() {
    ++stats_.records;
    ++stats_.errors;
  }

  const FrequencyTable& table() const { return table_; }
  const CollectStats& stats() const { return stats_; }
  std::uint64_t unique_count() const { return table_.size(); }

 private:
  NormalizeConfig norm_;
  FrequencyTable table_;
  CollectStats stats_;
};

struct BoHEntry {
  NormalizedText pattern;
  std::uint64_t count = 0;
  double lm_logp = 0.0;

  friend bool operator==(const BoHEntry&, const BoHEntry&) = default;
};

struct BoHMetadata {
  int format_version = 1;
  std::string lm_id;
  std::uint64_t min_count = 4;    // kept iff count > min_count
  double lm_threshold = -10.0;    // kept iff lm_logp < lm_threshold
  std::string built_at;
  std::string corpus_digest;

  friend bool operator==(const BoHMetadata&, const BoHMetadata&) = default;
};

struct BagOfHallucinations {
  BoHMetadata metadata;
  std::vector<BoHEntry> entries;  // count desc, pattern asc

  std::vector<NormalizedText> patterns() const {
    std::vector<NormalizedText> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.pattern);
    return out;
  }

  bool contains(const NormalizedText& t) const {
    for (const auto& e : entries)
      if (e.pattern == t) return true;
    return false;
  }

  friend bool operator==(const BagOfHallucinations&, const BagOfHallucinations&) = default;
};

using SentenceScorer = std::function<double(const NormalizedText&)>;

/// Dual-criterion filtration: an entry survives iff it occurred strictly more
/// than min_count times and its LM log10 probability is strictly below
/// lm_threshold. Entries the scorer rejects are skipped and tallied.
inline BagOfHallucinations filter(const FrequencyTable& table, const SentenceScorer& scorer,
                                  const std::string& lm_id, std::uint64_t min_count = 4,
                                  double lm_threshold = -10.0,
                                  std::uint64_t* scoring_failures = nullptr) {
  BagOfHallucinations bag;
  bag.metadata.lm_id = lm_id;
  bag.metadata.min_count = min_count;
  bag.metadata.lm_threshold = lm_threshold;
  for (const auto& [joined, count] : table) {
    if (count <= min_count) continue;
    NormalizedText t = normalize(joined);
    double logp;
    try {
      logp = scorer(t);
    } catch (const std::exception&) {
      if (scoring_failures) ++*scoring_failures;
      continue;
    }
    if (logp < lm_threshold) bag.entries.push_back({std::move(t), count, logp});
  }
  std::sort(bag.entries.begin(), bag.entries.end(), [](const BoHEntry& a, const BoHEntry& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.pattern.tokens < b.pattern.tokens;
  });
  return bag;
}

inline BagOfHallucinations filter(const FrequencyTable& table, const ArpaModel& model,
                                  const std::string& lm_id, std::uint64_t min_count = 4,
                                  double lm_threshold = -10.0,
                                  std::uint64_t* scoring_failures = nullptr) {
  return filter(
      table, [&model](const NormalizedText& t) { return score_sentence(model, t); }, lm_id,
      min_count, lm_threshold, scoring_failures);
}

inline void save_boh(const BagOfHallucinations& bag, std::ostream& out) {
  nlohmann::ordered_json j;
  j["format_version"] = bag.metadata.format_version;
  j["metadata"] = {{"lm", bag.metadata.lm_id},
                   {"min_count", bag.metadata.min_count},
                   {"lm_threshold", bag.metadata.lm_threshold},
                   {"built_at", bag.metadata.built_at},
                   {"source_corpus_digest", bag.metadata.corpus_digest}};
  auto& entries = j["entries"] = nlohmann::ordered_json::array();
  for (const auto& e : bag.entries)
    entries.push_back({{"pattern", e.pattern.join()}, {"count", e.count}, {"lm_logp", e.lm_logp}});
  out << j.dump(2) << "\n";
}

inline BagOfHallucinations load_boh(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw BoHError(std::string("invalid BoH file: ") + e.what());
  }
  BagOfHallucinations bag;
  try {
    int version = j.at("format_version").get<int>();
    if (version != 1)
      throw BoHError("unknown BoH format_version " + std::to_string(version));
    const auto& md = j.at("metadata");
    bag.metadata.format_version = version;
    bag.metadata.lm_id = md.at("lm").get<std::string>();
    bag.metadata.min_count = md.at("min_count").get<std::uint64_t>();
    bag.metadata.lm_threshold = md.at("lm_threshold").get<double>();
    bag.metadata.built_at = md.value("built_at", "");
    bag.metadata.corpus_digest = md.value("source_corpus_digest", "");
    for (const auto& je : j.at("entries")) {
      BoHEntry e;
      e.pattern = normalize(je.at("pattern").get<std::string>());
      e.count = je.at("count").get<std::uint64_t>();
      e.lm_logp = je.at("lm_logp").get<double>();
      if (e.pattern.empty()) throw BoHError("BoH entry with empty pattern");
      if (e.count <= bag.metadata.min_count)
        throw BoHError("BoH entry '" + e.pattern.join() + "' violates recorded min_count");
      if (e.lm_logp >= bag.metadata.lm_threshold)
        throw BoHError("BoH entry '" + e.pattern.join() + "' violates recorded lm_threshold");
      bag.entries.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw BoHError(std::string("BoH schema violation: ") + e.what());
  }
  std::set<std::string> seen;
  for (const auto& e : bag.entries)
    if (!seen.insert(e.pattern.join()).second)
      throw BoHError("duplicate BoH pattern: " + e.pattern.join());
  return bag;
}

}  // namespace hallclean
