#pragma once

#include <cstdint>
#include <functional>
#include <istream>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hallclean/deloop.hpp"
#include "hallclean/matcher.hpp"
#include "hallclean/normalize.hpp"
#include "hallclean/record.hpp"

namespace hallclean {

struct CorpusError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline bool valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    std::size_t len = c < 0x80 ? 1 : (c & 0xE0) == 0xC0 ? 2 : (c & 0xF0) == 0xE0 ? 3
                      : (c & 0xF8) == 0xF0 ? 4 : 0;
    if (len == 0 || i + len > s.size()) return false;
    for (std::size_t k = 1; k < len; ++k)
      if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) return false;
    i += len;
  }
  return true;
}

}  // namespace detail

/// Read a JSONL corpus: one {"id", "text", "reference"?, "meta"?} per line.
/// Under lenient mode malformed lines are skipped and reported via warnings;
/// duplicate ids and invalid UTF-8 are fatal either way.
inline std::vector<TranscriptRecord> read_corpus(std::istream& in, bool lenient = false,
                                                 std::vector<std::string>* warnings = nullptr) {
  std::vector<TranscriptRecord> records;
  std::set<std::string> ids;
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& msg) -> bool {
    std::string full = "line " + std::to_string(lineno) + ": " + msg;
    if (!lenient) throw CorpusError(full);
    if (warnings) warnings->push_back(full);
    return false;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (!detail::valid_utf8(line))
      throw CorpusError("line " + std::to_string(lineno) + ": invalid UTF-8");
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      fail("malformed JSON record");
      continue;
    }
    if (!j.contains("id") || !j["id"].is_string()) {
      fail("missing or non-string \"id\"");
      continue;
    }
    if (!j.contains("text") || !j["text"].is_string()) {
      fail("missing or non-string \"text\"");
      continue;
    }
    TranscriptRecord r;
    r.id = j["id"].get<std::string>();
    r.text = j["text"].get<std::string>();
    if (j.contains("reference") && j["reference"].is_string())
      r.reference = j["reference"].get<std::string>();
    if (j.contains("meta") && j["meta"].is_object()) {
      const auto& meta = j["meta"];
      if (meta.contains("category") && meta["category"].is_string())
        r.category = meta["category"].get<std::string>();
      if (meta.contains("duration_s") && meta["duration_s"].is_number())
        r.duration_s = meta["duration_s"].get<double>();
      if (meta.contains("augment_position") && meta["augment_position"].is_string())
        r.augment_position = meta["augment_position"].get<std::string>();
      if (meta.contains("overlap") && meta["overlap"].is_string())
        r.overlap = meta["overlap"].get<std::string>();
      if (meta.contains("paired_original_id") && meta["paired_original_id"].is_string())
        r.paired_original_id = meta["paired_original_id"].get<std::string>();
    }
    if (!ids.insert(r.id).second)
      throw CorpusError("line " + std::to_string(lineno) + ": duplicate id \"" + r.id + "\"");
    records.push_back(std::move(r));
  }
  return records;
}

/// May veto removal of an individual span (e.g. a forced-alignment check).
/// Receives the record id and the candidate span; true = allow removal.
using ConfirmationHook = std::function<bool(const std::string& record_id, const MatchSpan&)>;

struct CleanConfig {
  NormalizeConfig norm;
  DeloopConfig loop;
  bool iterate = false;  // re-match after removal until fixpoint
  ConfirmationHook confirm;  // default: always accept
};

struct CleanReport {
  std::string id;
  NormalizedText cleaned;
  std::vector<Collapse> loop_collapses;
  std::vector<MatchSpan> removed;  // positions relative to the text at removal time
  bool looped = false;
  bool in_boh = false;    // any pattern matched
  bool detected = false;  // looped OR in_boh
};

/// Fixed pipeline: normalize -> deloop -> match -> confirmation hook -> remove.
inline CleanReport clean_record(const TranscriptRecord& r, const PatternAutomaton& automaton,
                                const CleanConfig& cfg = {}) {
  CleanReport report;
  report.id = r.id;
  auto [delooped, loops] = deloop(normalize(r.text, cfg.norm));
  report.loop_collapses = loops.collapses;
  for (const auto& c : loops.collapses)
    if (c.unit_length >= cfg.loop.min_unit && c.repeat_count >= cfg.loop.min_repeats)
      report.looped = true;
  NormalizedText text = std::move(delooped);
  for (;;) {
    std::vector<MatchSpan> spans = automaton.find_all(text);
    if (cfg.confirm) {
      std::erase_if(spans, [&](const MatchSpan& s) { return !cfg.confirm(r.id, s); });
    }
    if (spans.empty()) break;
    report.in_boh = true;
    auto [cleaned, removal] = remove(text, std::move(spans));
    report.removed.insert(report.removed.end(), removal.kept.begin(), removal.kept.end());
    text = std::move(cleaned);
    if (!cfg.iterate) break;
  }
  report.cleaned = std::move(text);
  report.detected = report.looped || report.in_boh;
  return report;
}

inline nlohmann::ordered_json to_json(const CleanReport& r, const PatternAutomaton& automaton) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["cleaned_text"] = r.cleaned.join();
  j["flags"] = {{"looped", r.looped}, {"in_boh", r.in_boh}, {"detected", r.detected}};
  auto& loops = j["loops"] = nlohmann::ordered_json::array();
  for (const auto& c : r.loop_collapses)
    loops.push_back({{"start", c.start}, {"unit_length", c.unit_length},
                     {"repeat_count", c.repeat_count}});
  auto& removed = j["removed"] = nlohmann::ordered_json::array();
  for (const auto& s : r.removed)
    removed.push_back({{"pattern", automaton.pattern(s.pattern_id).join()},
                       {"start", s.start},
                       {"end", s.end}});
  return j;
}

inline void write_clean_report(std::ostream& out, const CleanReport& r,
                               const PatternAutomaton& automaton) {
  out << to_json(r, automaton).dump() << "\n";
}

}  // namespace hallclean
