#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "hallclean/boh.hpp"
#include "hallclean/deloop.hpp"
#include "hallclean/matcher.hpp"
#include "hallclean/normalize.hpp"
#include "hallclean/record.hpp"

namespace hallclean {

struct MetricError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EditCounts {
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::size_t ref_len = 0;
  std::size_t hyp_len = 0;

  std::size_t total() const { return substitutions + deletions + insertions; }

  /// (S+D+I)/ref_len; undefined on an empty reference.
  double rate() const {
    if (ref_len == 0) throw MetricError("WER rate undefined for empty reference");
    return static_cast<double>(total()) / static_cast<double>(ref_len);
  }
};

/// Minimal-cost alignment with unit costs. Among minimal alignments the
/// backtrace prefers substitution over deletion over insertion.
inline EditCounts wer(const NormalizedText& ref, const NormalizedText& hyp) {
  const std::size_t n = ref.size(), m = hyp.size();
  std::vector<std::vector<std::size_t>> d(n + 1, std::vector<std::size_t>(m + 1));
  for (std::size_t i = 0; i <= n; ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= m; ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      std::size_t sub = d[i - 1][j - 1] + (ref.tokens[i - 1] != hyp.tokens[j - 1] ? 1 : 0);
      std::size_t del = d[i - 1][j] + 1;
      std::size_t ins = d[i][j - 1] + 1;
      d[i][j] = std::min({sub, del, ins});
    }
  }
  EditCounts c;
  c.ref_len = n;
  c.hyp_len = m;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      std::size_t step = (ref.tokens[i - 1] != hyp.tokens[j - 1] ? 1 : 0);
      if (d[i][j] == d[i - 1][j - 1] + step) {
        if (step) ++c.substitutions;
        --i;
        --j;
        continue;
      }
    }
    if (i > 0 && d[i][j] == d[i - 1][j] + 1) {
      ++c.deletions;
      --i;
      continue;
    }
    ++c.insertions;
    --j;
  }
  return c;
}

/// Corpus WER as a percentage, aggregated by edit mass:
/// sum(S+D+I) / sum(ref_len) * 100.
inline double corpus_wer(const std::vector<std::pair<NormalizedText, NormalizedText>>& pairs) {
  if (pairs.empty()) throw MetricError("corpus WER undefined for an empty pair stream");
  std::size_t edits = 0, ref_mass = 0;
  for (const auto& [ref, hyp] : pairs) {
    if (ref.empty()) throw MetricError("corpus WER requires non-empty references");
    EditCounts c = wer(ref, hyp);
    edits += c.total();
    ref_mass += c.ref_len;
  }
  return 100.0 * static_cast<double>(edits) / static_cast<double>(ref_mass);
}

enum class MatchMode { exact, contains };

struct DetectFlags {
  bool looped = false;
  bool in_boh = false;
  bool detected = false;  // looped OR in_boh
};

/// Detection = union of detected looping and BoH membership of the
/// (delooped, normalized) transcription.
class Detector {
 public:
  explicit Detector(const BagOfHallucinations& bag, NormalizeConfig norm = {},
                    DeloopConfig loop = {})
      : norm_(norm), loop_(loop) {
    for (const auto& e : bag.entries) exact_.insert(e.pattern.join());
    if (!bag.entries.empty())
      automaton_ = std::make_unique<PatternAutomaton>(bag.patterns());
  }

  DetectFlags operator()(std::string_view raw, MatchMode mode = MatchMode::exact) const {
    DetectFlags flags;
    NormalizedText t = normalize(raw, norm_);
    auto [delooped, report] = deloop(std::move(t));
    for (const auto& c : report.collapses)
      if (c.unit_length >= loop_.min_unit && c.repeat_count >= loop_.min_repeats)
        flags.looped = true;
    if (mode == MatchMode::exact) {
      flags.in_boh = exact_.contains(delooped.join()) && !delooped.empty();
    } else {
      flags.in_boh = automaton_ && !automaton_->find_all(delooped).empty();
    }
    flags.detected = flags.looped || flags.in_boh;
    return flags;
  }

  const PatternAutomaton* automaton() const { return automaton_.get(); }

 private:
  NormalizeConfig norm_;
  DeloopConfig loop_;
  std::set<std::string> exact_;
  std::unique_ptr<PatternAutomaton> automaton_;
};

enum class LoopBase { hallucinated, detected };

struct CorpusStats {
  std::uint64_t records = 0;
  std::uint64_t hallucinated = 0;  // lexical content after normalization
  std::uint64_t looped = 0;
  std::uint64_t in_boh = 0;
  std::uint64_t detected = 0;
  std::uint64_t top_n = 0;
  std::uint64_t orig_matched = 0;
  bool pairing_available = false;
  LoopBase loop_base = LoopBase::hallucinated;

  static double pct(std::uint64_t part, std::uint64_t base) {
    return base == 0 ? 0.0 : 100.0 * static_cast<double>(part) / static_cast<double>(base);
  }
  double hallucinated_pct() const { return pct(hallucinated, records); }
  double detected_pct() const { return pct(detected, records); }
  double boh_pct() const { return pct(in_boh, detected); }
  double looping_pct() const {
    return loop_base == LoopBase::detected ? pct(looped, detected) : pct(looped, hallucinated);
  }
  double top_n_pct() const { return pct(top_n, hallucinated); }
  std::optional<double> orig_match_pct() const {
    if (!pairing_available) return std::nullopt;
    return pct(orig_matched, hallucinated);
  }
};

struct StatsConfig {
  NormalizeConfig norm;
  DeloopConfig loop;
  MatchMode mode = MatchMode::exact;
  LoopBase loop_base = LoopBase::hallucinated;
};

/// Corpus-level percentages. `top_n` holds space-joined delooped texts;
/// `pairing` maps a record id to its paired original's raw text. Pass a null
/// detector when no bag is available (BoH/detection columns stay zero).
inline CorpusStats corpus_stats(const std::vector<TranscriptRecord>& corpus,
                                const Detector* detector,
                                const std::vector<std::string>& top_n,
                                const std::map<std::string, std::string>& pairing,
                                const StatsConfig& cfg = {}) {
  CorpusStats s;
  s.loop_base = cfg.loop_base;
  s.pairing_available = !pairing.empty();
  std::set<std::string> top(top_n.begin(), top_n.end());
  for (const auto& r : corpus) {
    ++s.records;
    NormalizedText t = normalize(r.text, cfg.norm);
    if (!has_lexical_content(t)) continue;
    ++s.hallucinated;
    auto [delooped, report] = deloop(std::move(t));
    bool rec_looped = false;
    for (const auto& c : report.collapses)
      if (c.unit_length >= cfg.loop.min_unit && c.repeat_count >= cfg.loop.min_repeats)
        rec_looped = true;
    if (rec_looped) ++s.looped;
    bool rec_in_boh = false;
    if (detector) {
      DetectFlags flags = (*detector)(r.text, cfg.mode);
      rec_in_boh = flags.in_boh;
    }
    if (rec_in_boh) ++s.in_boh;
    if (rec_looped || rec_in_boh) ++s.detected;
    if (top.contains(delooped.join())) ++s.top_n;
    if (auto it = pairing.find(r.id); it != pairing.end()) {
      auto [orig, _] = deloop(normalize(it->second, cfg.norm));
      if (orig == delooped) ++s.orig_matched;
    }
  }
  return s;
}

}  // namespace hallclean
