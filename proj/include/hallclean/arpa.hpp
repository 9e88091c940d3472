#pragma once

#include <charconv>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "hallclean/normalize.hpp"

namespace hallclean {

struct ArpaParseError : std::runtime_error {
  ArpaParseError(std::size_t line, const std::string& what)
      : std::runtime_error("ARPA parse error at line " + std::to_string(line) + ": " + what),
        line_number(line) {}
  std::size_t line_number;
};

struct ScoringError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr std::string_view kSentenceStart = "<s>";
inline constexpr std::string_view kSentenceEnd = "</s>";
inline constexpr std::string_view kUnknown = "<unk>";

struct ArpaEntry {
  double logp = 0.0;
  double backoff = 0.0;
  bool has_backoff = false;
};

/// Backoff n-gram model read from an ARPA file. Immutable after load;
/// concurrent scoring is safe.
class ArpaModel {
 public:
  struct Line {
    std::string ngram;  // space-joined tokens
    ArpaEntry entry;
  };

  int max_order() const { return max_order_; }

  const ArpaEntry* find(const std::string& ngram) const {
    auto it = table_.find(ngram);
    return it == table_.end() ? nullptr : &it->second;
  }

  bool in_vocab(const std::string& token) const { return vocab_.contains(token); }
  bool has_unknown() const { return vocab_.contains(std::string(kUnknown)); }

  /// Entries per order, in file order (serialization reproduces the input).
  const std::vector<std::vector<Line>>& sections() const { return sections_; }

  friend ArpaModel load_arpa(std::istream& in);

 private:
  int max_order_ = 0;
  std::unordered_map<std::string, ArpaEntry> table_;
  std::unordered_set<std::string> vocab_;
  std::vector<std::vector<Line>> sections_;  // index 0 = unigrams
};

namespace detail {

inline std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

inline bool parse_double(const std::string& s, double& out) {
  try {
    std::size_t pos = 0;
    out = std::stod(s, &pos);
    return pos == s.size();
  } catch (...) {
    return false;
  }
}

}  // namespace detail

inline ArpaModel load_arpa(std::istream& in) {
  ArpaModel m;
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::uint64_t> declared;

  // Preamble up to \data\.
  bool found_data = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line == "\\data\\") { found_data = true; break; }
  }
  if (!found_data) throw ArpaParseError(lineno, "missing \\data\\ header");

  // ngram N=count declarations.
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line.rfind("ngram ", 0) != 0) break;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ArpaParseError(lineno, "malformed ngram count line");
    int order = 0;
    std::uint64_t count = 0;
    try {
      order = std::stoi(line.substr(6, eq - 6));
      count = std::stoull(line.substr(eq + 1));
    } catch (...) {
      throw ArpaParseError(lineno, "malformed ngram count line");
    }
    if (order != static_cast<int>(declared.size()) + 1)
      throw ArpaParseError(lineno, "ngram orders must be declared 1..N without gaps");
    declared.push_back(count);
  }
  if (declared.empty()) throw ArpaParseError(lineno, "no ngram counts declared");
  m.max_order_ = static_cast<int>(declared.size());
  m.sections_.resize(declared.size());

  // Per-order sections, ending at \end\.
  int current = 0;  // order being read; 0 = between sections
  bool ended = false;
  auto expect_section = [&](int order) {
    if (order != current + 1)
      throw ArpaParseError(lineno, "expected \\" + std::to_string(current + 1) + "-grams: section");
    if (order > m.max_order_)
      throw ArpaParseError(lineno, "section order exceeds declared maximum");
  };
  do {
    if (line.empty()) continue;
    if (line == "\\end\\") { ended = true; break; }
    if (line.size() > 1 && line[0] == '\\' && line.find("-grams:") != std::string::npos) {
      int order = 0;
      try {
        order = std::stoi(line.substr(1));
      } catch (...) {
        throw ArpaParseError(lineno, "malformed section header");
      }
      expect_section(order);
      current = order;
      continue;
    }
    if (current == 0) throw ArpaParseError(lineno, "entry before any section header");
    auto fields = detail::split_ws(line);
    const auto order = static_cast<std::size_t>(current);
    if (fields.size() != order + 1 && fields.size() != order + 2)
      throw ArpaParseError(lineno, "wrong field count for " + std::to_string(current) + "-gram");
    ArpaEntry e;
    if (!detail::parse_double(fields[0], e.logp))
      throw ArpaParseError(lineno, "non-numeric log probability");
    if (e.logp > 0.0) throw ArpaParseError(lineno, "positive log probability");
    if (fields.size() == order + 2) {
      if (!detail::parse_double(fields.back(), e.backoff))
        throw ArpaParseError(lineno, "non-numeric backoff weight");
      e.has_backoff = true;
    }
    std::string ngram;
    for (std::size_t k = 1; k <= order; ++k) {
      if (k > 1) ngram += ' ';
      ngram += fields[k];
    }
    if (current == 1) {
      m.vocab_.insert(fields[1]);
    }
    if (!m.table_.emplace(ngram, e).second)
      throw ArpaParseError(lineno, "duplicate n-gram: " + ngram);
    m.sections_[order - 1].push_back({std::move(ngram), e});
  } while (++lineno, std::getline(in, line));
  if (!ended) throw ArpaParseError(lineno, "missing \\end\\");

  for (int o = 1; o <= m.max_order_; ++o) {
    if (m.sections_[static_cast<std::size_t>(o - 1)].size() != declared[static_cast<std::size_t>(o - 1)])
      throw ArpaParseError(lineno, "declared count for order " + std::to_string(o) +
                                       " does not match parsed entries");
  }
  // Higher-order grams may only mention known words or sentinels.
  for (int o = 2; o <= m.max_order_; ++o) {
    for (const auto& ln : m.sections_[static_cast<std::size_t>(o - 1)]) {
      for (const auto& tok : detail::split_ws(ln.ngram)) {
        if (!m.vocab_.contains(tok) && tok != kSentenceStart && tok != kSentenceEnd &&
            tok != kUnknown)
          throw ArpaParseError(lineno, "n-gram token not in unigram vocabulary: " + tok);
      }
    }
  }
  return m;
}

namespace detail {

// Shortest round-trip decimal representation.
inline std::string format_double(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

}  // namespace detail

inline void save_arpa(const ArpaModel& m, std::ostream& out) {
  out << "\\data\\\n";
  for (int o = 1; o <= m.max_order(); ++o)
    out << "ngram " << o << "=" << m.sections()[static_cast<std::size_t>(o - 1)].size() << "\n";
  for (int o = 1; o <= m.max_order(); ++o) {
    out << "\\" << o << "-grams:\n";
    for (const auto& ln : m.sections()[static_cast<std::size_t>(o - 1)]) {
      out << detail::format_double(ln.entry.logp) << "\t" << ln.ngram;
      if (ln.entry.has_backoff) out << "\t" << detail::format_double(ln.entry.backoff);
      out << "\n";
    }
  }
  out << "\\end\\\n";
}

struct ScoreConfig {
  bool with_sentinels = true;  // wrap the sentence in <s> ... </s>
};

namespace detail {

inline std::string join_tokens(std::span<const std::string> toks) {
  std::string out;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (i) out += ' ';
    out += toks[i];
  }
  return out;
}

// logp of `word` given `history`, standard backoff recursion.
inline double conditional_logp(const ArpaModel& m, std::span<const std::string> history,
                               const std::string& word) {
  std::string full = history.empty() ? word : join_tokens(history) + " " + word;
  if (const auto* e = m.find(full)) return e->logp;
  if (history.empty())
    throw ScoringError("token has no unigram entry: " + word);
  double bo = 0.0;
  if (const auto* h = m.find(join_tokens(history)); h && h->has_backoff) bo = h->backoff;
  return bo + conditional_logp(m, history.subspan(1), word);
}

}  // namespace detail

/// Whole-sentence log10 probability of <s> t </s> with backoff. Out-of-vocabulary
/// tokens map to <unk>; a model without <unk> throws ScoringError on OOV input.
inline double score_sentence(const ArpaModel& m, const NormalizedText& t,
                             const ScoreConfig& cfg = {}) {
  std::vector<std::string> words;
  words.reserve(t.size() + 2);
  if (cfg.with_sentinels) words.emplace_back(kSentenceStart);
  for (const auto& tok : t.tokens) {
    if (m.in_vocab(tok)) {
      words.push_back(tok);
    } else if (m.has_unknown()) {
      words.emplace_back(kUnknown);
    } else {
      throw ScoringError("out-of-vocabulary token and model lacks <unk>: " + tok);
    }
  }
  if (cfg.with_sentinels) words.emplace_back(kSentenceEnd);

  const std::size_t ctx_max = static_cast<std::size_t>(m.max_order()) - 1;
  double total = 0.0;
  std::size_t first = cfg.with_sentinels ? 1 : 0;  // <s> is context only
  for (std::size_t i = first; i < words.size(); ++i) {
    std::size_t hist_len = std::min(i, ctx_max);
    std::span<const std::string> hist(words.data() + (i - hist_len), hist_len);
    total += detail::conditional_logp(m, hist, words[i]);
  }
  return total;
}

}  // namespace hallclean
