#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace hallclean {

/// Canonical token form all algorithms operate on: lowercase tokens made of
/// letters and digits only, produced by normalize().
struct NormalizedText {
  std::vector<std::string> tokens;

  bool empty() const { return tokens.empty(); }
  std::size_t size() const { return tokens.size(); }

  std::string join() const {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (i) out += ' ';
      out += tokens[i];
    }
    return out;
  }

  friend bool operator==(const NormalizedText&, const NormalizedText&) = default;
};

struct NormalizeConfig {
  // Deletion of [...] and (...) content, as the basic normalizer does.
  bool strip_brackets = true;
};

namespace detail {

inline std::size_t utf8_decode(std::string_view s, std::size_t i, char32_t& cp) {
  unsigned char c = static_cast<unsigned char>(s[i]);
  if (c < 0x80) { cp = c; return 1; }
  std::size_t len = (c >= 0xF0) ? 4 : (c >= 0xE0) ? 3 : (c >= 0xC0) ? 2 : 1;
  if (len == 1 || i + len > s.size()) { cp = 0xFFFD; return 1; }
  static const char32_t mask[5] = {0, 0x7F, 0x1F, 0x0F, 0x07};
  char32_t v = c & mask[len];
  for (std::size_t k = 1; k < len; ++k) {
    unsigned char cc = static_cast<unsigned char>(s[i + k]);
    if ((cc & 0xC0) != 0x80) { cp = 0xFFFD; return 1; }
    v = (v << 6) | (cc & 0x3F);
  }
  cp = v;
  return len;
}

inline bool is_combining_mark(char32_t cp) {
  return (cp >= 0x0300 && cp <= 0x036F) || (cp >= 0x1AB0 && cp <= 0x1AFF) ||
         (cp >= 0x20D0 && cp <= 0x20FF) || (cp >= 0xFE20 && cp <= 0xFE2F);
}

// Compatibility decomposition + lowercase for the Latin ranges ASR output
// actually contains. Returns a short ASCII replacement, or empty when the
// codepoint passes through unchanged.
inline std::string_view latin_fold(char32_t cp) {
  // Latin-1 supplement, precomposed letters.
  switch (cp) {
    case 0xC0: case 0xC1: case 0xC2: case 0xC3: case 0xC4: case 0xC5:
    case 0xE0: case 0xE1: case 0xE2: case 0xE3: case 0xE4: case 0xE5: return "a";
    case 0xC7: case 0xE7: return "c";
    case 0xC8: case 0xC9: case 0xCA: case 0xCB:
    case 0xE8: case 0xE9: case 0xEA: case 0xEB: return "e";
    case 0xCC: case 0xCD: case 0xCE: case 0xCF:
    case 0xEC: case 0xED: case 0xEE: case 0xEF: return "i";
    case 0xD1: case 0xF1: return "n";
    case 0xD2: case 0xD3: case 0xD4: case 0xD5: case 0xD6:
    case 0xF2: case 0xF3: case 0xF4: case 0xF5: case 0xF6: return "o";
    case 0xD9: case 0xDA: case 0xDB: case 0xDC:
    case 0xF9: case 0xFA: case 0xFB: case 0xFC: return "u";
    case 0xDD: case 0xFD: case 0xFF: return "y";
    default: break;
  }
  if (cp >= 0x100 && cp <= 0x17F) {
    if (cp == 0x132 || cp == 0x133) return "ij";
    if (cp == 0x152 || cp == 0x153) return "oe";
    static const char* base =
        //  0123456789abcdef
        "aaaaaa" "cccccccc" "dddd"          // 0x100-0x111
        "eeeeeeeeee" "gggggggg" "hhhh"      // 0x112-0x127
        "iiiiiiiiii" "--" "jj" "kkk"        // 0x128-0x138 (ij handled above)
        "llllllllll" "nnnnnnnnn"            // 0x139-0x14B
        "oooooo" "--" "rrrrrr"              // 0x14C-0x159 (oe handled above)
        "ssssssss" "tttttt"                 // 0x15A-0x167
        "uuuuuuuuuuuu" "ww" "yyy" "zzzzzz"  // 0x168-0x17E
        "s";                                // 0x17F
    return {base + (cp - 0x100), 1};
  }
  return {};
}

inline char32_t lower_cp(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;        // Latin-1
  if (cp >= 0x391 && cp <= 0x3AB && cp != 0x3A2) return cp + 0x20;     // Greek
  if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;                    // Cyrillic
  if (cp >= 0x400 && cp <= 0x40F) return cp + 0x50;
  return cp;
}

inline bool is_word_cp(char32_t cp) {
  if (cp < 0x80)
    return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
  switch (cp) {
    case 0xDF: case 0xE6: case 0xF0: case 0xF8: case 0xFE: return true;  // ß æ ð ø þ
    default: break;
  }
  return (cp >= 0x3AC && cp <= 0x3CE) ||   // Greek
         (cp >= 0x430 && cp <= 0x45F) ||   // Cyrillic
         (cp >= 0x5D0 && cp <= 0x5EA) ||   // Hebrew
         (cp >= 0x620 && cp <= 0x64A) ||   // Arabic
         (cp >= 0x3040 && cp <= 0x30FF) || // kana
         (cp >= 0x4E00 && cp <= 0x9FFF) || // CJK
         (cp >= 0xAC00 && cp <= 0xD7A3);   // Hangul
}

inline void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

// Leftmost-shortest, non-nested bracket content removal. An opener without a
// matching closer stays put and is later turned into a space.
inline std::string strip_bracketed(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (c == '[' || c == '(') {
      char close = (c == '[') ? ']' : ')';
      std::size_t j = s.find(close, i + 1);
      if (j != std::string_view::npos) {
        i = j + 1;
        continue;
      }
    }
    out += c;
    ++i;
  }
  return out;
}

}  // namespace detail

/// Basic-normalizer transformation: bracket removal, lowercasing, diacritic
/// stripping, punctuation to spaces, whitespace tokenization. Total function;
/// empty or all-symbol input yields an empty token sequence.
inline NormalizedText normalize(std::string_view raw, const NormalizeConfig& cfg = {}) {
  std::string stripped;
  if (cfg.strip_brackets) {
    stripped = detail::strip_bracketed(raw);
    raw = stripped;
  }
  std::string flat;
  flat.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size();) {
    char32_t cp;
    i += detail::utf8_decode(raw, i, cp);
    if (detail::is_combining_mark(cp)) continue;
    cp = detail::lower_cp(cp);
    if (auto rep = detail::latin_fold(cp); !rep.empty()) {
      flat += rep;
      continue;
    }
    if (detail::is_word_cp(cp)) {
      detail::append_utf8(flat, cp);
    } else {
      flat += ' ';
    }
  }
  NormalizedText out;
  std::size_t pos = 0;
  while (pos < flat.size()) {
    while (pos < flat.size() && flat[pos] == ' ') ++pos;
    std::size_t end = pos;
    while (end < flat.size() && flat[end] != ' ') ++end;
    if (end > pos) out.tokens.emplace_back(flat.substr(pos, end - pos));
    pos = end;
  }
  return out;
}

/// True iff anything with letters or digits survived normalization.
/// Transcriptions built solely of symbols, punctuation or whitespace
/// normalize to empty and are not lexical content.
inline bool has_lexical_content(const NormalizedText& t) { return !t.empty(); }

}  // namespace hallclean
