#include <doctest.h>

#include <random>
#include <string>
#include <vector>

#include "hallclean/normalize.hpp"

using namespace hallclean;

namespace {

std::vector<std::string> toks(const NormalizedText& t) { return t.tokens; }

}  // namespace

TEST_CASE("apostrophes become spaces") {
  CHECK(toks(normalize("I'm sorry!")) == std::vector<std::string>{"i", "m", "sorry"});
  CHECK(toks(normalize("I'm not sure what I'm doing here")) ==
        std::vector<std::string>{"i", "m", "not", "sure", "what", "i", "m", "doing", "here"});
}

TEST_CASE("empty and symbol-only input") {
  CHECK(normalize("").empty());
  CHECK(normalize("...!!!").empty());
  CHECK(normalize("  \t\n ").empty());
  CHECK_FALSE(has_lexical_content(normalize("...!!!")));
}

TEST_CASE("bracketed content is deleted") {
  CHECK(toks(normalize("[Music] Thank You.")) == std::vector<std::string>{"thank", "you"});
  CHECK(toks(normalize("(applause) ok")) == std::vector<std::string>{"ok"});
  CHECK(toks(normalize("a [b] c (d) e")) == std::vector<std::string>{"a", "c", "e"});
  // leftmost-shortest, non-nested
  CHECK(toks(normalize("x [a [b] c] y")) == std::vector<std::string>{"x", "c", "y"});
  // unmatched opener is just punctuation
  CHECK(toks(normalize("a [b c")) == std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("bracket stripping can be disabled") {
  NormalizeConfig cfg;
  cfg.strip_brackets = false;
  CHECK(toks(normalize("[Music] ok", cfg)) == std::vector<std::string>{"music", "ok"});
}

TEST_CASE("digits are kept") {
  CHECK(toks(normalize("42")) == std::vector<std::string>{"42"});
  CHECK(has_lexical_content(normalize("42")));
  CHECK(toks(normalize("route 66!")) == std::vector<std::string>{"route", "66"});
}

TEST_CASE("diacritics are stripped, unicode lowercased") {
  CHECK(toks(normalize("Café")) == std::vector<std::string>{"cafe"});
  CHECK(toks(normalize("naïve Żółć")) == std::vector<std::string>{"naive", "zolc"});
  CHECK(toks(normalize("ÉLAN")) == std::vector<std::string>{"elan"});
  // combining mark form: e + U+0301
  CHECK(toks(normalize("cafe\xCC\x81")) == std::vector<std::string>{"cafe"});
}

TEST_CASE("normalization is idempotent") {
  std::mt19937 rng(7);
  const std::string pieces[] = {"Hello", "WORLD", "[x]", "(y)", "don't", "42", "!!!", "Café",
                                "a,b", "  ", "\t", "ok."};
  for (int iter = 0; iter < 500; ++iter) {
    std::string raw;
    int n = static_cast<int>(rng() % 8);
    for (int k = 0; k < n; ++k) {
      raw += pieces[rng() % std::size(pieces)];
      raw += ' ';
    }
    NormalizedText once = normalize(raw);
    NormalizedText twice = normalize(once.join());
    CHECK(once == twice);
    for (const auto& tok : once.tokens) {
      CHECK_FALSE(tok.empty());
      for (char c : tok) {
        bool word = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9');
        CHECK(word);
      }
    }
  }
}

TEST_CASE("has_lexical_content equals non-empty") {
  CHECK(has_lexical_content(normalize("ok")));
  CHECK_FALSE(has_lexical_content(normalize("")));
  CHECK_FALSE(has_lexical_content(normalize("[Music]")));
}
