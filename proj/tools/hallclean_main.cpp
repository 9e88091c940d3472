// Command-line frontend: build a Bag of Hallucinations from non-speech
// transcriptions, clean corpora with it, and report WER / hallucination
// statistics.

#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "hallclean/arpa.hpp"
#include "hallclean/boh.hpp"
#include "hallclean/corpus.hpp"
#include "hallclean/matcher.hpp"
#include "hallclean/metrics.hpp"
#include "hallclean/normalize.hpp"

namespace {

using namespace hallclean;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  return out;
}

std::uint64_t fnv1a(std::istream& in) {
  std::uint64_t h = 1469598103934665603ULL;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i)
      h = (h ^ static_cast<unsigned char>(buf[i])) * 1099511628211ULL;
    if (!in) break;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string build_timestamp() {
  std::time_t t;
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
    t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  } else {
    t = std::time(nullptr);
  }
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string pct1(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  return buf;
}

std::vector<TranscriptRecord> read_corpus_file(const std::string& path, bool lenient,
                                               std::vector<std::string>* warnings) {
  auto in = open_input(path);
  return read_corpus(in, lenient, warnings);
}

// ---- build-boh ----

struct BuildBohArgs {
  std::string corpus, lm, out;
  std::uint64_t min_count = 4;
  double lm_threshold = -10.0;
  std::string lm_id;
  bool lenient = false;
  bool no_brackets = false;
};

int cmd_build_boh(const BuildBohArgs& args) {
  ArpaModel model;
  {
    auto in = open_input(args.lm);
    model = load_arpa(in);
  }
  std::vector<std::string> warnings;
  auto records = read_corpus_file(args.corpus, args.lenient, &warnings);

  NormalizeConfig norm;
  norm.strip_brackets = !args.no_brackets;
  HallucinationCollector collector(norm);
  for (const auto& w : warnings) {
    std::cerr << "warning: " << w << "\n";
    collector.note_error();
  }
  for (const auto& r : records) collector.add(r.text);

  std::uint64_t scoring_failures = 0;
  std::string lm_id = args.lm_id.empty() ? args.lm : args.lm_id;
  BagOfHallucinations bag = filter(collector.table(), model, lm_id, args.min_count,
                                   args.lm_threshold, &scoring_failures);
  bag.metadata.built_at = build_timestamp();
  {
    auto in = open_input(args.corpus);
    bag.metadata.corpus_digest = hex64(fnv1a(in));
  }
  {
    auto out = open_output(args.out);
    save_boh(bag, out);
  }
  const auto& st = collector.stats();
  if (st.records == 0) std::cerr << "warning: empty corpus, wrote an empty bag\n";
  std::cout << "records          " << st.records << "\n"
            << "retained         " << st.retained << "\n"
            << "discarded        " << st.discarded << "\n"
            << "looped           " << st.looped << "\n"
            << "unique outputs   " << collector.unique_count() << "\n"
            << "entries kept     " << bag.entries.size() << "\n";
  if (scoring_failures) std::cout << "scoring failures " << scoring_failures << "\n";
  return kExitOk;
}

// ---- clean ----

struct CleanArgs {
  std::string corpus, boh, out;
  bool iterate = false;
  bool lenient = false;
  bool no_brackets = false;
  unsigned threads = 1;
  std::size_t min_unit = 1;
  std::size_t min_repeats = 2;
};

int cmd_clean(const CleanArgs& args) {
  BagOfHallucinations bag;
  {
    auto in = open_input(args.boh);
    bag = load_boh(in);
  }
  std::vector<std::string> warnings;
  auto records = read_corpus_file(args.corpus, args.lenient, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";

  PatternAutomaton automaton(bag.patterns());
  CleanConfig cfg;
  cfg.norm.strip_brackets = !args.no_brackets;
  cfg.loop.min_unit = args.min_unit;
  cfg.loop.min_repeats = args.min_repeats;
  cfg.iterate = args.iterate;

  std::vector<std::string> lines(records.size());
  unsigned nthreads = std::max(1u, args.threads);
  auto worker = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      CleanReport rep = clean_record(records[i], automaton, cfg);
      lines[i] = to_json(rep, automaton).dump();
    }
  };
  if (nthreads == 1 || records.size() < 2) {
    worker(0, records.size());
  } else {
    std::vector<std::thread> pool;
    std::size_t chunk = (records.size() + nthreads - 1) / nthreads;
    for (unsigned t = 0; t < nthreads; ++t) {
      std::size_t begin = std::min<std::size_t>(t * chunk, records.size());
      std::size_t end = std::min<std::size_t>(begin + chunk, records.size());
      if (begin < end) pool.emplace_back(worker, begin, end);
    }
    for (auto& th : pool) th.join();
  }
  auto out = open_output(args.out);
  for (const auto& line : lines) out << line << "\n";
  return kExitOk;
}

// ---- eval ----

struct EvalArgs {
  std::string corpus, boh;
  bool split_overlap = false;
  bool lenient = false;
  std::string mode = "exact";
  std::string wer_mode = "mass";  // edit-mass aggregation or mean of per-file rates
};

struct EvalRow {
  CorpusStats stats;
  std::optional<double> wer_pct;
  std::size_t skipped_no_reference = 0;
};

EvalRow eval_row(const std::vector<TranscriptRecord>& records,
                 const std::vector<std::string>& texts, const Detector& detector,
                 MatchMode mode, bool mean_of_rates) {
  EvalRow row;
  row.stats.loop_base = LoopBase::detected;
  std::vector<std::pair<NormalizedText, NormalizedText>> pairs;
  for (std::size_t i = 0; i < records.size(); ++i) {
    ++row.stats.records;
    DetectFlags f = detector(texts[i], mode);
    if (f.looped) ++row.stats.looped;
    if (f.in_boh) ++row.stats.in_boh;
    if (f.detected) ++row.stats.detected;
    if (!records[i].reference) {
      ++row.skipped_no_reference;
      continue;
    }
    NormalizedText ref = normalize(*records[i].reference);
    if (ref.empty()) {
      ++row.skipped_no_reference;
      continue;
    }
    pairs.emplace_back(std::move(ref), normalize(texts[i]));
  }
  if (!pairs.empty()) {
    if (mean_of_rates) {
      double sum = 0.0;
      for (const auto& [ref, hyp] : pairs) sum += wer(ref, hyp).rate();
      row.wer_pct = 100.0 * sum / static_cast<double>(pairs.size());
    } else {
      row.wer_pct = corpus_wer(pairs);
    }
  }
  return row;
}

int cmd_eval(const EvalArgs& args) {
  BagOfHallucinations bag;
  {
    auto in = open_input(args.boh);
    bag = load_boh(in);
  }
  std::vector<std::string> warnings;
  auto records = read_corpus_file(args.corpus, args.lenient, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  if (records.empty()) throw std::invalid_argument("empty corpus");

  MatchMode mode = args.mode == "contains" ? MatchMode::contains : MatchMode::exact;
  Detector detector(bag);
  PatternAutomaton automaton(bag.patterns());

  std::map<std::string, std::vector<std::size_t>> groups;
  if (args.split_overlap) {
    for (std::size_t i = 0; i < records.size(); ++i)
      groups[records[i].overlap.value_or("-")].push_back(i);
  } else {
    auto& all = groups["all"];
    for (std::size_t i = 0; i < records.size(); ++i) all.push_back(i);
  }

  std::printf("%-10s %-8s %12s %8s %8s %8s\n", "group", "config", "Det.Hall.[%]", "BoH[%]",
              "Loop[%]", "WER[%]");
  std::size_t skipped = 0;
  for (const auto& [name, idx] : groups) {
    std::vector<TranscriptRecord> sub;
    std::vector<std::string> raw_texts, cleaned_texts;
    for (std::size_t i : idx) {
      sub.push_back(records[i]);
      raw_texts.push_back(records[i].text);
      CleanReport rep = clean_record(records[i], automaton);
      cleaned_texts.push_back(rep.cleaned.join());
    }
    for (const char* config : {"raw", "cleaned"}) {
      const auto& texts = std::string(config) == "raw" ? raw_texts : cleaned_texts;
      EvalRow row = eval_row(sub, texts, detector, mode, args.wer_mode == "mean");
      std::printf("%-10s %-8s %12s %8s %8s %8s\n", name.c_str(), config,
                  pct1(row.stats.detected_pct()).c_str(), pct1(row.stats.boh_pct()).c_str(),
                  pct1(row.stats.looping_pct()).c_str(),
                  row.wer_pct ? pct1(*row.wer_pct).c_str() : "n/a");
      if (std::string(config) == "raw") skipped = row.skipped_no_reference;
    }
  }
  if (skipped)
    std::cerr << "warning: " << skipped << " record(s) without usable reference excluded from WER\n";
  return kExitOk;
}

// ---- stats ----

struct StatsArgs {
  std::string corpus, boh, top_n_file, json_out;
  bool lenient = false;
  std::string mode = "exact";
  std::string loop_base = "hallucinated";
};

int cmd_stats(const StatsArgs& args) {
  std::vector<std::string> warnings;
  auto records = read_corpus_file(args.corpus, args.lenient, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  if (records.empty()) throw std::invalid_argument("empty corpus");

  std::optional<Detector> detector;
  if (!args.boh.empty()) {
    auto in = open_input(args.boh);
    detector.emplace(load_boh(in));
  }
  std::vector<std::string> top_n;
  if (!args.top_n_file.empty()) {
    auto in = open_input(args.top_n_file);
    std::string line;
    while (std::getline(in, line)) {
      auto [t, _] = deloop(normalize(line));
      if (!t.empty()) top_n.push_back(t.join());
    }
  }
  std::map<std::string, std::string> pairing;
  {
    std::map<std::string, const TranscriptRecord*> by_id;
    for (const auto& r : records) by_id[r.id] = &r;
    for (const auto& r : records)
      if (r.paired_original_id)
        if (auto it = by_id.find(*r.paired_original_id); it != by_id.end())
          pairing[r.id] = it->second->text;
  }
  StatsConfig cfg;
  cfg.mode = args.mode == "contains" ? MatchMode::contains : MatchMode::exact;
  cfg.loop_base = args.loop_base == "detected" ? LoopBase::detected : LoopBase::hallucinated;
  CorpusStats s = corpus_stats(records, detector ? &*detector : nullptr, top_n, pairing, cfg);

  std::printf("records       %llu\n", static_cast<unsigned long long>(s.records));
  std::printf("Hallu.[%%]     %s\n", pct1(s.hallucinated_pct()).c_str());
  std::printf("Loop.[%%]      %s\n", pct1(s.looping_pct()).c_str());
  if (detector) {
    std::printf("Det.Hall.[%%]  %s\n", pct1(s.detected_pct()).c_str());
    std::printf("BoH[%%]        %s\n", pct1(s.boh_pct()).c_str());
  }
  if (!top_n.empty()) std::printf("Top%zu[%%]      %s\n", top_n.size(), pct1(s.top_n_pct()).c_str());
  if (auto orig = s.orig_match_pct())
    std::printf("Orig.[%%]      %s\n", pct1(*orig).c_str());
  else
    std::printf("Orig.[%%]      n/a\n");

  if (!args.json_out.empty()) {
    nlohmann::ordered_json j;
    j["records"] = s.records;
    j["hallucinated"] = s.hallucinated;
    j["looped"] = s.looped;
    j["detected"] = s.detected;
    j["in_boh"] = s.in_boh;
    j["top_n"] = s.top_n;
    j["hallucinated_pct"] = s.hallucinated_pct();
    j["looping_pct"] = s.looping_pct();
    j["detected_pct"] = s.detected_pct();
    j["boh_pct"] = s.boh_pct();
    j["top_n_pct"] = s.top_n_pct();
    if (auto orig = s.orig_match_pct())
      j["orig_match_pct"] = *orig;
    else
      j["orig_match_pct"] = nullptr;
    auto out = open_output(args.json_out);
    out << j.dump(2) << "\n";
  }
  return kExitOk;
}

// ---- score ----

int cmd_score(const std::string& lm_path, const std::string& phrase, bool no_sentinels) {
  ArpaModel model;
  {
    auto in = open_input(lm_path);
    model = load_arpa(in);
  }
  ScoreConfig cfg;
  cfg.with_sentinels = !no_sentinels;
  double logp = score_sentence(model, normalize(phrase), cfg);
  std::printf("%.6g\n", logp);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ASR hallucination removal: delooping + Bag of Hallucinations"};
  app.set_config("--config", "", "TOML-like key=value config file; flags override");
  app.require_subcommand(1);

  BuildBohArgs build_args;
  auto* build = app.add_subcommand("build-boh", "build a Bag of Hallucinations from a corpus");
  build->add_option("--corpus", build_args.corpus, "JSONL corpus of non-speech transcriptions")
      ->required();
  build->add_option("--lm", build_args.lm, "ARPA n-gram language model")->required();
  build->add_option("--out", build_args.out, "output BoH JSON file")->required();
  build->add_option("--min-count", build_args.min_count, "keep entries with count > N");
  build->add_option("--lm-threshold", build_args.lm_threshold, "keep entries with log10 p < T");
  build->add_option("--lm-id", build_args.lm_id, "model identifier stored in metadata");
  build->add_flag("--lenient", build_args.lenient, "skip malformed corpus lines");
  build->add_flag("--no-strip-brackets", build_args.no_brackets,
                  "keep [bracketed] and (parenthesized) content");

  CleanArgs clean_args;
  auto* clean = app.add_subcommand("clean", "deloop and remove BoH phrases from a corpus");
  clean->add_option("--corpus", clean_args.corpus, "JSONL corpus")->required();
  clean->add_option("--boh", clean_args.boh, "BoH JSON file")->required();
  clean->add_option("--out", clean_args.out, "output JSONL of clean reports")->required();
  clean->add_flag("--iterate", clean_args.iterate, "re-match after removal until fixpoint");
  clean->add_option("--threads", clean_args.threads, "worker threads (output is order-stable)");
  clean->add_flag("--lenient", clean_args.lenient, "skip malformed corpus lines");
  clean->add_flag("--no-strip-brackets", clean_args.no_brackets,
                  "keep [bracketed] and (parenthesized) content");
  clean->add_option("--min-unit", clean_args.min_unit, "minimum loop unit length flagged");
  clean->add_option("--min-repeats", clean_args.min_repeats, "minimum loop repeats flagged");

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "WER and detection table for raw vs cleaned");
  eval->add_option("--corpus", eval_args.corpus, "JSONL corpus with references")->required();
  eval->add_option("--boh", eval_args.boh, "BoH JSON file")->required();
  eval->add_flag("--split-overlap", eval_args.split_overlap, "split rows by meta.overlap NO|OL");
  eval->add_option("--mode", eval_args.mode, "BoH membership: exact|contains")
      ->check(CLI::IsMember({"exact", "contains"}));
  eval->add_option("--wer-mode", eval_args.wer_mode,
                   "corpus WER aggregation: mass (sum of edits / sum of ref lengths)"
                   " or mean (average of per-file rates)")
      ->check(CLI::IsMember({"mass", "mean"}));
  eval->add_flag("--lenient", eval_args.lenient, "skip malformed corpus lines");

  StatsArgs stats_args;
  auto* stats = app.add_subcommand("stats", "corpus hallucination statistics");
  stats->add_option("--corpus", stats_args.corpus, "JSONL corpus")->required();
  stats->add_option("--boh", stats_args.boh, "BoH JSON file (optional)");
  stats->add_option("--top-n", stats_args.top_n_file, "file with top-N phrases, one per line");
  stats->add_option("--json", stats_args.json_out, "write machine-readable stats JSON here");
  stats->add_option("--mode", stats_args.mode, "BoH membership: exact|contains")
      ->check(CLI::IsMember({"exact", "contains"}));
  stats->add_option("--loop-base", stats_args.loop_base,
                    "base for Loop%: hallucinated|detected")
      ->check(CLI::IsMember({"hallucinated", "detected"}));
  stats->add_flag("--lenient", stats_args.lenient, "skip malformed corpus lines");

  std::string score_lm, score_phrase;
  bool score_no_sentinels = false;
  auto* score = app.add_subcommand("score", "LM log10 probability of a phrase");
  score->add_option("--lm", score_lm, "ARPA n-gram language model")->required();
  score->add_option("phrase", score_phrase, "phrase to score")->required();
  score->add_flag("--no-sentinels", score_no_sentinels, "score without <s> ... </s>");

  try {
    app.parse(argc, argv);
    if (*build) return cmd_build_boh(build_args);
    if (*clean) return cmd_clean(clean_args);
    if (*eval) return cmd_eval(eval_args);
    if (*stats) return cmd_stats(stats_args);
    if (*score) return cmd_score(score_lm, score_phrase, score_no_sentinels);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ArpaParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const CorpusError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const BoHError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}
