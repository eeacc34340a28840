/**
 * vectionary
 *
 * This code is released under the
 * Apache License Version 2.0 http://www.apache.org/licenses/.
 */
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sstream>

#include "support/test_support.hpp"
#include "vectionary/error.hpp"
#include "vectionary/lexicon.hpp"

using namespace vectionary;
using testsupport::make_temp_dir;
using testsupport::write_text;

namespace {

LexiconSchema care_schema() {
  LexiconSchema schema;
  schema.word_column = "word";
  schema.foundations = {{FoundationId("care_harm"), "care_p", "care_sent"}};
  return schema;
}

LexiconEntry make_entry(const std::string& word, double p, double v) {
  LexiconEntry e;
  e.word = word;
  e.weights.emplace_back(FoundationId("care_harm"), FoundationWeight{p, v});
  return e;
}

const FoundationId kCare{"care_harm"};

}  // namespace

TEST_CASE("the worked relevance example") {
  // probability 0.40, sentiment -0.70 -> observed relevance -0.40
  LexiconEntry kill = make_entry("kill", 0.40, -0.70);
  CHECK(observed_relevance(kill, kCare) == doctest::Approx(-0.40).epsilon(1e-12));
  CHECK(observed_relevance(kill, kCare) == -0.40);
}

TEST_CASE("relevance sign rule") {
  CHECK(observed_relevance(make_entry("w", 0.0, -0.9), kCare) == 0.0);
  CHECK(observed_relevance(make_entry("w", 0.55, 0.30), kCare) == doctest::Approx(0.55));

  RelevanceOptions zero_positive;  // default
  CHECK(observed_relevance(make_entry("w", 0.3, 0.0), kCare, zero_positive) == doctest::Approx(0.3));
  RelevanceOptions zero_zero;
  zero_zero.zero_sentiment = ZeroSentimentPolicy::zero;
  CHECK(observed_relevance(make_entry("w", 0.3, 0.0), kCare, zero_zero) == 0.0);

  RelevanceOptions product;
  product.rule = RelevanceRule::product;
  CHECK(observed_relevance(make_entry("kill", 0.40, -0.70), kCare, product) ==
        doctest::Approx(-0.28));
}

TEST_CASE("relevance is odd in the sentiment sign") {
  testsupport::Gaussian g(21);
  for (int i = 0; i < 200; ++i) {
    double p = g.uniform();
    double v = g.uniform() * 2.0 - 1.0;
    if (v == 0.0) continue;
    double s_pos = observed_relevance(make_entry("w", p, v), kCare);
    double s_neg = observed_relevance(make_entry("w", p, -v), kCare);
    CHECK(s_pos == -s_neg);
    CHECK(std::abs(s_pos) == doctest::Approx(p));
  }
}

TEST_CASE("load_lexicon parses a delimited file") {
  auto dir = make_temp_dir("lex");
  write_text(dir / "lex.csv", "word,care_p,care_sent\nkill,0.40,-0.70\nhelp,0.25,0.80\n");
  auto entries = load_lexicon((dir / "lex.csv").string(), care_schema());
  REQUIRE(entries.size() == 2);
  CHECK(entries[0].word == "kill");
  CHECK(entries[0].find(kCare)->probability == doctest::Approx(0.40));
  CHECK(entries[0].find(kCare)->sentiment == doctest::Approx(-0.70));
}

TEST_CASE("load_lexicon sniffs tab delimiters") {
  auto dir = make_temp_dir("lex");
  write_text(dir / "lex.tsv", "word\tcare_p\tcare_sent\nkill\t0.4\t-0.7\n");
  auto entries = load_lexicon((dir / "lex.tsv").string(), care_schema());
  REQUIRE(entries.size() == 1);
  CHECK(observed_relevance(entries[0], kCare) == doctest::Approx(-0.4));
}

TEST_CASE("value bounds are enforced") {
  auto dir = make_temp_dir("lex");
  write_text(dir / "bad_p.csv", "word,care_p,care_sent\nkill,1.5,-0.7\n");
  try {
    load_lexicon((dir / "bad_p.csv").string(), care_schema());
    FAIL("expected ValueOutOfRange");
  } catch (const Error& e) {
    CHECK(e.code() == "ValueOutOfRange");
  }
  write_text(dir / "bad_v.csv", "word,care_p,care_sent\nkill,0.5,-1.7\n");
  CHECK_THROWS_AS(load_lexicon((dir / "bad_v.csv").string(), care_schema()), Error);
}

TEST_CASE("missing columns are reported") {
  auto dir = make_temp_dir("lex");
  write_text(dir / "lex.csv", "word,care_p\nkill,0.4\n");
  try {
    load_lexicon((dir / "lex.csv").string(), care_schema());
    FAIL("expected MissingColumn");
  } catch (const Error& e) {
    CHECK(e.code() == "MissingColumn");
  }
}

TEST_CASE("duplicate words: policy decides") {
  auto dir = make_temp_dir("lex");
  write_text(dir / "dup.csv", "word,care_p,care_sent\nkill,0.4,-0.7\nkill,0.9,0.9\n");
  LexiconSchema schema = care_schema();

  schema.duplicate_policy = DuplicatePolicy::keep_first;
  LexiconLoadReport report;
  auto entries = load_lexicon((dir / "dup.csv").string(), schema, &report);
  REQUIRE(entries.size() == 1);
  CHECK(report.duplicates_skipped == 1);
  CHECK(entries[0].find(kCare)->probability == doctest::Approx(0.4));

  schema.duplicate_policy = DuplicatePolicy::error;
  try {
    load_lexicon((dir / "dup.csv").string(), schema);
    FAIL("expected DuplicateWord");
  } catch (const Error& e) {
    CHECK(e.code() == "DuplicateWord");
  }
}

TEST_CASE("a full-size lexicon parses completely") {
  // 3,270 rows x 5 foundations, the shape of the real dictionary
  std::ostringstream file;
  file << "word";
  for (const auto& f : canonical_foundations()) file << ',' << f.name << "_p," << f.name << "_sent";
  file << '\n';
  testsupport::Gaussian g(5);
  for (int i = 0; i < 3270; ++i) {
    file << "word" << i;
    for (std::size_t k = 0; k < canonical_foundations().size(); ++k) {
      file << ',' << g.uniform() << ',' << (g.uniform() * 2.0 - 1.0);
    }
    file << '\n';
  }
  auto dir = make_temp_dir("lex");
  write_text(dir / "emfd.csv", file.str());

  LexiconSchema schema;
  for (const auto& f : canonical_foundations()) {
    schema.foundations.push_back({f, f.name + "_p", f.name + "_sent"});
  }
  auto entries = load_lexicon((dir / "emfd.csv").string(), schema);
  CHECK(entries.size() == 3270);
  for (const auto& e : entries) CHECK(e.weights.size() == 5);
}

TEST_CASE("relevance table restricts to vocabulary and accounts for every word") {
  auto dir = make_temp_dir("lex");
  write_text(dir / "glove.txt", "kill 1 0\nhelp 0 1\n");
  auto store = EmbeddingStore::load((dir / "glove.txt").string(), EmbeddingFormat::glove_text);

  std::vector<LexiconEntry> entries = {make_entry("kill", 0.4, -0.7),
                                       make_entry("help", 0.25, 0.8),
                                       make_entry("absent", 0.5, 0.5)};
  auto [table, coverage] = build_relevance_table(entries, kCare, store);
  CHECK(table.entries.size() == 2);
  CHECK(coverage.matched == 2);
  REQUIRE(coverage.dropped.size() == 1);
  CHECK(coverage.dropped[0].first == "absent");
  CHECK(table.entries.size() + coverage.dropped.size() == entries.size());
  CHECK(table.entries[0].second == doctest::Approx(-0.4));
}

TEST_CASE("empty intersection is fatal") {
  auto dir = make_temp_dir("lex");
  write_text(dir / "glove.txt", "other 1 0\n");
  auto store = EmbeddingStore::load((dir / "glove.txt").string(), EmbeddingFormat::glove_text);
  std::vector<LexiconEntry> entries = {make_entry("kill", 0.4, -0.7)};
  try {
    build_relevance_table(entries, kCare, store);
    FAIL("expected EmptyIntersection");
  } catch (const Error& e) {
    CHECK(e.code() == "EmptyIntersection");
  }
}

TEST_CASE("case-folded matching is opt-in") {
  auto dir = make_temp_dir("lex");
  write_text(dir / "glove.txt", "kill 1 0\n");
  auto store = EmbeddingStore::load((dir / "glove.txt").string(), EmbeddingFormat::glove_text);
  std::vector<LexiconEntry> entries = {make_entry("Kill", 0.4, -0.7)};

  CHECK_THROWS_AS(build_relevance_table(entries, kCare, store), Error);  // exact: no match

  MatchOptions fold;
  fold.case_fold = true;
  auto [table, coverage] = build_relevance_table(entries, kCare, store, fold);
  CHECK(coverage.matched == 1);
  CHECK(table.entries[0].first == "kill");
}
