#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "wctg/corpus.hpp"
#include "wctg/errors.hpp"

using namespace wctg;

TEST_CASE("tokenize lowercases and splits on non-alphanumerics") {
  CHECK(tokenize("Good, movie!") == std::vector<std::string>{"good", "movie"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("A.B 3x") == std::vector<std::string>{"a", "b", "3x"});
  CHECK(tokenize("Don't\tstop") == std::vector<std::string>{"don't", "stop"});
}

TEST_CASE("tokenize drops configured stopwords") {
  PreprocessConfig cfg;
  cfg.stopwords = {"the", "a"};
  CHECK(tokenize("The cat and a dog", cfg) == std::vector<std::string>{"cat", "and", "dog"});
}

TEST_CASE("tokenize is idempotent on its joined output") {
  std::mt19937_64 rng(3);
  const std::string alphabet = "aZ9' ,.!?-\tQx_";
  for (int trial = 0; trial < 200; ++trial) {
    std::string text;
    for (int i = 0; i < 40; ++i) text.push_back(alphabet[rng() % alphabet.size()]);
    const auto once = tokenize(text);
    std::string joined;
    for (const auto& t : once) joined += t + " ";
    CHECK(tokenize(joined) == once);
  }
}

TEST_CASE("load_corpus builds vocabulary in first-occurrence order") {
  const auto c = fixtures::corpus_from_tsv("d1\ttrain\tpos\tGood movie\nd2\ttest\tneg\tBad\n");
  REQUIRE(c.size() == 2);
  CHECK(c.vocabulary().words() == std::vector<std::string>{"good", "movie", "bad"});
  CHECK(*c.vocabulary().find("bad") == 2);
  CHECK(c.labels() == std::vector<std::string>{"pos", "neg"});
  CHECK(c.token_ids(0) == std::vector<std::size_t>{0, 1});
}

TEST_CASE("load_corpus skips comments and rejects bad input") {
  CHECK_NOTHROW(fixtures::corpus_from_tsv("# header\nd1\ttrain\tpos\tx\nd2\ttest\tneg\ty\n"));
  CHECK_THROWS_WITH_AS(fixtures::corpus_from_tsv(""), "no documents", DataError);
  try {
    fixtures::corpus_from_tsv("d1\ttrain\tpos\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 1);
  }
  CHECK_THROWS_AS(fixtures::corpus_from_tsv("d1\ttrain\tp\ta\nd1\ttest\tp\tb\n"), ParseError);
  CHECK_THROWS_WITH_AS(fixtures::corpus_from_tsv("d1\ttrain\tp\t!!!\nd2\ttest\tp\tb\n"),
                       doctest::Contains("d1"), ParseError);
  CHECK_THROWS_AS(fixtures::corpus_from_tsv("d1\tdev\tp\ta\n"), ParseError);
  CHECK_THROWS_AS(fixtures::corpus_from_tsv("d1\ttrain\tp\ta\n"), DataError);  // no test doc
}

TEST_CASE("vocabulary ids are stable across repeated loads") {
  std::mt19937_64 rng(11);
  const auto c = fixtures::random_corpus(rng);
  std::string tsv;
  for (const auto& d : c.documents()) {
    tsv += d.id + "\t" + std::string(to_string(d.split)) + "\t" + d.label + "\t";
    for (const auto& t : d.tokens) tsv += t + " ";
    tsv += "\n";
  }
  const auto a = fixtures::corpus_from_tsv(tsv);
  const auto b = fixtures::corpus_from_tsv(tsv);
  CHECK(a.vocabulary().words() == b.vocabulary().words());
  std::set<std::size_t> ids;
  for (std::size_t i = 0; i < a.size(); ++i) ids.insert(a.token_ids(i).begin(), a.token_ids(i).end());
  CHECK(ids.size() == a.vocabulary().size());
  CHECK(*ids.rbegin() == a.vocabulary().size() - 1);
}

TEST_CASE("prune_vocabulary") {
  const auto c = fixtures::token_corpus({{"common", "rare"}, {"common", "word"}, {"common", "word"}});
  SUBCASE("min_df 1 is the identity") {
    const auto r = prune_vocabulary(c, 1);
    CHECK(r.corpus.vocabulary().words() == c.vocabulary().words());
    CHECK(r.dropped_documents == 0);
  }
  SUBCASE("words below min_df are removed and ids re-densified") {
    const auto r = prune_vocabulary(c, 2);
    CHECK(r.corpus.vocabulary().words() == std::vector<std::string>{"common", "word"});
    CHECK(r.corpus.document(0).tokens == std::vector<std::string>{"common"});
  }
  SUBCASE("emptied documents are dropped and counted") {
    const auto c2 = fixtures::token_corpus({{"a", "b"}, {"a"}, {"solo"}, {"a", "b"}}, {3});
    const auto r = prune_vocabulary(c2, 2);
    CHECK(r.dropped_documents == 1);
    CHECK(r.corpus.size() == 3);
  }
  SUBCASE("pruning everything is an error") {
    CHECK_THROWS_WITH_AS(prune_vocabulary(c, 10), doctest::Contains("empty vocabulary"), DataError);
  }
}

TEST_CASE("assign_validation") {
  std::vector<std::vector<std::string>> docs(101, {"x"});
  const auto c = fixtures::token_corpus(docs, {100});
  const auto v = assign_validation(c, 0.1, 42);
  CHECK(v.count(Split::val) == 10);
  CHECK(v.count(Split::train) == 90);
  CHECK(v.count(Split::test) == 1);

  SUBCASE("deterministic for a fixed seed") {
    const auto again = assign_validation(c, 0.1, 42);
    for (std::size_t i = 0; i < c.size(); ++i) CHECK(again.document(i).split == v.document(i).split);
  }
  SUBCASE("partitions the original train set") {
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (c.document(i).split == Split::train)
        CHECK(v.document(i).split != Split::test);
      else
        CHECK(v.document(i).split == Split::test);
    }
  }
  SUBCASE("degenerate sizes are rejected") {
    const auto small = fixtures::token_corpus({{"a"}, {"a"}, {"a"}, {"a"}, {"a"}, {"a"}}, {5});
    CHECK_THROWS_AS(assign_validation(small, 0.1, 1), DataError);
  }
}
