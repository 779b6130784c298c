#include <algorithm>
#include <string>

#include "doctest.h"
#include "fixtures.hpp"
#include "morph/error.hpp"
#include "morph/evaluate.hpp"

using namespace morph;

namespace {

MorphAnnotation ann(std::initializer_list<std::pair<const std::string, std::string>> kv) {
  return MorphAnnotation(kv.begin(), kv.end());
}

// Three tokens scored by hand:
//   1. gold {POS=N, Number=PL}               pred {POS=N}                 tp 1 fp 0 fn 1  F1 2/3
//   2. gold {POS=V, Tense=PST, Person=3}     pred {POS=V, Tense=PRS, Person=3}  tp 2 fp 1 fn 1  F1 2/3
//   3. gold {POS=ADJ, Case=NOM+ACC}          pred {POS=ADJ, Case=ACC+NOM} tp 3 fp 0 fn 0  F1 1
struct HandFixture {
  std::vector<MorphAnnotation> gold = {
      ann({{"POS", "N"}, {"Number", "PL"}}),
      ann({{"POS", "V"}, {"Tense", "PST"}, {"Person", "3"}}),
      ann({{"POS", "ADJ"}, {"Case", "NOM+ACC"}}),
  };
  std::vector<MorphAnnotation> predicted = {
      ann({{"POS", "N"}, {"Number", "_"}}),
      ann({{"POS", "V"}, {"Tense", "PRS"}, {"Person", "3"}}),
      ann({{"POS", "ADJ"}, {"Case", "ACC+NOM"}}),
  };
};

MorphAnnotation random_annotation(morph::num::Rng& rng) {
  static const std::vector<std::pair<std::string, std::vector<std::string>>> dims = {
      {"POS", {"N", "V", "ADJ"}}, {"Number", {"SG", "PL"}}, {"Case", {"NOM", "ACC", "DAT"}}, {"Gender", {"MASC", "FEM"}}};
  MorphAnnotation a;
  for (const auto& [d, values] : dims) {
    const std::size_t k = rng.below(values.size() + 1);
    a[d] = k == values.size() ? "_" : values[k];
  }
  return a;
}

}  // namespace

TEST_CASE("hand-scored fixture") {
  const HandFixture f;
  CHECK(exact_match_accuracy(f.gold, f.predicted) == 1.0 / 3.0);
  const auto s = f1_scores(f.gold, f.predicted);
  CHECK(s.micro == 12.0 / 15.0);
  CHECK(s.macro == doctest::Approx(7.0 / 9.0).epsilon(1e-15));

  const auto c = per_feature_errors(f.gold, f.predicted);
  CHECK(c.errors.at("POS") == 0);
  CHECK(c.errors.at("Number") == 1);
  CHECK(c.errors.at("Tense") == 1);
  CHECK(c.errors.at("Person") == 0);
  CHECK(c.errors.at("Case") == 1);
  CHECK(c.predictions.at("POS") == 3);
  CHECK(c.predictions.at("Number") == 0);
  CHECK(c.predictions.at("Tense") == 1);
  CHECK(c.predictions.at("Case") == 1);

  const auto r = evaluate(f.gold, f.predicted);
  CHECK(r.tokens == 3);
  CHECK(r.accuracy == 1.0 / 3.0);
  CHECK(r.f1_micro == s.micro);
  CHECK(r.f1_macro == s.macro);
}

TEST_CASE("single-token examples") {
  SUBCASE("partial prediction") {
    const std::vector<MorphAnnotation> g = {ann({{"POS", "N"}, {"Number", "PL"}})};
    const std::vector<MorphAnnotation> p = {ann({{"POS", "N"}})};
    const auto s = f1_scores(g, p);
    CHECK(s.macro == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(s.micro == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(exact_match_accuracy(g, p) == 0.0);
  }
  SUBCASE("empty versus empty") {
    const std::vector<MorphAnnotation> g = {ann({{"POS", "_"}})};
    const std::vector<MorphAnnotation> p = {MorphAnnotation{}};
    CHECK(f1_scores(g, p).macro == 1.0);
    CHECK(exact_match_accuracy(g, p) == 1.0);
    CHECK(per_feature_errors(g, p).errors.at("POS") == 0);
  }
  SUBCASE("nulls are not attribute pairs") {
    CHECK(analysis_pairs(ann({{"POS", "N"}, {"Gender", "_"}, {"Case", "NOM+ACC"}})) ==
          std::set<std::string>{"POS=N", "Case=NOM", "Case=ACC"});
  }
}

TEST_CASE("one wrong gender in ten tokens") {
  std::vector<MorphAnnotation> gold, pred;
  for (int i = 0; i < 10; ++i) gold.push_back(ann({{"POS", "ADJ"}, {"Gender", i % 2 ? "FEM" : "MASC"}}));
  pred = gold;
  pred[4]["Gender"] = "NEUT";
  const auto r = evaluate(gold, pred, {"POS", "Gender", "Case"});
  CHECK(r.accuracy == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(r.features.errors.at("Gender") == 1);
  CHECK(r.features.errors.at("POS") == 0);
  CHECK(r.features.errors.at("Case") == 0);
  CHECK(r.features.predictions.at("Case") == 0);
  CHECK(r.features.predictions.at("Gender") == 10);
}

TEST_CASE("perfect prediction") {
  morph::num::Rng rng(5);
  std::vector<MorphAnnotation> gold;
  for (int i = 0; i < 40; ++i) gold.push_back(random_annotation(rng));
  const auto r = evaluate(gold, gold);
  CHECK(r.accuracy == 1.0);
  CHECK(r.f1_micro == 1.0);
  CHECK(r.f1_macro == 1.0);
  for (const auto& [d, e] : r.features.errors) CHECK(e == 0);
}

TEST_CASE("metric properties on random predictions") {
  morph::num::Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.below(8);
    std::vector<MorphAnnotation> gold, pred;
    for (std::size_t i = 0; i < n; ++i) {
      gold.push_back(random_annotation(rng));
      pred.push_back(rng.below(3) == 0 ? gold.back() : random_annotation(rng));
    }
    const auto r = evaluate(gold, pred);
    for (double v : {r.accuracy, r.f1_micro, r.f1_macro}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    std::size_t errors = 0;
    for (const auto& [d, e] : r.features.errors) errors += e;
    const bool perfect = r.accuracy == 1.0;
    CHECK(perfect == (r.f1_micro == 1.0));
    CHECK(perfect == (r.f1_macro == 1.0));
    CHECK(perfect == (errors == 0));

    CHECK(f1_scores(pred, gold).micro == doctest::Approx(r.f1_micro).epsilon(1e-15));

    // Reordering '+'-joined values changes nothing.
    auto joined = gold;
    for (auto& a : joined) a["Case"] = a["Case"] == "_" ? "_" : a["Case"] + "+ERG";
    auto reversed = joined;
    for (auto& a : reversed) {
      if (a["Case"] != "_") a["Case"] = "ERG+" + a["Case"].substr(0, a["Case"].size() - 4);
    }
    const auto ordered = evaluate(joined, pred);
    const auto swapped = evaluate(reversed, pred);
    CHECK(ordered.accuracy == swapped.accuracy);
    CHECK(ordered.f1_micro == swapped.f1_micro);
    CHECK(ordered.f1_macro == swapped.f1_macro);
  }
}

TEST_CASE("tagset order does not matter") {
  const auto dict = fixtures::small_dictionary();
  const std::vector<MorphAnnotation> a = {fixtures::make_token("x", "N;PL;ACC", dict).annotation};
  const std::vector<MorphAnnotation> b = {fixtures::make_token("x", "ACC;N;PL", dict).annotation};
  CHECK(exact_match_accuracy(a, b) == 1.0);
}

TEST_CASE("alignment") {
  const HandFixture f;
  std::vector<MorphAnnotation> shorter(f.predicted.begin(), f.predicted.end() - 1);
  CHECK_THROWS_AS(exact_match_accuracy(f.gold, shorter), AlignmentError);
  CHECK_THROWS_AS(f1_scores(f.gold, shorter), AlignmentError);
  CHECK_THROWS_AS(per_feature_errors(f.gold, shorter), AlignmentError);

  const auto empty = evaluate({}, {});
  CHECK(empty.tokens == 0);
  CHECK(empty.accuracy == 1.0);

  const auto gold = fixtures::surface_corpus(4, 3);
  auto pred = gold;
  CHECK(evaluate_corpora(gold, pred).accuracy == 1.0);
  pred.sentences[1].tokens.pop_back();
  try {
    evaluate_corpora(gold, pred);
    FAIL("expected an alignment error");
  } catch (const AlignmentError& e) {
    CHECK(std::string(e.what()).find("sentence 2") != std::string::npos);
  }
  pred = gold;
  pred.sentences[2].tokens[0].form = "zzz";
  CHECK_THROWS_WITH_AS(evaluate_corpora(gold, pred), doctest::Contains("sentence 3"), AlignmentError);
  pred = gold;
  pred.sentences.pop_back();
  CHECK_THROWS_AS(evaluate_corpora(gold, pred), AlignmentError);
}

TEST_CASE("report rendering") {
  const HandFixture f;
  const auto r = evaluate(f.gold, f.predicted);
  CHECK(r.text().find("accuracy") != std::string::npos);
  const auto tsv = r.tsv();
  CHECK(tsv.find("tokens\t3\n") != std::string::npos);
  CHECK(tsv.find("f1_micro\t0.8") != std::string::npos);
  const auto table = r.feature_table();
  CHECK(text::starts_with(table, "dimension\terrors\tpredictions\n"));
  CHECK(table.find("Number\t1\t0\n") != std::string::npos);
  CHECK(table.find("POS\t0\t3\n") != std::string::npos);
  CHECK(std::count(table.begin(), table.end(), '\n') == 6);
}
