#include <algorithm>
#include <set>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "morph/corpus.hpp"
#include "morph/num/random.hpp"
#include "morph/schema.hpp"

using namespace morph;

namespace {

std::set<std::string> value_set(const std::string& tags) {
  const auto v = tagset_values(tags);
  return {v.begin(), v.end()};
}

FeatureDictionary example_dictionary() {
  FeatureDictionary d;
  for (auto [v, dim] : {std::pair{"N", "POS"}, {"PRO", "POS"}, {"V", "POS"}, {"PL", "Number"}, {"SG", "Number"},
                        {"NOM", "Case"}, {"ACC", "Case"}, {"ERG", "Case"}, {"DAT", "Case"}, {"GEN", "Case"},
                        {"FEM", "Gender"}, {"MASC", "Gender"}, {"3", "Person"}}) {
    d.add(v, dim);
  }
  return d;
}

}  // namespace

TEST_CASE("dictionary loading") {
  std::istringstream in("# comment\nNOM\tCase\nPL\tNumber\n\nFEM\tGender\n");
  const auto d = FeatureDictionary::parse(in, "dict.tsv");
  CHECK(d.size() == 3);
  CHECK(d.dimension_of("NOM") == "Case");
  CHECK(d.dimension_of("FEM") == "Gender");
  CHECK_FALSE(d.dimension_of("XYZ").has_value());

  std::vector<std::string> warnings;
  std::istringstream empty("");
  CHECK(FeatureDictionary::parse(empty, "empty.tsv", &warnings).empty());
  CHECK(warnings.size() == 1);

  std::istringstream bad("NOM\tCase\textra\n");
  CHECK_THROWS_AS(FeatureDictionary::parse(bad, "bad.tsv"), LoadError);

  std::istringstream conflict("NOM\tCase\nNOM\tNumber\n");
  try {
    FeatureDictionary::parse(conflict, "c.tsv");
    FAIL("expected LoadError");
  } catch (const LoadError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("c.tsv:1") != std::string::npos);
    CHECK(msg.find("c.tsv:2") != std::string::npos);
  }

  std::istringstream repeat("NOM\tCase\nNOM\tCase\n");
  CHECK(FeatureDictionary::parse(repeat, "r.tsv").size() == 1);
}

TEST_CASE("shipped dictionary loads") {
  const auto d = FeatureDictionary::load(MORPH_TEST_DATA "/../../data/unimorph_dimensions.tsv");
  CHECK(d.dimension_of("NOM") == "Case");
  CHECK(d.dimension_of("PL") == "Number");
  CHECK(d.dimension_of("FEM") == "Gender");
  CHECK(d.dimension_of("N") == "POS");
  CHECK(d.dimension_of("V.PTCP") == "POS");
  CHECK(d.values_per_dimension().at("Person") >= 4);
}

TEST_CASE("alternative readings") {
  const auto d = example_dictionary();
  CHECK(d.dimension_of("ACC/ERG") == "Case");
  CHECK(d.dimension_of("{DAT/GEN}") == "Case");
  CHECK_FALSE(d.dimension_of("NOM/PL").has_value());
  CHECK_FALSE(d.dimension_of("{}").has_value());
}

TEST_CASE("decompose examples") {
  const auto d = example_dictionary();
  CHECK(decompose_tagset("N;PL;NOM;FEM", d).values ==
        MorphAnnotation{{"POS", "N"}, {"Number", "PL"}, {"Case", "NOM"}, {"Gender", "FEM"}});
  CHECK(decompose_tagset("_", d).values.empty());
  CHECK(decompose_tagset("3;MASC;PRO;NOM;SG", d).values ==
        MorphAnnotation{{"Person", "3"}, {"Gender", "MASC"}, {"POS", "PRO"}, {"Case", "NOM"}, {"Number", "SG"}});

  const auto lenient = decompose_tagset("N;XYZ;PL", d, UnmappedPolicy::kLenient);
  CHECK(lenient.values == MorphAnnotation{{"POS", "N"}, {"Number", "PL"}});
  CHECK(lenient.unmapped == std::vector<std::string>{"XYZ"});
  CHECK_THROWS_AS(decompose_tagset("N;XYZ", d, UnmappedPolicy::kStrict), SchemaError);

  CHECK(decompose_tagset("N;NOM;ACC", d).values.at("Case") == "ACC+NOM");
}

TEST_CASE("decompose is order-insensitive") {
  const auto d = fixtures::small_dictionary();
  const std::vector<std::string> values = {"N", "PL", "NOM", "FEM", "3", "PST"};
  num::Rng rng(3);
  const auto reference = decompose_tagset(text::join(values, ";"), d).values;
  for (int trial = 0; trial < 30; ++trial) {
    auto perm = values;
    rng.shuffle(std::span<std::string>(perm));
    CHECK(decompose_tagset(text::join(perm, ";"), d).values == reference);
  }
}

TEST_CASE("build_schema") {
  const auto d = example_dictionary();
  SUBCASE("POS only") {
    const auto s = FeatureSchema::build({{{"POS", "N"}}, {{"POS", "V"}}});
    CHECK(s.dimensions() == std::vector<std::string>{"POS"});
    CHECK(s.labels("POS") == std::vector<std::string>{"N", "V", "_"});
  }
  SUBCASE("union of dimensions") {
    const auto s = FeatureSchema::build(
        {decompose_tagset("N;PL;NOM;FEM", d).values, decompose_tagset("3;MASC;PRO;NOM;SG", d).values});
    CHECK(s.dimensions() == std::vector<std::string>{"POS", "Case", "Gender", "Number", "Person"});
    CHECK(s.labels("Gender") == std::vector<std::string>{"FEM", "MASC", "_"});
    CHECK(s.labels("Person") == std::vector<std::string>{"3", "_"});
  }
  SUBCASE("null extension") {
    const auto s = FeatureSchema::build({{{"POS", "N"}, {"Gender", "FEM"}}});
    CHECK_THROWS_AS(s.extend({{"POS", "V"}}), ContractError);
    const auto s2 = FeatureSchema::build({{{"POS", "N"}, {"Gender", "FEM"}}, {{"POS", "V"}}});
    CHECK(s2.extend({{"POS", "V"}}) == MorphAnnotation{{"POS", "V"}, {"Gender", "_"}});
    CHECK_THROWS_AS(s2.extend({{"Case", "NOM"}}), ContractError);
  }
  SUBCASE("empty corpus") { CHECK_THROWS_AS(FeatureSchema::build({}), SchemaError); }
}

TEST_CASE("compose") {
  const auto s = FeatureSchema::from_label_spaces(
      {{"POS", {"N"}}, {"Number", {"PL"}}, {"Case", {"NOM"}}, {"Gender", {"FEM"}}, {"Person", {"1"}}});
  const std::string composed =
      s.compose({{"POS", "N"}, {"Number", "PL"}, {"Case", "NOM"}, {"Gender", "FEM"}, {"Person", "_"}});
  CHECK(value_set(composed) == std::set<std::string>{"N", "PL", "NOM", "FEM"});
  CHECK(composed.substr(0, 2) == "N;");
  CHECK(s.compose({{"POS", "_"}, {"Number", "_"}, {"Case", "_"}, {"Gender", "_"}, {"Person", "_"}}) == "_");
  CHECK_THROWS_AS(s.compose({{"POS", "N"}}), ContractError);
  CHECK_THROWS_AS(s.compose({{"POS", "V"}, {"Number", "_"}, {"Case", "_"}, {"Gender", "_"}, {"Person", "_"}}),
                  ContractError);
}

TEST_CASE("compose(decompose(t)) over the synthetic treebank") {
  const auto dict = FeatureDictionary::load(MORPH_TEST_DATA "/../../data/unimorph_dimensions.tsv");
  ReadOptions opts{&dict, UnmappedPolicy::kLenient};
  const auto corpus = read_conllu(MORPH_TEST_DATA "/synthetic-um-train.conllu", "xx", opts);
  const auto schema = FeatureSchema::build(corpus.annotations());
  std::size_t checked = 0;
  for (const auto& s : corpus.sentences) {
    for (const auto& t : s.tokens) {
      auto expected = value_set(t.raw_tags);
      for (const auto& u : t.unmapped) expected.erase(u);
      CHECK(value_set(schema.compose(schema.extend(t.annotation))) == expected);
      ++checked;
    }
  }
  CHECK(checked == corpus.token_count());
  CHECK(checked > 50);
}

TEST_CASE("schema serialization is deterministic and round-trips") {
  const auto corpus = fixtures::surface_corpus(20, 4);
  const auto a = FeatureSchema::build(corpus.annotations());
  const auto b = FeatureSchema::build(corpus.annotations());
  CHECK(a.serialize() == b.serialize());
  std::istringstream in(a.serialize());
  const auto c = FeatureSchema::deserialize(in);
  CHECK(c == a);
  CHECK(c.serialize() == a.serialize());
}

TEST_CASE("merge and novel labels") {
  const auto a = FeatureSchema::from_label_spaces({{"POS", {"N"}}, {"Case", {"NOM"}}});
  const auto b = FeatureSchema::from_label_spaces({{"POS", {"V"}}, {"Case", {"NOM", "ACC"}}, {"Tense", {"PST"}}});
  const auto m = a.merged_with(b);
  CHECK(m.labels("Case") == std::vector<std::string>{"ACC", "NOM", "_"});
  CHECK(m.labels("POS") == std::vector<std::string>{"N", "V", "_"});
  const auto novel = a.novel_labels(b);
  CHECK(std::find(novel.begin(), novel.end(), "Case=ACC") != novel.end());
  CHECK(std::find(novel.begin(), novel.end(), "Tense=PST") != novel.end());
  CHECK(std::find(novel.begin(), novel.end(), "POS=V") != novel.end());
  CHECK(m.novel_labels(a).empty());
}

TEST_CASE("lookups") {
  const auto s = FeatureSchema::from_label_spaces({{"Case", {"NOM", "ACC"}}});
  CHECK(s.dimensions().front() == "POS");
  CHECK(s.dimension_index("Case") == 1u);
  CHECK(s.label_index("Case", "ACC") == 0u);
  CHECK(s.null_index("Case") == 2u);
  CHECK_FALSE(s.label_index("Case", "DAT").has_value());
  CHECK_FALSE(s.dimension_index("Tense").has_value());
  CHECK_THROWS(s.labels("Tense"));
}
