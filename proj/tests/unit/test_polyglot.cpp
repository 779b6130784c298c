#include <algorithm>
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "morph/polyglot.hpp"

using namespace morph;
using namespace morph::num;

namespace {

Tensor<double> random_tensor(const Shape& s, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor<double> t(s);
  for (auto& v : t.data()) v = rng.uniform(lo, hi);
  return t;
}

Tensor<double> factor_value(const Tensor<double>& h, const Tensor<double>& t, const Tensor<double>& w,
                            const Tensor<double>& b) {
  Graph<double> g({.grad = false});
  return g.value(factor(g, g.constant(h), g.constant(t), g.constant(w), g.constant(b)));
}

std::string uriel_header() {
  std::string s = "language";
  for (auto f : uriel_features()) s += "\t" + std::string(f);
  return s + "\textra\n";
}

std::string uriel_row(const std::string& lang, std::vector<int> ones) {
  std::string s = lang;
  for (std::size_t i = 0; i < 18; ++i) {
    s += std::find(ones.begin(), ones.end(), static_cast<int>(i)) != ones.end() ? "\t1" : "\t0";
  }
  return s + "\t9\n";
}

}  // namespace

TEST_CASE("factor") {
  Rng rng(3);
  SUBCASE("zero typology and bias give a zero decoder input") {
    const auto h = random_tensor({3, 400}, rng);
    const auto w = random_tensor({20, 7}, rng);
    const auto out = factor_value(h, Tensor<double>({7}), w, Tensor<double>({20}));
    CHECK(out.shape() == Shape{3, 8000});
    for (double v : out.data()) CHECK(v == 0.0);
  }
  SUBCASE("layout") {
    const auto h = Tensor<double>::matrix({{1, 2}});
    const auto t = Tensor<double>::vector({0.5});
    const auto w = Tensor<double>::matrix({{1}, {-2}, {0}});
    const auto b = Tensor<double>::vector({0, 0, 0.25});
    const auto out = factor_value(h, t, w, b);
    const double f[3] = {std::tanh(0.5), std::tanh(-1.0), std::tanh(0.25)};
    for (std::size_t a = 0; a < 2; ++a) {
      for (std::size_t k = 0; k < 3; ++k) CHECK(out.at(0, a * 3 + k) == doctest::Approx(h.at(0, a) * f[k]));
    }
  }
  SUBCASE("bilinearity") {
    for (int trial = 0; trial < 10; ++trial) {
      const auto h1 = random_tensor({2, 5}, rng, -2, 2);
      const auto h2 = random_tensor({2, 5}, rng, -2, 2);
      const auto t = random_tensor({4}, rng);
      const auto w = random_tensor({6, 4}, rng);
      const auto b = random_tensor({6}, rng);
      const double alpha = rng.uniform(-3, 3);
      auto scaled = h1;
      for (auto& v : scaled.data()) v *= alpha;
      auto sum = h1;
      for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += h2[i];
      const auto f1 = factor_value(h1, t, w, b);
      const auto f2 = factor_value(h2, t, w, b);
      const auto fs = factor_value(scaled, t, w, b);
      const auto fsum = factor_value(sum, t, w, b);
      for (std::size_t i = 0; i < f1.size(); ++i) {
        CHECK(std::abs(fs[i] - alpha * f1[i]) <= 1e-6);
        CHECK(std::abs(fsum[i] - (f1[i] + f2[i])) <= 1e-6);
      }
    }
  }
  SUBCASE("width mismatch") {
    Graph<double> g({.grad = false});
    CHECK_THROWS_AS(factor(g, g.constant(random_tensor({2, 3}, rng)), g.constant(random_tensor({5}, rng)),
                           g.constant(random_tensor({4, 6}, rng)), g.constant(random_tensor({4}, rng))),
                    ContractError);
  }
  SUBCASE("gradients") {
    const std::vector<Tensor<double>> inputs = {random_tensor({2, 3}, rng), random_tensor({4}, rng),
                                                random_tensor({5, 4}, rng), random_tensor({5}, rng)};
    const auto proj = random_tensor({2, 15}, rng);
    auto loss = [&](Graph<double>& g, const std::vector<Var>& v) {
      return g.sum(g.mul(factor(g, v[0], v[1], v[2], v[3]), g.constant(proj)));
    };
    Graph<double> g;
    std::vector<Var> vs;
    for (const auto& x : inputs) vs.push_back(g.variable(x));
    g.backward(loss(g, vs));
    for (std::size_t k = 0; k < inputs.size(); ++k) {
      for (std::size_t i = 0; i < inputs[k].size(); ++i) {
        auto eval = [&](double d) {
          auto moved = inputs;
          moved[k][i] += d;
          Graph<double> h({.grad = false});
          std::vector<Var> ws;
          for (const auto& x : moved) ws.push_back(h.constant(x));
          return h.value(loss(h, ws)).item();
        };
        CHECK(fixtures::relative_error(g.grad(vs[k])[i], (eval(1e-5) - eval(-1e-5)) / 2e-5, 1e-5) <= 1e-6);
      }
    }
  }
}

TEST_CASE("typology from corpus statistics") {
  const auto hi = fixtures::adjective_corpus("hi_hdtb", 1000, 54, 0);
  const auto mr = fixtures::adjective_corpus("mr_ufal", 1000, 144, 100);
  const auto sa = fixtures::adjective_corpus("sa_ufal", 1000, 80, 200);
  const auto table = build_cluster_typology({&hi, &mr, &sa});
  CHECK(table.rows().size() == 3);
  CHECK(table.value("hi_hdtb", "ADJ-Gender-FEM") == doctest::Approx(0.054));
  CHECK(table.value("mr_ufal", "ADJ-Gender-FEM") == doctest::Approx(0.144));
  CHECK(table.value("sa_ufal", "ADJ-Gender-FEM") == doctest::Approx(0.080));
  CHECK(table.value("hi_hdtb", "ADJ-Gender-NEUT") == 0.0);
  CHECK(table.value("mr_ufal", "ADJ-Gender-NEUT") == doctest::Approx(0.1));
  CHECK(table.value("hi_hdtb", "ADJ-Gender-#") == doctest::Approx(2.0 / 3.0));
  CHECK(table.value("sa_ufal", "ADJ-Gender-#") == 1.0);
  CHECK(table.value("hi_hdtb", "Gender") == doctest::Approx(0.5));
  CHECK(table.value("hi_hdtb", "N-Number-SG") == 1.0);

  for (const auto& row : table.rows()) {
    CHECK(row.values.size() == table.width());
    for (double v : row.values) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
  for (std::size_t k = 0; k < table.width(); ++k) {
    bool any = false;
    for (const auto& row : table.rows()) any = any || row.values[k] != 0.0;
    CHECK(any);
  }
  const auto& f = table.features();
  CHECK(std::find(f.begin(), f.end(), "V-Gender-FEM") == f.end());
  CHECK(std::find(f.begin(), f.end(), "Case") == f.end());

  const auto again = build_cluster_typology({&hi, &mr, &sa});
  CHECK(again == table);
  std::ostringstream a, b;
  table.write(a);
  again.write(b);
  CHECK(a.str() == b.str());
  CHECK(text::starts_with(a.str(), "language\t"));
  std::istringstream in(a.str());
  CHECK(TypologyTable::read(in) == table);

  CHECK_THROWS(table.value("xx", "Gender"));
  CHECK_THROWS(table.value("hi_hdtb", "Nope"));
}

TEST_CASE("typology edge cases") {
  SUBCASE("every token carries Gender") {
    const auto dict = fixtures::small_dictionary();
    Corpus c;
    c.language = "xx";
    c.sentences.push_back(fixtures::make_sentence("xx", {{"a", "N;FEM"}, {"b", "ADJ;MASC"}}, dict));
    const auto v = build_typology_vector(c);
    const auto it = std::find(v.features.begin(), v.features.end(), "Gender");
    REQUIRE(it != v.features.end());
    CHECK(v.values[static_cast<std::size_t>(it - v.features.begin())] == 1.0);
    CHECK(v.language == "xx");
  }
  SUBCASE("frequent extra POS joins the feature set") {
    const auto dict = fixtures::small_dictionary();
    Corpus c;
    c.language = "xx";
    c.sentences.push_back(fixtures::make_sentence("xx", {{"a", "DET;PL"}, {"b", "N;SG"}, {"c", "ADV"}}, dict));
    const auto table = build_cluster_typology({&c});
    CHECK(table.value("xx", "DET-Number-PL") == 1.0);
    TypologyOptions rare;
    rare.pos_share = 0.5;
    const auto strict = build_cluster_typology({&c}, rare);
    CHECK(std::find(strict.features().begin(), strict.features().end(), "DET-Number-PL") == strict.features().end());
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(build_cluster_typology({}), ClusterError);
    Corpus empty;
    empty.language = "zz";
    CHECK_THROWS_AS(build_cluster_typology({&empty}), ClusterError);
  }
}

TEST_CASE("uriel subset") {
  const std::string file = uriel_header() + uriel_row("hi", {1, 6, 9, 11, 13, 14, 16}) +
                           uriel_row("mr", {1, 6, 9, 11, 13, 14, 16}) + uriel_row("en", {0, 6, 8, 10, 12, 14, 16});
  std::istringstream in(file);
  const auto table = parse_uriel_subset(in, "uriel.tsv", {"hi", "mr", "en"});
  CHECK(table.width() == 18);
  CHECK(table.features().front() == "S_SVO");
  CHECK(table.value("hi", "S_SOV") == 1.0);
  CHECK(table.value("hi", "S_SVO") == 0.0);
  CHECK(table.value("en", "S_SVO") == 1.0);
  CHECK(table.row("hi").values == table.row("mr").values);

  std::istringstream missing_lang(file);
  CHECK_THROWS_AS(parse_uriel_subset(missing_lang, "u", {"hi", "de"}), LoadError);

  std::string hyphenated = file;
  const auto pos = hyphenated.find("S_SVO");
  hyphenated.replace(pos, 5, "S-SVO");
  std::istringstream hyph(hyphenated);
  CHECK(parse_uriel_subset(hyph, "u", {"hi"}).value("hi", "S_SOV") == 1.0);

  std::string dropped = file;
  dropped.replace(dropped.find("S_OSV"), 5, "S_XXX");
  std::istringstream no_col(dropped);
  CHECK_THROWS_AS(parse_uriel_subset(no_col, "u", {"hi"}), LoadError);
}

TEST_CASE("polyglot projection") {
  const auto hi = fixtures::adjective_corpus("hi_hdtb", 50, 5, 0);
  const auto mr = fixtures::adjective_corpus("mr_ufal", 50, 10, 5);
  const auto table = build_cluster_typology({&hi, &mr});
  ParameterStore<double> store;
  Rng rng(2);
  const auto proj = PolyglotProjection<double>::create(store, table, 20, rng);
  CHECK(store.find("poly.hi_hdtb.W") != nullptr);
  CHECK(store.get("poly.mr_ufal.W").value.shape() == Shape{20, table.width()});
  Graph<double> g({.grad = false});
  const Var h = g.constant(random_tensor({3, 8}, rng));
  CHECK(g.value(proj.apply(g, h, "hi_hdtb")).shape() == Shape{3, 160});
  CHECK_FALSE(g.value(proj.apply(g, h, "hi_hdtb")) == g.value(proj.apply(g, h, "mr_ufal")));
  CHECK_THROWS_AS(proj.apply(g, h, "sa_ufal"), ContractError);
  const auto attached = PolyglotProjection<double>::attach(store, table);
  CHECK(g.value(attached.apply(g, h, "mr_ufal")) == g.value(proj.apply(g, h, "mr_ufal")));
}
