#pragma once

// Synthetic corpora and numeric oracles shared by the unit and acceptance
// tests.

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "morph/corpus.hpp"
#include "morph/crf/inference.hpp"
#include "morph/num/parameter.hpp"
#include "morph/num/random.hpp"
#include "morph/schema.hpp"
#include "morph/text.hpp"

namespace fixtures {

using morph::Corpus;
using morph::FeatureDictionary;
using morph::Sentence;
using morph::Token;

inline FeatureDictionary small_dictionary() {
  FeatureDictionary d;
  for (const char* v : {"N", "V", "ADJ", "PRO", "DET", "ADP", "CONJ", "ADV"}) d.add(v, "POS");
  for (const char* v : {"SG", "PL"}) d.add(v, "Number");
  for (const char* v : {"NOM", "ACC", "DAT", "GEN", "ERG"}) d.add(v, "Case");
  for (const char* v : {"MASC", "FEM", "NEUT"}) d.add(v, "Gender");
  for (const char* v : {"1", "2", "3"}) d.add(v, "Person");
  for (const char* v : {"PRS", "PST"}) d.add(v, "Tense");
  return d;
}

inline Token make_token(const std::string& form, const std::string& tags, const FeatureDictionary& dict) {
  Token t;
  t.form = form;
  t.chars = morph::text::utf8_decode(form);
  t.raw_tags = tags;
  t.annotation = morph::decompose_tagset(tags, dict, morph::UnmappedPolicy::kStrict).values;
  return t;
}

inline Sentence make_sentence(const std::string& language,
                              const std::vector<std::pair<std::string, std::string>>& tokens,
                              const FeatureDictionary& dict) {
  Sentence s;
  s.language = language;
  for (const auto& [form, tags] : tokens) s.tokens.push_back(make_token(form, tags, dict));
  return s;
}

// Two dimensions (POS, Number) that the surface form determines: the stem
// fixes POS and the final letter fixes Number.
inline Corpus surface_corpus(std::size_t sentences, std::uint64_t seed, const std::string& language = "xx") {
  static const std::vector<std::string> nouns = {"kat", "dog", "lun", "ber", "mor", "tas"};
  static const std::vector<std::string> verbs = {"rin", "sal", "pok", "dem", "vul"};
  const auto dict = small_dictionary();
  morph::num::Rng rng(seed);
  Corpus c;
  c.language = language;
  for (std::size_t s = 0; s < sentences; ++s) {
    std::vector<std::pair<std::string, std::string>> toks;
    const std::size_t n = 3 + rng.below(4);
    for (std::size_t i = 0; i < n; ++i) {
      const bool noun = rng.below(2) == 0;
      const bool plural = rng.below(2) == 0;
      if (noun) {
        toks.emplace_back(nouns[rng.below(nouns.size())] + (plural ? "i" : "a"), plural ? "N;PL" : "N;SG");
      } else {
        toks.emplace_back(verbs[rng.below(verbs.size())] + (plural ? "en" : "o"), plural ? "V;PL" : "V;SG");
      }
    }
    c.sentences.push_back(make_sentence(language, toks, dict));
  }
  return c;
}

// `adjectives` ADJ tokens of which `fem` are FEM and `neut` NEUT (the rest
// MASC), plus as many plain singular nouns, ten tokens per sentence.
inline Corpus adjective_corpus(const std::string& language, std::size_t adjectives, std::size_t fem,
                               std::size_t neut) {
  const auto dict = small_dictionary();
  std::vector<std::pair<std::string, std::string>> tokens;
  for (std::size_t i = 0; i < adjectives; ++i) {
    const char* gender = i < fem ? "FEM" : i < fem + neut ? "NEUT" : "MASC";
    tokens.emplace_back("adj" + std::to_string(i % 7), std::string("ADJ;SG;") + gender);
    tokens.emplace_back("noun" + std::to_string(i % 5), "N;SG");
  }
  Corpus c;
  c.language = language;
  for (std::size_t i = 0; i < tokens.size(); i += 10) {
    const auto end = std::min(tokens.size(), i + 10);
    c.sentences.push_back(make_sentence(
        language, std::vector<std::pair<std::string, std::string>>(tokens.begin() + i, tokens.begin() + end), dict));
  }
  return c;
}

// All label paths of a chain, in lexicographic order.
inline std::vector<std::vector<std::size_t>> all_paths(std::size_t n, std::size_t labels) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> cur(n, 0);
  while (true) {
    out.push_back(cur);
    std::size_t i = n;
    while (i > 0) {
      --i;
      if (++cur[i] < labels) break;
      cur[i] = 0;
      if (i == 0) return out;
    }
    if (n == 0) return out;
  }
}

struct BruteForce {
  double log_z = 0.0;
  std::vector<std::size_t> argmax;
  double best = -INFINITY;
  std::vector<double> marginals;  // [n][L]
};

inline BruteForce brute_force(const morph::crf::ScoreView<double>& s) {
  BruteForce out;
  const std::size_t n = s.length(), L = s.labels();
  std::vector<double> scores;
  const auto paths = all_paths(n, L);
  for (const auto& p : paths) {
    const double v = morph::crf::path_score(s, std::span<const std::size_t>(p));
    scores.push_back(v);
    if (v > out.best) {
      out.best = v;
      out.argmax = p;
    }
  }
  double m = -INFINITY;
  for (double v : scores) m = std::max(m, v);
  double z = 0.0;
  for (double v : scores) z += std::exp(v - m);
  out.log_z = m + std::log(z);
  out.marginals.assign(n * L, 0.0);
  for (std::size_t k = 0; k < paths.size(); ++k) {
    const double p = std::exp(scores[k] - out.log_z);
    for (std::size_t t = 0; t < n; ++t) out.marginals[t * L + paths[k][t]] += p;
  }
  return out;
}

inline double relative_error(double a, double b, double floor = 1e-6) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

// Central differences of `loss` with respect to every entry of `p`.
inline std::vector<double> numeric_gradient(morph::num::Parameter<double>& p, const std::function<double()>& loss,
                                            double eps = 1e-4) {
  std::vector<double> out(p.value.size());
  for (std::size_t i = 0; i < p.value.size(); ++i) {
    const double keep = p.value[i];
    p.value[i] = keep + eps;
    const double up = loss();
    p.value[i] = keep - eps;
    const double down = loss();
    p.value[i] = keep;
    out[i] = (up - down) / (2 * eps);
  }
  return out;
}

}  // namespace fixtures
