#include "morph/evaluate.hpp"

#include <algorithm>
#include <sstream>

#include "morph/error.hpp"
#include "morph/text.hpp"

namespace morph {

namespace {

void check_aligned(std::size_t gold, std::size_t predicted) {
  if (gold != predicted) {
    throw AlignmentError("gold has " + std::to_string(gold) + " tokens, prediction has " + std::to_string(predicted));
  }
}

std::string_view value_of(const MorphAnnotation& a, const std::string& dim) {
  auto it = a.find(dim);
  return it == a.end() ? kNullValue : std::string_view(it->second);
}

}  // namespace

std::set<std::string> analysis_pairs(const MorphAnnotation& a) {
  std::set<std::string> out;
  for (const auto& [dim, value] : a) {
    if (value == kNullValue) continue;
    for (const auto& v : text::split(value, '+')) out.insert(dim + "=" + v);
  }
  return out;
}

double exact_match_accuracy(std::span<const MorphAnnotation> gold, std::span<const MorphAnnotation> predicted) {
  check_aligned(gold.size(), predicted.size());
  if (gold.empty()) return 1.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) correct += analysis_pairs(gold[i]) == analysis_pairs(predicted[i]);
  return static_cast<double>(correct) / static_cast<double>(gold.size());
}

F1Scores f1_scores(std::span<const MorphAnnotation> gold, std::span<const MorphAnnotation> predicted) {
  check_aligned(gold.size(), predicted.size());
  F1Scores s;
  if (gold.empty()) return s;
  std::size_t tp = 0, fp = 0, fn = 0;
  double macro = 0.0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto g = analysis_pairs(gold[i]);
    const auto p = analysis_pairs(predicted[i]);
    std::size_t hit = 0;
    for (const auto& x : p) hit += g.count(x);
    tp += hit;
    fp += p.size() - hit;
    fn += g.size() - hit;
    const std::size_t denom = g.size() + p.size();
    macro += denom == 0 ? 1.0 : 2.0 * static_cast<double>(hit) / static_cast<double>(denom);
  }
  const std::size_t denom = 2 * tp + fp + fn;
  s.micro = denom == 0 ? 1.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
  s.macro = macro / static_cast<double>(gold.size());
  return s;
}

FeatureCounts per_feature_errors(std::span<const MorphAnnotation> gold, std::span<const MorphAnnotation> predicted,
                                 const std::vector<std::string>& dimensions) {
  check_aligned(gold.size(), predicted.size());
  std::set<std::string> dims(dimensions.begin(), dimensions.end());
  for (const auto& a : gold) {
    for (const auto& [d, v] : a) dims.insert(d);
  }
  for (const auto& a : predicted) {
    for (const auto& [d, v] : a) dims.insert(d);
  }
  FeatureCounts c;
  for (const auto& d : dims) {
    c.errors[d] = 0;
    c.predictions[d] = 0;
  }
  for (std::size_t i = 0; i < gold.size(); ++i) {
    for (const auto& d : dims) {
      const auto g = value_of(gold[i], d);
      const auto p = value_of(predicted[i], d);
      if (g != p) ++c.errors[d];
      if (p != kNullValue) ++c.predictions[d];
    }
  }
  return c;
}

EvalReport evaluate(std::span<const MorphAnnotation> gold, std::span<const MorphAnnotation> predicted,
                    const std::vector<std::string>& dimensions) {
  EvalReport r;
  r.tokens = gold.size();
  r.accuracy = exact_match_accuracy(gold, predicted);
  const auto f1 = f1_scores(gold, predicted);
  r.f1_micro = f1.micro;
  r.f1_macro = f1.macro;
  r.features = per_feature_errors(gold, predicted, dimensions);
  return r;
}

EvalReport evaluate_corpora(const Corpus& gold, const Corpus& predicted, const std::vector<std::string>& dimensions) {
  if (gold.sentences.size() != predicted.sentences.size()) {
    throw AlignmentError("gold has " + std::to_string(gold.sentences.size()) + " sentences, prediction has " +
                         std::to_string(predicted.sentences.size()));
  }
  std::vector<MorphAnnotation> g, p;
  for (std::size_t s = 0; s < gold.sentences.size(); ++s) {
    const auto& gs = gold.sentences[s].tokens;
    const auto& ps = predicted.sentences[s].tokens;
    if (gs.size() != ps.size()) {
      throw AlignmentError("sentence " + std::to_string(s + 1) + ": gold has " + std::to_string(gs.size()) +
                           " tokens, prediction has " + std::to_string(ps.size()));
    }
    for (std::size_t t = 0; t < gs.size(); ++t) {
      if (gs[t].form != ps[t].form) {
        throw AlignmentError("sentence " + std::to_string(s + 1) + ", token " + std::to_string(t + 1) + ": '" +
                             gs[t].form + "' vs '" + ps[t].form + "'");
      }
      g.push_back(gs[t].annotation);
      p.push_back(ps[t].annotation);
    }
  }
  return evaluate(g, p, dimensions);
}

std::string EvalReport::text() const {
  std::ostringstream out;
  out << "tokens      " << tokens << '\n';
  out << "accuracy    " << morph::text::format_real(accuracy) << '\n';
  out << "f1_micro    " << morph::text::format_real(f1_micro) << '\n';
  out << "f1_macro    " << morph::text::format_real(f1_macro) << '\n';
  return out.str();
}

std::string EvalReport::tsv() const {
  std::ostringstream out;
  out << "tokens\t" << tokens << '\n';
  out << "accuracy\t" << morph::text::format_real(accuracy) << '\n';
  out << "f1_micro\t" << morph::text::format_real(f1_micro) << '\n';
  out << "f1_macro\t" << morph::text::format_real(f1_macro) << '\n';
  return out.str();
}

std::string EvalReport::feature_table() const {
  std::ostringstream out;
  out << "dimension\terrors\tpredictions\n";
  for (const auto& [d, e] : features.errors) out << d << '\t' << e << '\t' << features.predictions.at(d) << '\n';
  return out.str();
}

}  // namespace morph
