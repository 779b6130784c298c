#pragma once

#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "morph/corpus.hpp"
#include "morph/schema.hpp"

namespace morph {

// Non-null "Dimension=value" pairs of a token; '+'-joined values count as
// separate pairs.
std::set<std::string> analysis_pairs(const MorphAnnotation& a);

double exact_match_accuracy(std::span<const MorphAnnotation> gold, std::span<const MorphAnnotation> predicted);

struct F1Scores {
  double micro = 1.0;
  double macro = 1.0;
};
F1Scores f1_scores(std::span<const MorphAnnotation> gold, std::span<const MorphAnnotation> predicted);

struct FeatureCounts {
  std::map<std::string, std::size_t> errors;       // tokens whose value differs, nulls included
  std::map<std::string, std::size_t> predictions;  // non-null predicted values
};
// Counts every dimension in `dimensions` plus any dimension either side uses.
FeatureCounts per_feature_errors(std::span<const MorphAnnotation> gold, std::span<const MorphAnnotation> predicted,
                                 const std::vector<std::string>& dimensions = {});

struct EvalReport {
  std::size_t tokens = 0;
  double accuracy = 1.0;
  double f1_micro = 1.0;
  double f1_macro = 1.0;
  FeatureCounts features;

  std::string text() const;
  // key<TAB>value lines
  std::string tsv() const;
  // dimension<TAB>errors<TAB>predictions
  std::string feature_table() const;
};

EvalReport evaluate(std::span<const MorphAnnotation> gold, std::span<const MorphAnnotation> predicted,
                    const std::vector<std::string>& dimensions = {});

// Aligns two corpora sentence by sentence; AlignmentError names the first
// sentence whose length or forms differ.
EvalReport evaluate_corpora(const Corpus& gold, const Corpus& predicted, const std::vector<std::string>& dimensions = {});

}  // namespace morph
