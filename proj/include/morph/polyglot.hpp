#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "morph/corpus.hpp"
#include "morph/num/graph.hpp"
#include "morph/num/parameter.hpp"

namespace morph {

struct TypologyVector {
  std::string language;
  std::vector<std::string> features;
  std::vector<double> values;
};

// One row per language, shared feature columns.
class TypologyTable {
 public:
  TypologyTable() = default;
  TypologyTable(std::vector<std::string> features, std::vector<TypologyVector> rows);

  const std::vector<std::string>& features() const { return features_; }
  const std::vector<TypologyVector>& rows() const { return rows_; }
  std::size_t width() const { return features_.size(); }
  bool empty() const { return rows_.empty(); }
  const TypologyVector& row(std::string_view language) const;
  double value(std::string_view language, std::string_view feature) const;

  // Header "language<TAB>feature..." then one row per language.
  void write(std::ostream& out) const;
  static TypologyTable read(std::istream& in, std::string_view source = "<typology>");

  friend bool operator==(const TypologyTable& a, const TypologyTable& b) {
    if (a.features_ != b.features_ || a.rows_.size() != b.rows_.size()) return false;
    for (std::size_t i = 0; i < a.rows_.size(); ++i) {
      if (a.rows_[i].language != b.rows_[i].language || a.rows_[i].values != b.rows_[i].values) return false;
    }
    return true;
  }

 private:
  std::vector<std::string> features_;
  std::vector<TypologyVector> rows_;
};

struct TypologyOptions {
  std::vector<std::string> base_pos = {"N", "V", "ADJ", "PRO"};
  double pos_share = 0.05;  // other POS labels join once they cover this share of tokens
  std::vector<std::string> value_dimensions = {"Gender", "Number", "Person", "Case"};
};

// Corpus statistics per language: the share of tokens carrying each
// dimension ("Case"), the share of tokens of a POS carrying a value
// ("ADJ-Gender-FEM"), and the number of distinct values a POS shows in a
// dimension ("ADJ-Gender-#", divided by the largest such count among the
// languages). Columns that are zero for every language are dropped.
TypologyTable build_cluster_typology(const std::vector<const Corpus*>& corpora, const TypologyOptions& opts = {});
TypologyVector build_typology_vector(const Corpus& corpus, const TypologyOptions& opts = {});

// The 18 URIEL syntax features, in the order the model consumes them.
const std::array<std::string_view, 18>& uriel_features();

// A tab-separated table with a "language" column and at least the 18
// feature columns; extra columns are ignored.
TypologyTable load_uriel_subset(const std::filesystem::path& path, const std::vector<std::string>& languages);
TypologyTable parse_uriel_subset(std::istream& in, std::string_view source, const std::vector<std::string>& languages);

// g = vec(h (x) tanh(W t + b)) for every row of h.
template <typename T>
num::Var factor(num::Graph<T>& g, num::Var h, num::Var t, num::Var w, num::Var b);

// Per-language projections of the typology vector, "poly.<lang>.W" [k, in]
// and "poly.<lang>.b" [k].
template <typename T>
class PolyglotProjection {
 public:
  static constexpr std::size_t kDefaultWidth = 20;

  PolyglotProjection() = default;
  static PolyglotProjection create(num::ParameterStore<T>& store, const TypologyTable& table, std::size_t width,
                                   num::Rng& rng);
  static PolyglotProjection attach(num::ParameterStore<T>& store, const TypologyTable& table);

  std::size_t width() const { return width_; }
  const TypologyTable& table() const { return table_; }

  num::Var apply(num::Graph<T>& g, num::Var h, std::string_view language) const;

 private:
  TypologyTable table_;
  std::size_t width_ = 0;
  std::vector<num::Parameter<T>*> weights_;
  std::vector<num::Parameter<T>*> biases_;
};

extern template class PolyglotProjection<float>;
extern template class PolyglotProjection<double>;

}  // namespace morph
