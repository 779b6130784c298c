#include "morph/polyglot.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>

#include "morph/error.hpp"
#include "morph/text.hpp"

namespace morph {

TypologyTable::TypologyTable(std::vector<std::string> features, std::vector<TypologyVector> rows)
    : features_(std::move(features)), rows_(std::move(rows)) {
  std::set<std::string> seen;
  for (auto& r : rows_) {
    if (!seen.insert(r.language).second) throw LoadError("typology table lists " + r.language + " twice");
    if (r.values.size() != features_.size()) {
      throw DimensionError("typology row " + r.language + " has " + std::to_string(r.values.size()) +
                           " values for " + std::to_string(features_.size()) + " features");
    }
    r.features = features_;
  }
}

const TypologyVector& TypologyTable::row(std::string_view language) const {
  for (const auto& r : rows_) {
    if (r.language == language) return r;
  }
  throw LookupError("no typology vector for language " + std::string(language));
}

double TypologyTable::value(std::string_view language, std::string_view feature) const {
  const auto& r = row(language);
  auto it = std::find(features_.begin(), features_.end(), feature);
  if (it == features_.end()) throw LookupError("no typology feature " + std::string(feature));
  return r.values[static_cast<std::size_t>(it - features_.begin())];
}

void TypologyTable::write(std::ostream& out) const {
  out << "language";
  for (const auto& f : features_) out << '\t' << f;
  out << '\n';
  for (const auto& r : rows_) {
    out << r.language;
    for (double v : r.values) out << '\t' << text::format_real(v);
    out << '\n';
  }
}

TypologyTable TypologyTable::read(std::istream& in, std::string_view source) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(std::string(source) + ": missing header");
  auto header = text::split(line, '\t');
  if (header.empty() || header[0] != "language") throw ParseError(std::string(source) + ": header must start with 'language'");
  std::vector<std::string> features(header.begin() + 1, header.end());
  std::vector<TypologyVector> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    auto cols = text::split(line, '\t');
    if (cols.size() != header.size()) {
      throw ParseError(std::string(source) + ":" + std::to_string(lineno) + ": expected " +
                       std::to_string(header.size()) + " columns");
    }
    TypologyVector v;
    v.language = cols[0];
    for (std::size_t i = 1; i < cols.size(); ++i) v.values.push_back(text::parse_real(cols[i]));
    rows.push_back(std::move(v));
  }
  return TypologyTable(std::move(features), std::move(rows));
}

namespace {

struct LanguageCounts {
  std::size_t tokens = 0;
  std::map<std::string, std::size_t> with_dimension;
  std::map<std::string, std::size_t> with_pos;
  std::map<std::string, std::size_t> with_value;  // "POS-Dim-Value"
  std::map<std::string, std::set<std::string>> distinct;  // "POS-Dim"
};

std::vector<std::string> split_values(const std::string& v) { return text::split(v, '+'); }

LanguageCounts count(const Corpus& corpus, const TypologyOptions& opts) {
  LanguageCounts c;
  for (const auto& s : corpus.sentences) {
    for (const auto& t : s.tokens) {
      ++c.tokens;
      for (const auto& [dim, value] : t.annotation) {
        if (value != kNullValue) ++c.with_dimension[dim];
      }
      auto pos_it = t.annotation.find(kPosDimension);
      if (pos_it == t.annotation.end()) continue;
      for (const auto& pos : split_values(pos_it->second)) {
        ++c.with_pos[pos];
        for (const auto& dim : opts.value_dimensions) {
          auto it = t.annotation.find(dim);
          if (it == t.annotation.end() || it->second == kNullValue) continue;
          for (const auto& v : split_values(it->second)) {
            ++c.with_value[pos + "-" + dim + "-" + v];
            c.distinct[pos + "-" + dim].insert(v);
          }
        }
      }
    }
  }
  return c;
}

}  // namespace

TypologyTable build_cluster_typology(const std::vector<const Corpus*>& corpora, const TypologyOptions& opts) {
  if (corpora.empty()) throw ClusterError("typology needs at least one language");
  std::vector<LanguageCounts> counts;
  std::size_t total_tokens = 0;
  std::map<std::string, std::size_t> pos_tokens;
  std::set<std::string> dimensions;
  for (const auto* c : corpora) {
    counts.push_back(count(*c, opts));
    if (counts.back().tokens == 0) throw ClusterError("no tokens for language " + c->language);
    total_tokens += counts.back().tokens;
    for (const auto& [p, n] : counts.back().with_pos) pos_tokens[p] += n;
    for (const auto& [d, n] : counts.back().with_dimension) dimensions.insert(d);
  }

  std::vector<std::string> pos_set = opts.base_pos;
  for (const auto& [p, n] : pos_tokens) {
    const bool listed = std::find(pos_set.begin(), pos_set.end(), p) != pos_set.end();
    if (!listed && static_cast<double>(n) >= opts.pos_share * static_cast<double>(total_tokens)) pos_set.push_back(p);
  }

  enum class Kind { kDimension, kValue, kCount };
  struct Column {
    std::string name;
    Kind kind;
    std::string pos;
  };
  std::vector<Column> columns;
  std::vector<std::string> ordered_dims(dimensions.begin(), dimensions.end());
  std::stable_partition(ordered_dims.begin(), ordered_dims.end(), [](const std::string& d) { return d == kPosDimension; });
  for (const auto& d : ordered_dims) columns.push_back({d, Kind::kDimension, ""});
  for (const auto& pos : pos_set) {
    for (const auto& dim : opts.value_dimensions) {
      std::set<std::string> values;
      for (const auto& c : counts) {
        auto it = c.distinct.find(pos + "-" + dim);
        if (it != c.distinct.end()) values.insert(it->second.begin(), it->second.end());
      }
      for (const auto& v : values) columns.push_back({pos + "-" + dim + "-" + v, Kind::kValue, pos});
      columns.push_back({pos + "-" + dim + "-#", Kind::kCount, pos});
    }
  }

  std::vector<std::vector<double>> matrix(counts.size(), std::vector<double>(columns.size(), 0.0));
  for (std::size_t l = 0; l < counts.size(); ++l) {
    const auto& c = counts[l];
    for (std::size_t k = 0; k < columns.size(); ++k) {
      const auto& col = columns[k];
      double v = 0.0;
      switch (col.kind) {
        case Kind::kDimension: {
          auto it = c.with_dimension.find(col.name);
          if (it != c.with_dimension.end()) v = static_cast<double>(it->second) / static_cast<double>(c.tokens);
          break;
        }
        case Kind::kValue: {
          auto it = c.with_value.find(col.name);
          auto pt = c.with_pos.find(col.pos);
          if (it != c.with_value.end() && pt != c.with_pos.end()) {
            v = static_cast<double>(it->second) / static_cast<double>(pt->second);
          }
          break;
        }
        case Kind::kCount: {
          auto it = c.distinct.find(col.name.substr(0, col.name.size() - 2));
          if (it != c.distinct.end()) v = static_cast<double>(it->second.size());
          break;
        }
      }
      matrix[l][k] = v;
    }
  }
  for (std::size_t k = 0; k < columns.size(); ++k) {
    if (columns[k].kind != Kind::kCount) continue;
    double top = 0.0;
    for (const auto& row : matrix) top = std::max(top, row[k]);
    if (top > 0.0) {
      for (auto& row : matrix) row[k] /= top;
    }
  }

  std::vector<std::string> names;
  std::vector<std::size_t> kept;
  for (std::size_t k = 0; k < columns.size(); ++k) {
    bool any = false;
    for (const auto& row : matrix) any = any || row[k] != 0.0;
    if (any) {
      kept.push_back(k);
      names.push_back(columns[k].name);
    }
  }
  std::vector<TypologyVector> rows;
  for (std::size_t l = 0; l < counts.size(); ++l) {
    TypologyVector v;
    v.language = corpora[l]->language;
    for (std::size_t k : kept) v.values.push_back(matrix[l][k]);
    rows.push_back(std::move(v));
  }
  return TypologyTable(std::move(names), std::move(rows));
}

TypologyVector build_typology_vector(const Corpus& corpus, const TypologyOptions& opts) {
  return build_cluster_typology({&corpus}, opts).rows().front();
}

const std::array<std::string_view, 18>& uriel_features() {
  static const std::array<std::string_view, 18> names = {
      "S_SVO",
      "S_SOV",
      "S_VSO",
      "S_VOS",
      "S_OVS",
      "S_OSV",
      "S_SUBJECT_BEFORE_VERB",
      "S_SUBJECT_AFTER_VERB",
      "S_OBJECT_AFTER_VERB",
      "S_OBJECT_BEFORE_VERB",
      "S_SUBJECT_BEFORE_OBJECT",
      "S_SUBJECT_AFTER_OBJECT",
      "S_ADPOSITION_BEFORE_NOUN",
      "S_ADPOSITION_AFTER_NOUN",
      "S_POSSESSOR_BEFORE_NOUN",
      "S_POSSESSOR_AFTER_NOUN",
      "S_ADJECTIVE_BEFORE_NOUN",
      "S_ADJECTIVE_AFTER_NOUN",
  };
  return names;
}

namespace {

// URIEL spells the features with underscores; hyphenated spellings are accepted too.
std::string canonical_feature(std::string_view name) {
  std::string s(name);
  std::replace(s.begin(), s.end(), '-', '_');
  return s;
}

}  // namespace

TypologyTable parse_uriel_subset(std::istream& in, std::string_view source, const std::vector<std::string>& languages) {
  std::string line;
  if (!std::getline(in, line)) throw LoadError(std::string(source) + ": empty URIEL file");
  auto header = text::split(line, '\t');
  std::map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < header.size(); ++i) column[canonical_feature(text::trim(header[i]))] = i;
  if (!column.count("language")) throw LoadError(std::string(source) + ": no 'language' column");
  std::vector<std::size_t> picks;
  for (auto name : uriel_features()) {
    auto it = column.find(std::string(name));
    if (it == column.end()) throw LoadError(std::string(source) + ": missing feature column " + std::string(name));
    picks.push_back(it->second);
  }
  std::map<std::string, std::vector<double>> by_language;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty() || line.front() == '#') continue;
    auto cols = text::split(line, '\t');
    if (cols.size() != header.size()) {
      throw LoadError(std::string(source) + ":" + std::to_string(lineno) + ": expected " +
                      std::to_string(header.size()) + " columns");
    }
    std::vector<double> values;
    for (std::size_t p : picks) values.push_back(text::parse_real(text::trim(cols[p])));
    by_language[std::string(text::trim(cols[column.at("language")]))] = std::move(values);
  }
  std::vector<TypologyVector> rows;
  for (const auto& lang : languages) {
    auto it = by_language.find(lang);
    if (it == by_language.end()) throw LoadError(std::string(source) + ": no URIEL row for language " + lang);
    rows.push_back({lang, {}, it->second});
  }
  std::vector<std::string> names;
  for (auto n : uriel_features()) names.emplace_back(n);
  return TypologyTable(std::move(names), std::move(rows));
}

TypologyTable load_uriel_subset(const std::filesystem::path& path, const std::vector<std::string>& languages) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open URIEL file " + path.string());
  return parse_uriel_subset(in, path.string(), languages);
}

template <typename T>
num::Var factor(num::Graph<T>& g, num::Var h, num::Var t, num::Var w, num::Var b) {
  const auto& W = g.value(w);
  if (W.rank() != 2 || W.dim(1) != g.value(t).size()) {
    throw ContractError("typology vector of width " + std::to_string(g.value(t).size()) +
                        " does not match projection " + num::shape_str(W.shape()));
  }
  return g.outer_rows(h, g.tanh(g.linear(t, w, b)));
}

template <typename T>
PolyglotProjection<T> PolyglotProjection<T>::create(num::ParameterStore<T>& store, const TypologyTable& table,
                                                    std::size_t width, num::Rng& rng) {
  if (width == 0) throw ConfigError("polyglot projection width must be positive");
  if (table.width() == 0) throw ConfigError("typology table has no features");
  PolyglotProjection p;
  p.table_ = table;
  p.width_ = width;
  for (const auto& r : table.rows()) {
    auto& w = store.add("poly." + r.language + ".W", {width, table.width()});
    auto& b = store.add("poly." + r.language + ".b", {width});
    num::init_fan_in(w.value, rng);
    p.weights_.push_back(&w);
    p.biases_.push_back(&b);
  }
  return p;
}

template <typename T>
PolyglotProjection<T> PolyglotProjection<T>::attach(num::ParameterStore<T>& store, const TypologyTable& table) {
  PolyglotProjection p;
  p.table_ = table;
  for (const auto& r : table.rows()) {
    p.weights_.push_back(&store.get("poly." + r.language + ".W"));
    p.biases_.push_back(&store.get("poly." + r.language + ".b"));
  }
  if (p.weights_.empty()) throw LoadError("polyglot projection without languages");
  p.width_ = p.weights_.front()->value.dim(0);
  return p;
}

template <typename T>
num::Var PolyglotProjection<T>::apply(num::Graph<T>& g, num::Var h, std::string_view language) const {
  const auto& rows = table_.rows();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].language != language) continue;
    std::vector<T> tv(rows[i].values.begin(), rows[i].values.end());
    const num::Shape shape{tv.size()};
    const num::Var t = g.constant(num::Tensor<T>(shape, std::move(tv)));
    return factor(g, h, t, g.param(*weights_[i]), g.param(*biases_[i]));
  }
  throw ContractError("language " + std::string(language) + " has no polyglot projection");
}

template num::Var factor<float>(num::Graph<float>&, num::Var, num::Var, num::Var, num::Var);
template num::Var factor<double>(num::Graph<double>&, num::Var, num::Var, num::Var, num::Var);
template class PolyglotProjection<float>;
template class PolyglotProjection<double>;

}  // namespace morph
