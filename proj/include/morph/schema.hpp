#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace morph {

inline constexpr std::string_view kNullValue = "_";
inline constexpr std::string_view kPosDimension = "POS";

// Dimension -> fine-grained value. Before null extension only the dimensions
// a token carries are present; after extension every schema dimension is.
using MorphAnnotation = std::map<std::string, std::string, std::less<>>;

// Maps fine-grained UniMorph values (NOM, PL, FEM, ...) to their coarse
// dimension (Case, Number, Gender, ...).
class FeatureDictionary {
 public:
  struct Entry {
    std::string dimension;
    std::string source;  // "file:line" of the defining row
  };

  // Two tab-separated columns (value, dimension); '#' starts a comment.
  // A value listed under two different dimensions is a LoadError.
  static FeatureDictionary load(const std::filesystem::path& path, std::vector<std::string>* warnings = nullptr);
  static FeatureDictionary parse(std::istream& in, std::string_view source, std::vector<std::string>* warnings = nullptr);

  void add(std::string value, std::string dimension, std::string source = "<memory>");

  // Direct entries first; otherwise an alternative reading such as ACC/ERG or
  // {DAT/GEN} resolves when all of its parts share one dimension.
  std::optional<std::string> dimension_of(std::string_view value) const;

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::map<std::string, std::size_t> values_per_dimension() const;
  const std::map<std::string, Entry, std::less<>>& entries() const { return entries_; }

 private:
  std::map<std::string, Entry, std::less<>> entries_;
};

enum class UnmappedPolicy { kStrict, kLenient };

struct Decomposition {
  MorphAnnotation values;
  std::vector<std::string> unmapped;
};

// Routes each component of a semicolon-joined tagset to its dimension. "_"
// yields an empty annotation. Two components landing in the same dimension
// are kept as one '+'-joined label (sorted), which compose() splits again.
// Under kStrict an unmapped component throws SchemaError; under kLenient it
// is dropped and reported in `unmapped`.
Decomposition decompose_tagset(std::string_view raw, const FeatureDictionary& dict,
                               UnmappedPolicy policy = UnmappedPolicy::kLenient);

// The coarse dimensions and per-dimension label spaces a model predicts over.
// Dimensions are ordered POS first, then lexicographically; labels are
// lexicographic and always include "_". Immutable once built.
class FeatureSchema {
 public:
  FeatureSchema() = default;

  // Union of observed dimensions and values. Throws SchemaError when empty.
  static FeatureSchema build(const std::vector<MorphAnnotation>& annotations);
  static FeatureSchema from_label_spaces(const std::map<std::string, std::vector<std::string>>& spaces);
  static FeatureSchema deserialize(std::istream& in);

  const std::vector<std::string>& dimensions() const { return dimensions_; }
  const std::vector<std::string>& labels(std::string_view dimension) const;
  std::optional<std::size_t> dimension_index(std::string_view dimension) const;
  std::optional<std::size_t> label_index(std::string_view dimension, std::string_view value) const;
  std::size_t null_index(std::string_view dimension) const;
  bool contains(std::string_view dimension, std::string_view value) const {
    return label_index(dimension, value).has_value();
  }

  // Total assignment: every schema dimension present, missing ones set to
  // "_". Unknown dimensions or values throw ContractError.
  MorphAnnotation extend(const MorphAnnotation& partial) const;

  // Joins non-null values POS first, then by dimension name; "_" when all
  // are null. Needs a total assignment whose values lie in the label spaces.
  std::string compose(const MorphAnnotation& total) const;

  FeatureSchema merged_with(const FeatureSchema& other) const;

  // Labels present in `other` but missing here, as "Dimension=value".
  std::vector<std::string> novel_labels(const FeatureSchema& other) const;

  std::string serialize() const;

  friend bool operator==(const FeatureSchema& a, const FeatureSchema& b) {
    return a.dimensions_ == b.dimensions_ && a.labels_ == b.labels_;
  }

 private:
  void index();

  std::vector<std::string> dimensions_;
  std::vector<std::vector<std::string>> labels_;
  std::map<std::string, std::size_t, std::less<>> dim_index_;
  std::vector<std::map<std::string, std::size_t, std::less<>>> label_index_;
};

// The set of fine-grained values of a tagset string, ignoring "_".
std::vector<std::string> tagset_values(std::string_view raw);

}  // namespace morph
