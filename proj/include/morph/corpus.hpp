#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "morph/schema.hpp"

namespace morph {

struct Token {
  std::string form;
  std::vector<char32_t> chars;
  std::string raw_tags;            // FEATS column as read
  MorphAnnotation annotation;      // decomposed, before null extension
  std::vector<std::string> unmapped;
  std::optional<std::string> pos;  // predicted POS, when a tagger has run
  std::vector<std::string> columns;
};

// Lines that are not tokens (comments, multiword ranges, empty nodes) are
// kept verbatim so a sentence can be written back unchanged.
struct SourceLine {
  std::string text;
  std::ptrdiff_t token = -1;
};

struct Sentence {
  std::vector<Token> tokens;
  std::string language;
  bool sentinels = false;  // <lang> markers surround the tokens when encoded
  std::vector<SourceLine> lines;
};

struct Corpus {
  std::string language;
  std::vector<Sentence> sentences;
  std::vector<std::string> warnings;
  std::size_t unmapped = 0;

  std::size_t token_count() const;
  std::vector<MorphAnnotation> annotations() const;
};

struct ReadOptions {
  const FeatureDictionary* dictionary = nullptr;  // no decomposition when null
  UnmappedPolicy policy = UnmappedPolicy::kLenient;
};

Corpus read_conllu(const std::filesystem::path& path, std::string language, const ReadOptions& opts = {});
Corpus parse_conllu(std::istream& in, std::string_view source, std::string language, const ReadOptions& opts = {});

// Writes the corpus back with FEATS replaced by `tags[s][t]` when given.
void write_conllu(std::ostream& out, const Corpus& corpus,
                  const std::vector<std::vector<std::string>>* tags = nullptr);

// Re-decomposes every token's raw tagset with `dict`.
void decompose_corpus(Corpus& corpus, const FeatureDictionary& dict, UnmappedPolicy policy);

std::string sentinel_marker(std::string_view language);

class Vocabulary {
 public:
  static constexpr std::size_t kPad = 0;
  static constexpr std::size_t kUnk = 1;

  Vocabulary() = default;
  // Words seen fewer than min_count times fall back to UNK. Every language
  // of the corpus gets a sentinel word whose characters are its marker.
  static Vocabulary build(const std::vector<const Sentence*>& sentences, std::size_t min_count = 1);
  static Vocabulary build(const std::vector<Sentence>& sentences, std::size_t min_count = 1);
  static Vocabulary deserialize(std::istream& in);

  std::size_t word(std::string_view form) const;
  std::size_t character(char32_t c) const;
  std::optional<std::size_t> language(std::string_view id) const;
  std::size_t sentinel(std::string_view language) const;

  std::size_t word_count() const { return words_.size(); }
  std::size_t char_count() const { return chars_.size(); }
  std::size_t language_count() const { return languages_.size(); }
  const std::vector<std::string>& languages() const { return languages_; }
  const std::vector<std::string>& words() const { return words_; }

  std::string serialize() const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.words_ == b.words_ && a.chars_ == b.chars_ && a.languages_ == b.languages_;
  }

 private:
  void index();

  std::vector<std::string> words_;
  std::vector<char32_t> chars_;
  std::vector<std::string> languages_;
  std::map<std::string, std::size_t, std::less<>> word_index_;
  std::map<char32_t, std::size_t> char_index_;
  std::map<std::string, std::size_t, std::less<>> language_index_;
};

struct ClusterMember {
  std::string language;
  std::filesystem::path path;  // treebank directory or training file
  std::size_t sentences = 0;
};

struct LanguageCluster {
  std::string name;
  std::vector<ClusterMember> members;
};

// Stanzas of the form
//   [name]
//   language-id  path
// Relative paths resolve against `root` (the config's directory by default).
std::vector<LanguageCluster> parse_cluster_config(std::istream& in, std::string_view source,
                                                  const std::filesystem::path& root);
std::vector<LanguageCluster> load_cluster_config(const std::filesystem::path& path,
                                                 std::optional<std::filesystem::path> root = std::nullopt);
const LanguageCluster& find_cluster(const std::vector<LanguageCluster>& clusters, std::string_view name);

enum class Split { kTrain, kDev, kTest };

// A file path is returned as is for kTrain; a directory is searched for a
// single *-train / *-dev / *-test .conllu file.
std::filesystem::path resolve_split(const std::filesystem::path& path, Split split);

struct ClusterPlan {
  std::size_t target = 0;
  std::map<std::string, std::size_t> full_copies;
  std::map<std::string, std::size_t> sampled;
};

// Every member contributes exactly min(cap, largest member size) sentences:
// larger corpora are sampled without replacement, smaller ones repeated
// whole and topped up with a sample. Sentences get language sentinels and
// the mixture is shuffled.
Corpus prepare_cluster(const LanguageCluster& cluster, const std::vector<Corpus>& corpora, std::size_t cap,
                       std::uint64_t seed, ClusterPlan* plan = nullptr);

}  // namespace morph
